#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"
#include "echo/motion/joints.hpp"
#include "echo/text.hpp"

namespace echo::policy {

/// out[i] = sign[i] * in[source[i]].
struct MirrorMap {
  std::vector<std::size_t> source;
  std::vector<double> sign;

  std::size_t size() const { return source.size(); }

  static MirrorMap identity(std::size_t n) {
    MirrorMap m;
    for (std::size_t i = 0; i < n; ++i) {
      m.source.push_back(i);
      m.sign.push_back(1.0);
    }
    return m;
  }

  void validate() const {
    require(source.size() == sign.size() && !source.empty(), ErrorCode::ShapeMismatch,
            "mirror map needs one sign per index");
    for (std::size_t i = 0; i < source.size(); ++i) {
      require(source[i] < source.size(), ErrorCode::InvalidArgument, "mirror index out of range");
      require(sign[i] == 1.0 || sign[i] == -1.0, ErrorCode::InvalidArgument, "mirror signs must be +1 or -1");
    }
    for (std::size_t i = 0; i < source.size(); ++i) {
      const std::size_t j = source[i];
      require(source[j] == i && sign[i] * sign[j] == 1.0, ErrorCode::NotInvolution,
              "mirror map applied twice is not the identity at index " + std::to_string(i));
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    require(static_cast<std::size_t>(v.size()) == size(), ErrorCode::ShapeMismatch, "mirror dimension mismatch");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = sign[i] * v(static_cast<Eigen::Index>(source[i]));
    }
    return out;
  }

  /// Permutation only; for non-negative magnitudes such as std devs.
  Eigen::VectorXd permute(const Eigen::VectorXd& v) const {
    require(static_cast<std::size_t>(v.size()) == size(), ErrorCode::ShapeMismatch, "mirror dimension mismatch");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(source[i]));
    }
    return out;
  }
};

/// Text table, one row per index: `index, mirrored_index, sign`.
inline MirrorMap parse_mirror_map(std::span<const std::string> lines) {
  std::vector<std::optional<std::pair<std::size_t, double>>> rows;
  for (const auto& line : lines) {
    if (text::is_comment(line)) continue;
    const auto tok = text::tokens(text::strip_comment(line));
    require(tok.size() == 3, ErrorCode::Format, "mirror row needs `index, mirrored_index, sign`: " + line);
    const auto i = text::parse_number<std::size_t>(tok[0]);
    const auto j = text::parse_number<std::size_t>(tok[1]);
    const auto s = text::parse_number<double>(tok[2]);
    if (rows.size() <= i) rows.resize(i + 1);
    require(!rows[i].has_value(), ErrorCode::Format, "duplicate mirror row " + std::to_string(i));
    rows[i] = std::pair{j, s};
  }
  MirrorMap m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].has_value(), ErrorCode::Format, "missing mirror row " + std::to_string(i));
    m.source.push_back(rows[i]->first);
    m.sign.push_back(rows[i]->second);
  }
  m.validate();
  return m;
}

inline MirrorMap load_mirror_map(const std::string& path) {
  const auto lines = text::read_lines(path);
  return parse_mirror_map(lines);
}

/// Left/right swap over the joint ordering; roll and yaw joints change sign,
/// including the waist joints that map onto themselves.
inline MirrorMap g1_joint_mirror() {
  MirrorMap m;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    std::string name(kJointNames[i]);
    std::string other = name;
    if (name.starts_with("left_")) other = "right_" + name.substr(5);
    if (name.starts_with("right_")) other = "left_" + name.substr(6);
    m.source.push_back(*joint_index(other));
    const bool flips = name.ends_with("_roll") || name.ends_with("_yaw");
    m.sign.push_back(flips ? -1.0 : 1.0);
  }
  return m;
}

struct SymmetrySpec {
  MirrorMap obs;
  MirrorMap act;
  double c_mu = 1.0;
  double c_sigma = 1.0;

  void validate() const {
    obs.validate();
    act.validate();
    require(c_mu >= 0 && c_sigma >= 0, ErrorCode::InvalidArgument, "symmetry coefficients must be >= 0");
  }
};

struct PolicyOutput {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
};

using Policy = std::function<PolicyOutput(const Eigen::VectorXd&)>;

/// c_mu |mu(o) - T(mu(T_obs o))|^2 + c_sigma |sigma(o) - P(sigma(T_obs o))|^2,
/// where T is the signed action mirror and P its permutation part.
inline double symmetry_loss(const Policy& policy, const Eigen::VectorXd& obs, const SymmetrySpec& spec) {
  spec.validate();
  const auto direct = policy(obs);
  const auto mirrored = policy(spec.obs.apply(obs));
  for (const auto* out : {&direct, &mirrored}) {
    require(static_cast<std::size_t>(out->mu.size()) == spec.act.size() &&
                static_cast<std::size_t>(out->sigma.size()) == spec.act.size(),
            ErrorCode::ShapeMismatch, "policy output size differs from the action mirror");
  }
  const double mu_term = (direct.mu - spec.act.apply(mirrored.mu)).squaredNorm();
  const double sigma_term = (direct.sigma - spec.act.permute(mirrored.sigma)).squaredNorm();
  return spec.c_mu * mu_term + spec.c_sigma * sigma_term;
}

}  // namespace echo::policy
