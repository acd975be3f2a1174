#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"

namespace echo::policy {

struct RewardTerm {
  double weight = 1.0;
  double sigma = 1.0;  // divides the squared error directly
};

/// Penalty weights for the regularization terms of the tracker. Stored for
/// callers that assemble the full reward; the functions here only use the
/// tracking terms.
struct RegularizationWeights {
  double survival = 3.0;
  double feet_air_time_ref = 5.0;
  double feet_air_time_dense = 1.0;
  double joint_velocity = 5.0e-4;
  double joint_acceleration = 2.0e-8;
  double action_rate = 0.01;
  double joint_position_limits = 1.0;
  double torque = 0.01;
};

struct RewardConfig {
  std::map<std::string, RewardTerm> terms{{"joint_pos", {1.0, 0.5}}, {"joint_vel", {0.5, 10.0}}};
  RegularizationWeights regularization;

  /// Joint terms plus the root, velocity and keypoint tracking terms.
  static RewardConfig full() {
    RewardConfig c;
    c.terms["root_pos"] = {0.5, 0.25};
    c.terms["root_rot"] = {0.5, 0.25};
    c.terms["root_lin_vel"] = {1.0, 1.0};
    c.terms["root_ang_vel"] = {1.0, 1.0};
    c.terms["keypoint"] = {1.0, 0.25};
    c.terms["upper_body"] = {0.5, 0.5};
    c.terms["lower_body"] = {0.5, 0.5};
    return c;
  }

  void validate() const {
    require(!terms.empty(), ErrorCode::InvalidArgument, "reward config has no terms");
    for (const auto& [name, t] : terms) {
      require(t.weight >= 0.0 && std::isfinite(t.weight), ErrorCode::InvalidArgument,
              "negative weight for reward term " + name);
      require(t.sigma > 0.0 && std::isfinite(t.sigma), ErrorCode::InvalidArgument,
              "non-positive sigma for reward term " + name);
    }
  }
};

using FeatureMap = std::map<std::string, Eigen::VectorXd>;

struct TrackingReward {
  double total = 0.0;
  std::map<std::string, double> terms;
};

/// sum_k w_k exp(-|x_k - x*_k|^2 / sigma_k) over the configured terms.
inline TrackingReward tracking_reward(const FeatureMap& actual, const FeatureMap& reference,
                                      const RewardConfig& cfg = {}) {
  cfg.validate();
  TrackingReward r;
  for (const auto& [name, term] : cfg.terms) {
    const auto a = actual.find(name);
    const auto b = reference.find(name);
    require(a != actual.end() && b != reference.end(), ErrorCode::MissingFeature, "missing feature " + name);
    require(a->second.size() == b->second.size(), ErrorCode::ShapeMismatch,
            "feature " + name + " has different sizes");
    require(a->second.allFinite() && b->second.allFinite(), ErrorCode::NonFinite,
            "feature " + name + " is not finite");
    const double value = term.weight * std::exp(-(a->second - b->second).squaredNorm() / term.sigma);
    r.terms[name] = value;
    r.total += value;
  }
  return r;
}

struct ContactSample {
  double vz = 0.0;  // m/s, positive up
  bool in_contact = false;
};

/// -sum (min(vz, 0))^2 over points in contact. Upward separation is free.
inline double impact_penalty(std::span<const ContactSample> contacts) {
  double p = 0;
  for (const auto& c : contacts) {
    require(std::isfinite(c.vz), ErrorCode::NonFinite, "contact velocity is not finite");
    if (!c.in_contact) continue;
    const double down = std::min(c.vz, 0.0);
    p += down * down;
  }
  return -p;
}

struct AirTimeConfig {
  double target = 0.4;   // s
  double penalty = 1.0;  // per second beyond twice the target
  double fps = 50.0;
};

/// Event form: each swing that ends in touchdown earns
/// min(air, target) - penalty * max(0, air - 2 target). A swing still open at
/// the end of the window earns nothing.
inline double feet_air_time_reward(const std::vector<bool>& contact, const AirTimeConfig& cfg = {}) {
  require(!contact.empty(), ErrorCode::EmptyInput, "air time needs at least one frame");
  require(cfg.fps > 0 && cfg.target > 0 && cfg.penalty >= 0, ErrorCode::InvalidArgument,
          "air time config must be positive");
  double reward = 0;
  std::size_t swing = 0;
  bool seen_swing = false;
  for (bool c : contact) {
    if (!c) {
      ++swing;
      seen_swing = true;
      continue;
    }
    if (seen_swing) {
      const double air = static_cast<double>(swing) / cfg.fps;
      reward += std::min(air, cfg.target) - cfg.penalty * std::max(0.0, air - 2.0 * cfg.target);
    }
    swing = 0;
    seen_swing = false;
  }
  return reward;
}

/// Dense form: every swing frame earns its duration while the swing is
/// still within the target.
inline double feet_air_time_dense(const std::vector<bool>& contact, const AirTimeConfig& cfg = {}) {
  require(!contact.empty(), ErrorCode::EmptyInput, "air time needs at least one frame");
  require(cfg.fps > 0 && cfg.target > 0, ErrorCode::InvalidArgument, "air time config must be positive");
  const double dt = 1.0 / cfg.fps;
  double reward = 0, air = 0;
  for (bool c : contact) {
    if (c) {
      air = 0;
      continue;
    }
    reward += std::max(0.0, std::min(dt, cfg.target - air));
    air += dt;
  }
  return reward;
}

}  // namespace echo::policy
