#pragma once

// Reverse steps on an x0-predicting denoiser.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echo/diffusion/schedule.hpp"
#include "echo/error.hpp"

namespace echo::diffusion {

using ConditionTag = std::optional<std::string>;

inline Eigen::MatrixXd implied_noise(const Eigen::MatrixXd& m_t, int t, const Eigen::MatrixXd& x0_pred,
                                     const NoiseSchedule& sched) {
  const double ab = sched.alpha_bar(t);
  require(ab < 1.0, ErrorCode::InvalidTimestep, "implied noise undefined at alpha_bar = 1");
  return (m_t - std::sqrt(ab) * x0_pred) / std::sqrt(1.0 - ab);
}

inline double ddim_sigma(int t, int t_prev, double eta, const NoiseSchedule& sched) {
  const double ab = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t_prev);
  return eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab)) * std::sqrt(1.0 - ab / ab_prev);
}

inline Eigen::MatrixXd ddim_step(const Eigen::MatrixXd& m_t, int t, int t_prev, const Eigen::MatrixXd& x0_pred,
                                 double eta, const NoiseSchedule& sched, const Eigen::MatrixXd& noise) {
  require(t > t_prev && t_prev >= 0 && t <= sched.steps(), ErrorCode::InvalidTimestep,
          "ddim_step needs T >= t > t_prev >= 0");
  require(eta >= 0.0, ErrorCode::InvalidArgument, "eta must be non-negative");
  require_same_shape(m_t, x0_pred, "ddim_step");
  require_same_shape(m_t, noise, "ddim_step");
  const double ab_prev = sched.alpha_bar(t_prev);
  const double sigma = ddim_sigma(t, t_prev, eta, sched);
  const double dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
  const Eigen::MatrixXd eps = implied_noise(m_t, t, x0_pred, sched);
  Eigen::MatrixXd out = std::sqrt(ab_prev) * x0_pred + dir * eps;
  if (sigma > 0.0) out += sigma * noise;
  return out;
}

struct PosteriorCoefficients {
  double x0 = 0;     // weight on the x0 prediction
  double x_t = 0;    // weight on M_t
  double sigma = 0;  // noise scale
};

/// q(M_{t_prev} | M_t, M_0). With t_prev = t - 1 this is the usual DDPM
/// posterior; larger strides use alpha_bar_t / alpha_bar_{t_prev} in place of
/// alpha_t.
inline PosteriorCoefficients posterior_coefficients(int t, int t_prev, const NoiseSchedule& sched) {
  require(t >= 1 && t <= sched.steps() && t_prev >= 0 && t_prev < t, ErrorCode::InvalidTimestep,
          "posterior needs T >= t > t_prev >= 0");
  const double ab = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t_prev);
  const double a = t_prev == t - 1 ? sched.alpha(t) : ab / ab_prev;
  const double b = t_prev == t - 1 ? sched.beta(t) : 1.0 - a;
  PosteriorCoefficients c;
  c.x0 = std::sqrt(ab_prev) * b / (1.0 - ab);
  c.x_t = std::sqrt(a) * (1.0 - ab_prev) / (1.0 - ab);
  c.sigma = t_prev == 0 ? 0.0 : std::sqrt(b * (1.0 - ab_prev) / (1.0 - ab));
  return c;
}

inline Eigen::MatrixXd ddpm_step(const Eigen::MatrixXd& m_t, int t, const Eigen::MatrixXd& x0_pred,
                                 const NoiseSchedule& sched, const Eigen::MatrixXd& noise,
                                 std::optional<int> t_prev = std::nullopt) {
  require(t >= 1, ErrorCode::InvalidTimestep, "ddpm_step needs t >= 1");
  require_same_shape(m_t, x0_pred, "ddpm_step");
  require_same_shape(m_t, noise, "ddpm_step");
  const auto c = posterior_coefficients(t, t_prev.value_or(t - 1), sched);
  Eigen::MatrixXd out = c.x0 * x0_pred + c.x_t * m_t;
  if (c.sigma > 0.0) out += c.sigma * noise;
  return out;
}

inline Eigen::MatrixXd cfg_combine(const Eigen::MatrixXd& cond, const Eigen::MatrixXd& uncond, double scale) {
  require_same_shape(cond, uncond, "cfg_combine");
  // u + 1 * (c - u) can differ from c in the last bit.
  if (scale == 1.0) return cond;
  return uncond + scale * (cond - uncond);
}

using FrameMask = std::vector<bool>;

/// Squared error summed over valid frames, divided by valid_frames * dims.
inline double masked_l2_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, const FrameMask& mask) {
  require_same_shape(pred, target, "masked_l2_loss");
  require(mask.size() == static_cast<std::size_t>(pred.rows()), ErrorCode::ShapeMismatch,
          "mask length differs from sequence length");
  double sum = 0;
  Eigen::Index valid = 0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    sum += (pred.row(r) - target.row(r)).squaredNorm();
    ++valid;
  }
  require(valid > 0, ErrorCode::InvalidArgument, "mask has no valid frames");
  return sum / static_cast<double>(valid * pred.cols());
}

inline ConditionTag cond_dropout(const ConditionTag& tag, double p_uncond, std::mt19937_64& rng) {
  require(p_uncond >= 0.0 && p_uncond <= 1.0, ErrorCode::InvalidArgument, "p_uncond must lie in [0, 1]");
  std::bernoulli_distribution drop(p_uncond);
  if (drop(rng)) return std::nullopt;
  return tag;
}

inline ConditionTag cond_dropout(const ConditionTag& tag, double p_uncond, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return cond_dropout(tag, p_uncond, rng);
}

struct EmaWeights {
  double decay = 0.999;
  Eigen::VectorXd shadow;
};

inline EmaWeights ema_init(const Eigen::VectorXd& current, double decay = 0.999) {
  require(decay >= 0.0 && decay < 1.0, ErrorCode::InvalidArgument, "EMA decay must lie in [0, 1)");
  return {decay, current};
}

inline EmaWeights ema_update(const EmaWeights& ema, const Eigen::VectorXd& current) {
  require(ema.shadow.size() == current.size(), ErrorCode::ShapeMismatch, "EMA length mismatch");
  return {ema.decay, ema.decay * ema.shadow + (1.0 - ema.decay) * current};
}

}  // namespace echo::diffusion
