#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"

namespace echo::diffusion {

/// Betas indexed 1..T. Index 0 is the clean boundary with alpha_bar = 1.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int steps = 1000, double beta_start = 1e-4, double beta_end = 0.02) {
    require(steps >= 1, ErrorCode::InvalidArgument, "schedule needs T >= 1");
    std::vector<double> betas(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      const double u = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
      betas[static_cast<std::size_t>(i)] = beta_start + u * (beta_end - beta_start);
    }
    return NoiseSchedule(std::move(betas));
  }

  explicit NoiseSchedule(std::vector<double> betas) {
    require(!betas.empty(), ErrorCode::InvalidArgument, "schedule needs at least one beta");
    beta_.assign(1, 0.0);
    alpha_bar_.assign(1, 1.0);
    for (double b : betas) {
      require(b > 0.0 && b < 1.0 && std::isfinite(b), ErrorCode::InvalidArgument, "betas must lie in (0, 1)");
      beta_.push_back(b);
      alpha_bar_.push_back(alpha_bar_.back() * (1.0 - b));
    }
  }

  int steps() const { return static_cast<int>(beta_.size()) - 1; }
  double beta(int t) const { return beta_.at(check(t, 1)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const { return alpha_bar_.at(check(t, 0)); }

 private:
  std::size_t check(int t, int lowest) const {
    require(t >= lowest && t <= steps(), ErrorCode::InvalidTimestep,
            "timestep " + std::to_string(t) + " outside [" + std::to_string(lowest) + ", " +
                std::to_string(steps()) + "]");
    return static_cast<std::size_t>(t);
  }

  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

inline void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::ShapeMismatch,
          std::string(what) + ": shape mismatch");
}

inline Eigen::MatrixXd forward_noise_at(const Eigen::MatrixXd& m0, double alpha_bar, const Eigen::MatrixXd& noise) {
  require_same_shape(m0, noise, "forward_noise");
  require(alpha_bar >= 0.0 && alpha_bar <= 1.0, ErrorCode::InvalidArgument, "alpha_bar outside [0, 1]");
  return std::sqrt(alpha_bar) * m0 + std::sqrt(1.0 - alpha_bar) * noise;
}

inline Eigen::MatrixXd forward_noise(const Eigen::MatrixXd& m0, int t, const Eigen::MatrixXd& noise,
                                     const NoiseSchedule& sched) {
  return forward_noise_at(m0, sched.alpha_bar(t), noise);
}

/// Sub-sampled timesteps T = t_0 > t_1 > ... > t_n = 0, evenly spaced.
inline std::vector<int> timestep_sequence(int total, int num_steps) {
  require(num_steps >= 1 && num_steps <= total, ErrorCode::InvalidArgument,
          "num_steps must lie in [1, T]");
  std::vector<int> ts;
  for (int i = 0; i <= num_steps; ++i) {
    const int t = static_cast<int>(std::lround(static_cast<double>(total) * (num_steps - i) / num_steps));
    ts.push_back(t);
  }
  return ts;
}

}  // namespace echo::diffusion
