#pragma once

#include <optional>

#include <Eigen/Core>

#include "echo/error.hpp"

namespace echo::policy {

inline Eigen::VectorXd ema_action_filter(const std::optional<Eigen::VectorXd>& prev, const Eigen::VectorXd& next,
                                         double beta) {
  require(beta >= 0.0 && beta < 1.0, ErrorCode::InvalidArgument, "filter beta must lie in [0, 1)");
  require(next.allFinite(), ErrorCode::NonFinite, "action is not finite");
  if (!prev) return next;
  require(prev->size() == next.size(), ErrorCode::ShapeMismatch, "action size changed");
  return beta * *prev + (1.0 - beta) * next;
}

/// Stateful form for one action stream; the first action passes through.
class ActionFilter {
 public:
  explicit ActionFilter(double beta) : beta_(beta) {
    require(beta >= 0.0 && beta < 1.0, ErrorCode::InvalidArgument, "filter beta must lie in [0, 1)");
  }

  const Eigen::VectorXd& operator()(const Eigen::VectorXd& next) {
    state_ = ema_action_filter(state_, next, beta_);
    return *state_;
  }

  void reset() { state_.reset(); }
  double beta() const { return beta_; }

 private:
  double beta_;
  std::optional<Eigen::VectorXd> state_;
};

}  // namespace echo::policy
