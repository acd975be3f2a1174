#pragma once

// Normal-Inverse-Gamma evidential regression loss.
//
// Per dimension, with Omega = 2 beta (1 + nu), the negative log of the
// Student-t marginal is
//   0.5 ln(pi / nu) - alpha ln Omega + (alpha + 0.5) ln((z - mu)^2 nu + Omega)
//   + lgamma(alpha) - lgamma(alpha + 0.5)
// and the NLL sums it over dimensions.

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "echo/error.hpp"

namespace echo::policy {

/// nu, alpha and beta hold either one shared value or one value per
/// dimension of mu.
struct NIGParams {
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  static NIGParams shared(Eigen::VectorXd mu, double nu, double alpha, double beta) {
    return {std::move(mu), Eigen::VectorXd::Constant(1, nu), Eigen::VectorXd::Constant(1, alpha),
            Eigen::VectorXd::Constant(1, beta)};
  }

  bool is_shared() const { return nu.size() == 1 && alpha.size() == 1 && beta.size() == 1; }
  double nu_at(Eigen::Index i) const { return nu.size() == 1 ? nu(0) : nu(i); }
  double alpha_at(Eigen::Index i) const { return alpha.size() == 1 ? alpha(0) : alpha(i); }
  double beta_at(Eigen::Index i) const { return beta.size() == 1 ? beta(0) : beta(i); }

  void validate() const {
    require(mu.size() > 0, ErrorCode::EmptyInput, "NIG mean is empty");
    for (const auto* v : {&nu, &alpha, &beta}) {
      require(v->size() == 1 || v->size() == mu.size(), ErrorCode::ShapeMismatch,
              "NIG parameters must be scalar or match the mean");
      require(v->allFinite(), ErrorCode::NonFinite, "NIG parameters must be finite");
    }
    require(mu.allFinite(), ErrorCode::NonFinite, "NIG mean must be finite");
    require((nu.array() > 0).all(), ErrorCode::ConstraintViolation, "NIG needs nu > 0");
    require((alpha.array() > 1).all(), ErrorCode::ConstraintViolation, "NIG needs alpha > 1");
    require((beta.array() > 0).all(), ErrorCode::ConstraintViolation, "NIG needs beta > 0");
  }
};

inline double evidential_nll_scalar(double err, double nu, double alpha, double beta) {
  const double omega = 2.0 * beta * (1.0 + nu);
  return 0.5 * std::log(std::numbers::pi / nu) - alpha * std::log(omega) +
         (alpha + 0.5) * std::log(err * err * nu + omega) + std::lgamma(alpha) - std::lgamma(alpha + 0.5);
}

inline double evidential_nll(const Eigen::VectorXd& z, const NIGParams& p) {
  p.validate();
  require(z.size() == p.mu.size(), ErrorCode::ShapeMismatch, "target and NIG mean differ in size");
  require(z.allFinite(), ErrorCode::NonFinite, "target must be finite");
  double sum = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    sum += evidential_nll_scalar(z(i) - p.mu(i), p.nu_at(i), p.alpha_at(i), p.beta_at(i));
  }
  return sum;
}

/// Shared parameters: lambda |z - mu|_2 (2 nu + alpha). Per-dimension
/// parameters: lambda sum_i |z_i - mu_i| (2 nu_i + alpha_i).
inline double evidential_reg(const Eigen::VectorXd& z, const NIGParams& p, double lambda = 0.2) {
  p.validate();
  require(z.size() == p.mu.size(), ErrorCode::ShapeMismatch, "target and NIG mean differ in size");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (p.is_shared()) return lambda * (z - p.mu).norm() * (2.0 * p.nu(0) + p.alpha(0));
  double sum = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    sum += std::abs(z(i) - p.mu(i)) * (2.0 * p.nu_at(i) + p.alpha_at(i));
  }
  return lambda * sum;
}

inline double evidential_loss(const Eigen::VectorXd& z, const NIGParams& p, double lambda = 0.2) {
  return evidential_nll(z, p) + evidential_reg(z, p, lambda);
}

}  // namespace echo::policy
