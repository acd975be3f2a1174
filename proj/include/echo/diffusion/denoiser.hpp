#pragma once

#include <map>
#include <mutex>
#include <string>

#include <Eigen/Core>

#include "echo/diffusion/schedule.hpp"
#include "echo/diffusion/steps.hpp"
#include "echo/error.hpp"

namespace echo::diffusion {

/// Maps (M_t, t, condition) to a prediction of M_0 with the same shape.
/// An exclusive denoiser is not safe for concurrent calls; predict()
/// serializes them.
class Denoiser {
 public:
  explicit Denoiser(bool exclusive = false) : exclusive_(exclusive) {}
  virtual ~Denoiser() = default;
  Denoiser(const Denoiser&) = delete;
  Denoiser& operator=(const Denoiser&) = delete;

  bool exclusive() const { return exclusive_; }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& m_t, int t, const ConditionTag& cond) const {
    Eigen::MatrixXd out;
    if (exclusive_) {
      std::lock_guard lock(mutex_);
      out = do_predict(m_t, t, cond);
    } else {
      out = do_predict(m_t, t, cond);
    }
    require(out.rows() == m_t.rows() && out.cols() == m_t.cols(), ErrorCode::ShapeMismatch,
            "denoiser changed the sequence shape");
    require(out.allFinite(), ErrorCode::NonFinite, "denoiser produced non-finite values");
    return out;
  }

 protected:
  virtual Eigen::MatrixXd do_predict(const Eigen::MatrixXd& m_t, int t, const ConditionTag& cond) const = 0;

 private:
  bool exclusive_;
  mutable std::mutex mutex_;
};

/// Exact posterior mean E[M_0 | M_t] for data drawn independently per entry
/// from N(mean, var). mean and var hold one value per column and broadcast
/// over rows. The condition is ignored.
class GaussianOracleDenoiser final : public Denoiser {
 public:
  GaussianOracleDenoiser(Eigen::VectorXd mean, Eigen::VectorXd var, NoiseSchedule sched)
      : mean_(std::move(mean)), var_(std::move(var)), sched_(std::move(sched)) {
    require(mean_.size() == var_.size() && mean_.size() > 0, ErrorCode::ShapeMismatch,
            "oracle mean and variance lengths differ");
    require(mean_.allFinite() && var_.allFinite(), ErrorCode::NonFinite, "oracle parameters must be finite");
    require((var_.array() > 0.0).all(), ErrorCode::InvalidArgument, "oracle variance must be positive");
  }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& var() const { return var_; }

  static Eigen::MatrixXd posterior_mean(const Eigen::MatrixXd& m_t, double alpha_bar, const Eigen::VectorXd& mean,
                                        const Eigen::VectorXd& var) {
    require(m_t.cols() == mean.size(), ErrorCode::ShapeMismatch, "oracle dimension mismatch");
    const double s = std::sqrt(alpha_bar);
    Eigen::MatrixXd out(m_t.rows(), m_t.cols());
    for (Eigen::Index d = 0; d < m_t.cols(); ++d) {
      const double denom = alpha_bar * var(d) + (1.0 - alpha_bar);
      out.col(d) = (s * var(d) * m_t.col(d).array() + (1.0 - alpha_bar) * mean(d)) / denom;
    }
    return out;
  }

 protected:
  Eigen::MatrixXd do_predict(const Eigen::MatrixXd& m_t, int t, const ConditionTag&) const override {
    return posterior_mean(m_t, sched_.alpha_bar(t), mean_, var_);
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
  NoiseSchedule sched_;
};

/// Returns a stored clean sequence per condition tag regardless of M_t.
/// The unconditional prediction is all zeros, the mean of normalized data.
class CannedDenoiser final : public Denoiser {
 public:
  void add(const std::string& tag, Eigen::MatrixXd clean) {
    require(clean.allFinite(), ErrorCode::NonFinite, "canned sequence has non-finite values");
    canned_[tag] = std::move(clean);
  }
  bool contains(const std::string& tag) const { return canned_.count(tag) != 0; }

 protected:
  Eigen::MatrixXd do_predict(const Eigen::MatrixXd& m_t, int, const ConditionTag& cond) const override {
    if (!cond) return Eigen::MatrixXd::Zero(m_t.rows(), m_t.cols());
    const auto it = canned_.find(*cond);
    require(it != canned_.end(), ErrorCode::UnknownPrompt, "no canned sequence for \"" + *cond + "\"");
    require(it->second.rows() == m_t.rows() && it->second.cols() == m_t.cols(), ErrorCode::ShapeMismatch,
            "canned sequence for \"" + *cond + "\" has a different shape");
    return it->second;
  }

 private:
  std::map<std::string, Eigen::MatrixXd> canned_;
};

}  // namespace echo::diffusion
