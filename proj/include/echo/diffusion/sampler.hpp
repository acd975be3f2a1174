#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

#include "echo/diffusion/denoiser.hpp"
#include "echo/diffusion/schedule.hpp"
#include "echo/diffusion/steps.hpp"
#include "echo/error.hpp"
#include "echo/motion/clip.hpp"
#include "echo/motion/norm.hpp"

namespace echo::diffusion {

enum class Scheduler { Ddpm, Ddim, DpmSolver };

inline Scheduler parse_scheduler(std::string_view name) {
  if (name == "ddpm") return Scheduler::Ddpm;
  if (name == "ddim") return Scheduler::Ddim;
  if (name == "dpm-solver" || name == "dpmsolver") return Scheduler::DpmSolver;
  fail(ErrorCode::InvalidArgument, "unknown scheduler " + std::string(name));
}

struct SamplerConfig {
  Scheduler scheduler = Scheduler::Ddim;
  int num_steps = 10;
  double cfg_scale = 2.5;
  double eta = 0.0;
  std::uint64_t seed = 0;
  double p_uncond = 0.1;  // training-side condition dropout

  void validate(const NoiseSchedule& sched) const {
    require(scheduler != Scheduler::DpmSolver, ErrorCode::UnsupportedScheduler,
            "DPM-Solver is not implemented; use ddim or ddpm");
    require(num_steps >= 1 && num_steps <= sched.steps(), ErrorCode::InvalidArgument,
            "num_steps must lie in [1, T]");
    require(cfg_scale >= 0.0 && std::isfinite(cfg_scale), ErrorCode::InvalidArgument, "cfg scale must be >= 0");
    require(eta >= 0.0, ErrorCode::InvalidArgument, "eta must be >= 0");
    require(p_uncond >= 0.0 && p_uncond <= 1.0, ErrorCode::InvalidArgument, "p_uncond must lie in [0, 1]");
  }
};

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = n(rng);
  }
  return m;
}

/// Runs the reverse chain in normalized space and returns the final sample.
/// Each step queries the denoiser with and without the condition and mixes
/// the two predictions before the scheduler update.
inline Eigen::MatrixXd sample_matrix(const Denoiser& denoiser, const ConditionTag& cond, Eigen::Index rows,
                                     Eigen::Index cols, const SamplerConfig& cfg, const NoiseSchedule& sched) {
  cfg.validate(sched);
  require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "sample shape must be non-empty");
  std::mt19937_64 rng(cfg.seed);
  Eigen::MatrixXd x = gaussian_matrix(rows, cols, rng);
  const auto ts = timestep_sequence(sched.steps(), cfg.num_steps);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const int t = ts[i];
    const int t_prev = ts[i + 1];
    const Eigen::MatrixXd uncond = denoiser.predict(x, t, std::nullopt);
    const Eigen::MatrixXd c = denoiser.predict(x, t, cond);
    const Eigen::MatrixXd x0 = cfg_combine(c, uncond, cfg.cfg_scale);
    const Eigen::MatrixXd noise = gaussian_matrix(rows, cols, rng);
    x = cfg.scheduler == Scheduler::Ddim ? ddim_step(x, t, t_prev, x0, cfg.eta, sched, noise)
                                         : ddpm_step(x, t, x0, sched, noise, t_prev);
  }
  return x;
}

struct SampleResult {
  MotionClip clip;
  double seconds = 0.0;
};

inline SampleResult sample(const Denoiser& denoiser, const ConditionTag& cond, std::size_t frames,
                           const SamplerConfig& cfg, const NoiseSchedule& sched, const NormStats& norm,
                           double fps = kDefaultFps) {
  require(frames >= 1, ErrorCode::InvalidArgument, "need at least one frame");
  const auto start = std::chrono::steady_clock::now();
  const auto m = sample_matrix(denoiser, cond, static_cast<Eigen::Index>(frames),
                               static_cast<Eigen::Index>(kFrameDim), cfg, sched);
  SampleResult r;
  r.clip = denormalize(matrix_to_clip(m, fps), norm);
  if (cond) r.clip.prompt = *cond;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace echo::diffusion
