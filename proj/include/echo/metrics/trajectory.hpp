#pragma once

// Root Trajectory Consistency.
//
// Reconstruction of the metric from its published parameters (K, sigmas,
// weights); the kernel forms are not published. Both root XY paths are
// integrated from the origin, resampled to K waypoints equally spaced in arc
// length and translated so waypoint 0 is the origin (no rotation alignment).
//
//   D        = mean_i |w_gen_i - w_gt_i| / max(L_gt, eps)
//   S_shape  = exp(-D^2 / (2 shape_sigma^2))
//   S_extent = exp(-ln(max(L_gen, eps) / max(L_gt, eps))^2 / (2 extent_sigma^2))
//   RTC      = S_shape^w_shape * S_extent^w_extent

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"
#include "echo/motion/clip.hpp"

namespace echo {

struct RtcConfig {
  int num_waypoints = 50;
  double shape_sigma = 0.35;
  double extent_sigma = 0.8;
  double w_shape = 0.7;
  double w_extent = 0.3;
  double epsilon = 1e-6;  // m

  void validate() const {
    require(num_waypoints >= 2, ErrorCode::InvalidArgument, "RTC needs K >= 2");
    require(shape_sigma > 0 && extent_sigma > 0 && epsilon > 0, ErrorCode::InvalidArgument,
            "RTC sigmas and epsilon must be positive");
    require(w_shape >= 0 && w_extent >= 0 && std::abs(w_shape + w_extent - 1.0) < 1e-9,
            ErrorCode::InvalidArgument, "RTC weights must sum to 1");
  }
};

struct RtcScore {
  double rtc = 1.0;
  double s_shape = 1.0;
  double s_extent = 1.0;
  double shape_error = 0.0;
  double length_gen = 0.0;
  double length_gt = 0.0;
};

using Path2d = std::vector<Eigen::Vector2d>;

inline double arc_length(std::span<const Eigen::Vector2d> path) {
  double len = 0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  return len;
}

/// K points equally spaced in arc length along the polyline. A path with
/// zero length collapses to K copies of its first point.
inline Path2d resample_by_arc_length(std::span<const Eigen::Vector2d> path, int k) {
  require(!path.empty(), ErrorCode::EmptyInput, "cannot resample an empty path");
  require(k >= 2, ErrorCode::InvalidArgument, "need at least 2 waypoints");
  const double total = arc_length(path);
  Path2d out;
  out.reserve(static_cast<std::size_t>(k));
  if (total <= 0.0) {
    out.assign(static_cast<std::size_t>(k), path.front());
    return out;
  }

  std::vector<double> cumulative(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + (path[i] - path[i - 1]).norm();
  }
  for (int i = 0; i + 1 < k; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(k - 1);
    // First vertex strictly beyond the target; its predecessor starts a
    // segment of positive length containing the target.
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
    if (hi >= path.size()) {
      out.push_back(path.back());
      continue;
    }
    const std::size_t lo = hi - 1;
    const double u = (target - cumulative[lo]) / (cumulative[hi] - cumulative[lo]);
    out.push_back(path[lo] + u * (path[hi] - path[lo]));
  }
  out.push_back(path.back());
  return out;
}

inline RtcScore root_trajectory_consistency(std::span<const Eigen::Vector2d> gen,
                                            std::span<const Eigen::Vector2d> gt,
                                            const RtcConfig& cfg = {}) {
  cfg.validate();
  require(!gen.empty() && !gt.empty(), ErrorCode::EmptyInput, "RTC needs non-empty paths");
  for (auto p : {gen, gt}) {
    for (const auto& v : p) require(v.allFinite(), ErrorCode::NonFinite, "RTC: non-finite path");
  }

  RtcScore s;
  s.length_gen = arc_length(gen);
  s.length_gt = arc_length(gt);

  auto wg = resample_by_arc_length(gen, cfg.num_waypoints);
  auto wt = resample_by_arc_length(gt, cfg.num_waypoints);
  const Eigen::Vector2d g0 = wg.front();
  const Eigen::Vector2d t0 = wt.front();
  double dist = 0;
  for (std::size_t i = 0; i < wg.size(); ++i) dist += ((wg[i] - g0) - (wt[i] - t0)).norm();
  dist /= static_cast<double>(wg.size());

  s.shape_error = dist / std::max(s.length_gt, cfg.epsilon);
  s.s_shape = std::exp(-s.shape_error * s.shape_error / (2.0 * cfg.shape_sigma * cfg.shape_sigma));
  const double log_ratio =
      std::log(std::max(s.length_gen, cfg.epsilon) / std::max(s.length_gt, cfg.epsilon));
  s.s_extent = std::exp(-log_ratio * log_ratio / (2.0 * cfg.extent_sigma * cfg.extent_sigma));
  s.rtc = std::pow(s.s_shape, cfg.w_shape) * std::pow(s.s_extent, cfg.w_extent);
  return s;
}

inline RtcScore root_trajectory_consistency(const MotionClip& gen, const MotionClip& gt,
                                            const RtcConfig& cfg = {}) {
  validate_clip(gen);
  validate_clip(gt);
  const auto pg = root_path_xy(gen);
  const auto pt = root_path_xy(gt);
  return root_trajectory_consistency(std::span<const Eigen::Vector2d>(pg),
                                     std::span<const Eigen::Vector2d>(pt), cfg);
}

}  // namespace echo
