#pragma once

#include <array>
#include <vector>

#include "echo/error.hpp"
#include "echo/motion/clip.hpp"

namespace echo {

using JointVector = std::array<double, kNumJoints>;

/// Per-frame joint derivatives. order 1 -> rad/s, order 2 -> rad/s^2.
/// Central differences in the interior, one-sided at the endpoints.
inline std::vector<JointVector> finite_diff(const MotionClip& clip, int order) {
  require(order == 1 || order == 2, ErrorCode::InvalidArgument,
          "finite_diff: order must be 1 or 2");
  require(clip.fps > 0.0, ErrorCode::InvalidArgument, "finite_diff: fps must be positive");
  const std::size_t n = clip.size();
  require(n >= static_cast<std::size_t>(order + 1), ErrorCode::ClipTooShort,
          "finite_diff: clip too short for requested order");

  const double fps = clip.fps;
  auto q = [&](std::size_t t, std::size_t j) { return clip.frames[t].values[j]; };
  std::vector<JointVector> out(n);

  if (order == 1) {
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        if (t == 0) {
          out[t][j] = (q(1, j) - q(0, j)) * fps;
        } else if (t == n - 1) {
          out[t][j] = (q(t, j) - q(t - 1, j)) * fps;
        } else {
          out[t][j] = (q(t + 1, j) - q(t - 1, j)) * fps / 2.0;
        }
      }
    }
    return out;
  }

  const double fps2 = fps * fps;
  for (std::size_t t = 0; t < n; ++t) {
    // Endpoints reuse the nearest full 3-point stencil.
    const std::size_t c = t == 0 ? 1 : (t == n - 1 ? n - 2 : t);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      out[t][j] = (q(c + 1, j) - 2.0 * q(c, j) + q(c - 1, j)) * fps2;
    }
  }
  return out;
}

}  // namespace echo
