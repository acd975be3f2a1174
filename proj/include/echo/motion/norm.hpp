#pragma once

#include <array>
#include <cmath>
#include <span>

#include "echo/error.hpp"
#include "echo/motion/clip.hpp"

namespace echo {

inline constexpr double kStdFloor = 1e-6;

/// Per-dimension z-score statistics.
struct NormStats {
  std::array<double, kFrameDim> mean{};
  std::array<double, kFrameDim> std{};

  static NormStats identity() {
    NormStats s;
    s.std.fill(1.0);
    return s;
  }

  bool operator==(const NormStats&) const = default;
};

inline NormStats fit_norm_stats(std::span<const MotionClip> clips) {
  std::size_t count = 0;
  std::array<double, kFrameDim> sum{};
  for (const auto& clip : clips) {
    for (const auto& f : clip.frames) {
      require(f.is_finite(), ErrorCode::NonFinite, "fit_norm_stats: non-finite frame");
      for (std::size_t d = 0; d < kFrameDim; ++d) sum[d] += f.values[d];
      ++count;
    }
  }
  require(count > 0, ErrorCode::EmptyInput, "fit_norm_stats: no frames");

  NormStats stats;
  const double n = static_cast<double>(count);
  for (std::size_t d = 0; d < kFrameDim; ++d) stats.mean[d] = sum[d] / n;

  // Population variance, two-pass.
  std::array<double, kFrameDim> sq{};
  for (const auto& clip : clips) {
    for (const auto& f : clip.frames) {
      for (std::size_t d = 0; d < kFrameDim; ++d) {
        const double dev = f.values[d] - stats.mean[d];
        sq[d] += dev * dev;
      }
    }
  }
  for (std::size_t d = 0; d < kFrameDim; ++d) {
    stats.std[d] = std::max(std::sqrt(sq[d] / n), kStdFloor);
  }
  return stats;
}

inline MotionClip normalize(MotionClip clip, const NormStats& stats) {
  for (auto& f : clip.frames) {
    for (std::size_t d = 0; d < kFrameDim; ++d) {
      f.values[d] = (f.values[d] - stats.mean[d]) / stats.std[d];
    }
  }
  return clip;
}

inline MotionClip denormalize(MotionClip clip, const NormStats& stats) {
  for (auto& f : clip.frames) {
    for (std::size_t d = 0; d < kFrameDim; ++d) {
      f.values[d] = f.values[d] * stats.std[d] + stats.mean[d];
    }
  }
  return clip;
}

}  // namespace echo
