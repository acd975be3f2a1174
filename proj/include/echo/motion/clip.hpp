#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"
#include "echo/motion/joints.hpp"
#include "echo/motion/rotation.hpp"

namespace echo {

inline constexpr std::size_t kFrameDim = 38;
inline constexpr double kDefaultFps = 50.0;

// Offsets into the 38D frame vector.
inline constexpr std::size_t kRootVelOffset = 29;
inline constexpr std::size_t kRootHeightOffset = 31;
inline constexpr std::size_t kRot6dOffset = 32;

/// One frame of the robot-native representation:
/// [29 joint angles | root vx, vy (m/frame) | root height | 6D root rotation].
struct MotionFrame {
  std::array<double, kFrameDim> values{};

  std::span<double, kNumJoints> joint_pos() {
    return std::span(values).first<kNumJoints>();
  }
  std::span<const double, kNumJoints> joint_pos() const {
    return std::span(values).first<kNumJoints>();
  }
  std::span<double, 2> root_vel_xy() {
    return std::span(values).subspan<kRootVelOffset, 2>();
  }
  std::span<const double, 2> root_vel_xy() const {
    return std::span(values).subspan<kRootVelOffset, 2>();
  }
  double& root_height() { return values[kRootHeightOffset]; }
  double root_height() const { return values[kRootHeightOffset]; }
  std::span<double, 6> root_rot6d() {
    return std::span(values).subspan<kRot6dOffset, 6>();
  }
  std::span<const double, 6> root_rot6d() const {
    return std::span(values).subspan<kRot6dOffset, 6>();
  }

  bool is_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
  }

  bool operator==(const MotionFrame&) const = default;
};

struct MotionClip {
  std::vector<MotionFrame> frames;
  double fps = kDefaultFps;
  std::optional<std::string> prompt;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }

  bool operator==(const MotionClip&) const = default;
};

inline void validate_clip(const MotionClip& clip) {
  require(clip.fps > 0.0 && std::isfinite(clip.fps), ErrorCode::InvalidArgument,
          "clip fps must be positive");
  require(!clip.empty(), ErrorCode::EmptyInput, "clip has no frames");
  for (const auto& f : clip.frames) {
    require(f.is_finite(), ErrorCode::NonFinite, "clip contains non-finite values");
  }
}

/// Decoded world-frame form of a clip.
struct AbsoluteTrajectory {
  struct Frame {
    Eigen::Vector3d root_pos = Eigen::Vector3d::Zero();
    Eigen::Matrix3d root_rot = Eigen::Matrix3d::Identity();
    std::array<double, kNumJoints> joint_pos{};
  };
  std::vector<Frame> frames;
  double fps = kDefaultFps;

  std::size_t size() const { return frames.size(); }
};

inline MotionClip encode_clip(const AbsoluteTrajectory& traj) {
  require(traj.size() >= 2, ErrorCode::ClipTooShort,
          "encode_clip: need at least 2 frames");
  require(traj.fps > 0.0, ErrorCode::InvalidArgument, "encode_clip: fps must be positive");

  MotionClip clip;
  clip.fps = traj.fps;
  clip.frames.resize(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& src = traj.frames[t];
    require(src.root_pos.allFinite() && src.root_rot.allFinite(), ErrorCode::NonFinite,
            "encode_clip: non-finite root state");
    auto& dst = clip.frames[t];
    std::copy(src.joint_pos.begin(), src.joint_pos.end(), dst.joint_pos().begin());
    if (t > 0) {
      const auto& prev = traj.frames[t - 1];
      dst.root_vel_xy()[0] = src.root_pos.x() - prev.root_pos.x();
      dst.root_vel_xy()[1] = src.root_pos.y() - prev.root_pos.y();
    }
    dst.root_height() = src.root_pos.z();
    const Rot6d r6 = rot_matrix_to_6d(src.root_rot);
    std::copy(r6.begin(), r6.end(), dst.root_rot6d().begin());
    require(dst.is_finite(), ErrorCode::NonFinite, "encode_clip: non-finite joints");
  }
  return clip;
}

inline AbsoluteTrajectory decode_clip(const MotionClip& clip,
                                      const Eigen::Vector2d& origin_xy = Eigen::Vector2d::Zero()) {
  validate_clip(clip);
  AbsoluteTrajectory traj;
  traj.fps = clip.fps;
  traj.frames.resize(clip.size());
  Eigen::Vector2d xy = origin_xy;
  for (std::size_t t = 0; t < clip.size(); ++t) {
    const auto& src = clip.frames[t];
    if (t > 0) {
      xy.x() += src.root_vel_xy()[0];
      xy.y() += src.root_vel_xy()[1];
    }
    auto& dst = traj.frames[t];
    dst.root_pos = {xy.x(), xy.y(), src.root_height()};
    dst.root_rot = rot6d_to_matrix(src.root_rot6d());
    std::copy(src.joint_pos().begin(), src.joint_pos().end(), dst.joint_pos.begin());
  }
  return traj;
}

/// Root XY path integrated from velocities, starting at `origin_xy`.
inline std::vector<Eigen::Vector2d> root_path_xy(const MotionClip& clip,
                                                 const Eigen::Vector2d& origin_xy = Eigen::Vector2d::Zero()) {
  std::vector<Eigen::Vector2d> path;
  path.reserve(clip.size());
  Eigen::Vector2d xy = origin_xy;
  for (std::size_t t = 0; t < clip.size(); ++t) {
    if (t > 0) {
      xy.x() += clip.frames[t].root_vel_xy()[0];
      xy.y() += clip.frames[t].root_vel_xy()[1];
    }
    path.push_back(xy);
  }
  return path;
}

/// Frames-by-38 matrix view used by the diffusion stack.
inline Eigen::MatrixXd clip_to_matrix(const MotionClip& clip) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(clip.size()), static_cast<Eigen::Index>(kFrameDim));
  for (std::size_t t = 0; t < clip.size(); ++t) {
    for (std::size_t d = 0; d < kFrameDim; ++d) {
      m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) = clip.frames[t].values[d];
    }
  }
  return m;
}

inline MotionClip matrix_to_clip(const Eigen::MatrixXd& m, double fps = kDefaultFps) {
  require(m.cols() == static_cast<Eigen::Index>(kFrameDim), ErrorCode::ShapeMismatch,
          "matrix_to_clip: expected 38 columns");
  MotionClip clip;
  clip.fps = fps;
  clip.frames.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
      clip.frames[static_cast<std::size_t>(t)].values[static_cast<std::size_t>(d)] = m(t, d);
    }
  }
  return clip;
}

}  // namespace echo
