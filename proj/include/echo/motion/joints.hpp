#pragma once

// Canonical joint ordering of the 29-DoF Unitree G1 (EDU, hands excluded).
//
//   idx  joint                      idx  joint
//    0   left_hip_pitch             15   left_shoulder_pitch
//    1   left_hip_roll              16   left_shoulder_roll
//    2   left_hip_yaw               17   left_shoulder_yaw
//    3   left_knee                  18   left_elbow_pitch
//    4   left_ankle_pitch           19   left_elbow_roll
//    5   left_ankle_roll            20   left_wrist_pitch
//    6   right_hip_pitch            21   left_wrist_yaw
//    7   right_hip_roll             22   right_shoulder_pitch
//    8   right_hip_yaw              23   right_shoulder_roll
//    9   right_knee                 24   right_shoulder_yaw
//   10   right_ankle_pitch          25   right_elbow_pitch
//   11   right_ankle_roll           26   right_elbow_roll
//   12   waist_yaw                  27   right_wrist_pitch
//   13   waist_roll                 28   right_wrist_yaw
//   14   waist_pitch
//
// Group sizes: hip 6, knee 2, ankle 4, waist 3, shoulder 6, elbow 4, wrist 4.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace echo {

inline constexpr std::size_t kNumJoints = 29;

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "left_hip_pitch",       "left_hip_roll",       "left_hip_yaw",
    "left_knee",            "left_ankle_pitch",    "left_ankle_roll",
    "right_hip_pitch",      "right_hip_roll",      "right_hip_yaw",
    "right_knee",           "right_ankle_pitch",   "right_ankle_roll",
    "waist_yaw",            "waist_roll",          "waist_pitch",
    "left_shoulder_pitch",  "left_shoulder_roll",  "left_shoulder_yaw",
    "left_elbow_pitch",     "left_elbow_roll",     "left_wrist_pitch",
    "left_wrist_yaw",       "right_shoulder_pitch", "right_shoulder_roll",
    "right_shoulder_yaw",   "right_elbow_pitch",   "right_elbow_roll",
    "right_wrist_pitch",    "right_wrist_yaw",
};

struct JointRange {
  double lower = 0.0;
  double upper = 0.0;

  constexpr double center() const { return 0.5 * (lower + upper); }
  constexpr double half_range() const { return 0.5 * (upper - lower); }
};

// Position limits (rad) from the G1 29-DoF URDF; mirrored in data/g1.limits.
inline constexpr std::array<JointRange, kNumJoints> kG1JointLimits = {{
    {-2.5307, 2.8798},   {-0.5236, 2.9671},   {-2.7576, 2.7576},
    {-0.087267, 2.8798}, {-0.87267, 0.5236},  {-0.2618, 0.2618},
    {-2.5307, 2.8798},   {-2.9671, 0.5236},   {-2.7576, 2.7576},
    {-0.087267, 2.8798}, {-0.87267, 0.5236},  {-0.2618, 0.2618},
    {-2.618, 2.618},     {-0.52, 0.52},       {-0.52, 0.52},
    {-3.0892, 2.6704},   {-1.5882, 2.2515},   {-2.618, 2.618},
    {-1.0472, 2.0944},   {-1.972222, 1.972222}, {-1.614430, 1.614430},
    {-1.614430, 1.614430},
    {-3.0892, 2.6704},   {-2.2515, 1.5882},   {-2.618, 2.618},
    {-1.0472, 2.0944},   {-1.972222, 1.972222}, {-1.614430, 1.614430},
    {-1.614430, 1.614430},
}};

constexpr std::optional<std::size_t> joint_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    if (kJointNames[i] == name) return i;
  }
  return std::nullopt;
}

}  // namespace echo
