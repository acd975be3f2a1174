#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"
#include "echo/text.hpp"

namespace echo {

/// Per-frame 3D keypoints (metres), one column per keypoint. The root is the
/// column at `root_index`.
using KeypointFrames = std::vector<Eigen::Matrix3Xd>;

struct MpjpeResult {
  double global_mm = 0.0;  // E_g-mpjpe, world frame
  double local_mm = 0.0;   // E_mpjpe, root-relative
};

inline MpjpeResult mpjpe(const KeypointFrames& actual, const KeypointFrames& reference,
                         Eigen::Index root_index = 0) {
  require(!actual.empty(), ErrorCode::EmptyInput, "mpjpe: no frames");
  require(actual.size() == reference.size(), ErrorCode::ShapeMismatch, "mpjpe: frame counts differ");
  double global = 0, local = 0;
  Eigen::Index count = 0;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    const auto& a = actual[t];
    const auto& r = reference[t];
    require(a.cols() == r.cols() && a.cols() > root_index && root_index >= 0, ErrorCode::ShapeMismatch,
            "mpjpe: keypoint counts differ or root index out of range");
    require(a.allFinite() && r.allFinite(), ErrorCode::NonFinite, "mpjpe: non-finite keypoints");
    global += (a - r).colwise().norm().sum();
    const Eigen::Matrix3Xd a_local = a.colwise() - a.col(root_index);
    const Eigen::Matrix3Xd r_local = r.colwise() - r.col(root_index);
    local += (a_local - r_local).colwise().norm().sum();
    count += a.cols();
  }
  return {1000.0 * global / static_cast<double>(count), 1000.0 * local / static_cast<double>(count)};
}

/// CSV keypoints: one frame per line, x0,y0,z0,x1,y1,z1,...; '#' comments.
inline KeypointFrames parse_keypoints_csv(std::span<const std::string> lines) {
  KeypointFrames frames;
  for (const auto& line : lines) {
    if (text::is_comment(line)) continue;
    const auto tok = text::tokens(text::strip_comment(line));
    require(!tok.empty() && tok.size() % 3 == 0, ErrorCode::Format,
            "keypoint row must hold a multiple of 3 values");
    Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(tok.size() / 3));
    for (std::size_t i = 0; i < tok.size(); ++i) {
      m(static_cast<Eigen::Index>(i % 3), static_cast<Eigen::Index>(i / 3)) =
          text::parse_number<double>(tok[i]);
    }
    frames.push_back(std::move(m));
  }
  return frames;
}

inline KeypointFrames read_keypoints(const std::string& path) {
  const auto lines = text::read_lines(path);
  return parse_keypoints_csv(lines);
}

}  // namespace echo
