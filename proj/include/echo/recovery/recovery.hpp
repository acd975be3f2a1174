#pragma once

// Fall detection from body-frame gravity and two-stage retrieval of a
// recovery clip: keep entries whose start gravity lies within a cone of the
// query (or the single nearest one if none do), then rank by joint distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "echo/error.hpp"
#include "echo/motion/clip.hpp"
#include "echo/motion/io.hpp"
#include "echo/motion/joints.hpp"
#include "echo/motion/rotation.hpp"
#include "echo/text.hpp"

namespace echo::recovery {

using JointVector = std::array<double, kNumJoints>;

inline const Eigen::Vector3d kUprightGravity{0.0, 0.0, -1.0};
inline constexpr double kUnitTolerance = 1e-3;

/// Angle in degrees between two non-zero vectors.
inline double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

inline void require_unit(const Eigen::Vector3d& g, double tol, const char* what) {
  require(g.allFinite(), ErrorCode::NonFinite, std::string(what) + " is not finite");
  require(std::abs(g.norm() - 1.0) <= tol, ErrorCode::NonUnitVector, std::string(what) + " is not a unit vector");
}

/// World gravity expressed in the pelvis frame whose orientation is `root_rot`.
inline Eigen::Vector3d gravity_in_body(const Eigen::Matrix3d& root_rot) {
  return root_rot.transpose() * Eigen::Vector3d(0.0, 0.0, -1.0);
}

struct RecoveryEntry {
  std::string clip_path;
  Eigen::Vector3d initial_gravity = kUprightGravity;
  JointVector initial_joints{};
  std::optional<MotionClip> clip;
};

inline RecoveryEntry entry_from_clip(const MotionClip& clip, std::string path) {
  require(!clip.empty(), ErrorCode::EmptyInput, "recovery clip is empty");
  const auto& f = clip.frames.front();
  RecoveryEntry e;
  e.clip_path = std::move(path);
  e.initial_gravity = gravity_in_body(rot6d_to_matrix(f.root_rot6d()));
  std::copy(f.joint_pos().begin(), f.joint_pos().end(), e.initial_joints.begin());
  e.clip = clip;
  return e;
}

struct RecoveryLibrary {
  std::vector<RecoveryEntry> entries;
  double gravity_threshold_deg = 30.0;
  double fall_threshold_deg = 60.0;
  int fall_persist_frames = 10;

  void validate() const {
    require(gravity_threshold_deg > 0 && gravity_threshold_deg < 180 && fall_threshold_deg > 0 &&
                fall_threshold_deg < 180,
            ErrorCode::InvalidArgument, "thresholds must lie in (0, 180) degrees");
    require(fall_persist_frames >= 1, ErrorCode::InvalidArgument, "persistence must be >= 1 frame");
    for (const auto& e : entries) require_unit(e.initial_gravity, 1e-6, "entry gravity");
  }
};

struct RecoveryMatch {
  std::size_t index = 0;
  double joint_distance = 0.0;
  double gravity_angle_deg = 0.0;
  bool fallback = false;             // no entry passed the gravity filter
  std::vector<std::size_t> ranked;   // survivors, best first
};

inline double joint_distance(const JointVector& a, const JointVector& b) {
  double sq = 0;
  for (std::size_t j = 0; j < kNumJoints; ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(sq);
}

inline RecoveryMatch retrieve_recovery(const Eigen::Vector3d& query_gravity, const JointVector& query_joints,
                                       const RecoveryLibrary& lib) {
  require(!lib.entries.empty(), ErrorCode::EmptyLibrary, "recovery library is empty");
  lib.validate();
  require_unit(query_gravity, kUnitTolerance, "query gravity");
  for (double q : query_joints) require(std::isfinite(q), ErrorCode::NonFinite, "query joints not finite");

  std::vector<double> angles(lib.entries.size());
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < lib.entries.size(); ++i) {
    angles[i] = angle_deg(query_gravity, lib.entries[i].initial_gravity);
    if (angles[i] <= lib.gravity_threshold_deg) survivors.push_back(i);
  }

  RecoveryMatch m;
  if (survivors.empty()) {
    m.fallback = true;
    survivors.push_back(static_cast<std::size_t>(std::min_element(angles.begin(), angles.end()) - angles.begin()));
  }
  std::vector<double> dist(lib.entries.size(), 0.0);
  for (auto i : survivors) dist[i] = joint_distance(query_joints, lib.entries[i].initial_joints);
  std::stable_sort(survivors.begin(), survivors.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  m.index = survivors.front();
  m.joint_distance = dist[m.index];
  m.gravity_angle_deg = angles[m.index];
  m.ranked = std::move(survivors);
  return m;
}

/// Debounced tilt detector for one IMU stream. The flag changes only after
/// the opposite condition has held for `persist` consecutive frames.
class FallDetector {
 public:
  explicit FallDetector(double threshold_deg = 60.0, int persist = 10)
      : threshold_deg_(threshold_deg), persist_(persist) {
    require(threshold_deg > 0 && threshold_deg < 180, ErrorCode::InvalidArgument,
            "fall threshold must lie in (0, 180) degrees");
    require(persist >= 1, ErrorCode::InvalidArgument, "persistence must be >= 1 frame");
  }

  explicit FallDetector(const RecoveryLibrary& lib) : FallDetector(lib.fall_threshold_deg, lib.fall_persist_frames) {}

  bool update(const Eigen::Vector3d& gravity_in_body) {
    require_unit(gravity_in_body, kUnitTolerance, "IMU gravity");
    const bool tilted = angle_deg(gravity_in_body, kUprightGravity) > threshold_deg_;
    if (tilted == fallen_) {
      streak_ = 0;
    } else if (++streak_ >= persist_) {
      fallen_ = tilted;
      streak_ = 0;
    }
    return fallen_;
  }

  bool fallen() const { return fallen_; }
  void reset() {
    fallen_ = false;
    streak_ = 0;
  }

 private:
  double threshold_deg_;
  int persist_;
  bool fallen_ = false;
  int streak_ = 0;
};

inline std::vector<bool> detect_fall(std::span<const Eigen::Vector3d> gravity, const RecoveryLibrary& lib = {}) {
  FallDetector d(lib);
  std::vector<bool> flags;
  flags.reserve(gravity.size());
  for (const auto& g : gravity) flags.push_back(d.update(g));
  return flags;
}

// Index file: one `entry: clip_path, gx, gy, gz, j0, ..., j28` per line.
// Relative clip paths resolve against the index file's directory.

inline std::string format_index_line(const RecoveryEntry& e) {
  std::string line = "entry: " + e.clip_path;
  for (int k = 0; k < 3; ++k) line += ", " + text::format_number(e.initial_gravity(k));
  for (double q : e.initial_joints) line += ", " + text::format_number(q);
  return line;
}

inline RecoveryEntry parse_index_line(std::string_view line) {
  const auto body = text::trim(line);
  require(body.starts_with("entry:"), ErrorCode::Format, "index line must start with `entry:`");
  const auto fields = text::split(body.substr(6), ',');
  require(fields.size() == 4 + kNumJoints, ErrorCode::Format,
          "index line needs a path, 3 gravity values and 29 joints");
  RecoveryEntry e;
  e.clip_path = std::string(text::trim(fields[0]));
  require(!e.clip_path.empty(), ErrorCode::Format, "index line has an empty clip path");
  for (int k = 0; k < 3; ++k) e.initial_gravity(k) = text::parse_number<double>(fields[1 + k]);
  for (std::size_t j = 0; j < kNumJoints; ++j) e.initial_joints[j] = text::parse_number<double>(fields[4 + j]);
  require_unit(e.initial_gravity, 1e-6, "index gravity");
  return e;
}

inline RecoveryLibrary read_index(const std::string& path, bool load_clips = false) {
  RecoveryLibrary lib;
  const auto dir = std::filesystem::path(path).parent_path();
  for (const auto& line : text::read_lines(path)) {
    if (text::is_comment(line)) continue;
    auto e = parse_index_line(line);
    if (load_clips) {
      const auto p = std::filesystem::path(e.clip_path);
      e.clip = read_clip_file((p.is_absolute() ? p : dir / p).string()).clip;
    }
    lib.entries.push_back(std::move(e));
  }
  require(!lib.entries.empty(), ErrorCode::EmptyLibrary, "index " + path + " lists no entries");
  lib.validate();
  return lib;
}

inline void write_index(const std::string& path, const RecoveryLibrary& lib) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path);
  out << "# entry: clip_path, gx, gy, gz, 29 joint angles\n";
  for (const auto& e : lib.entries) out << format_index_line(e) << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "failed writing " + path);
}

/// Derives entries from the first frame of every .emc/.csv clip in `dir`,
/// sorted by file name, with paths relative to `dir`.
inline RecoveryLibrary build_index(const std::string& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), ErrorCode::Io, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    const auto ext = de.path().extension().string();
    if (de.is_regular_file() && (ext == ".emc" || ext == ".csv")) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  RecoveryLibrary lib;
  for (const auto& f : files) {
    auto e = entry_from_clip(read_clip_file(f.string()).clip, f.filename().string());
    lib.entries.push_back(std::move(e));
  }
  require(!lib.entries.empty(), ErrorCode::EmptyLibrary, "no clips found in " + dir);
  return lib;
}

}  // namespace echo::recovery
