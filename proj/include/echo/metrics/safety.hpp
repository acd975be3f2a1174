#pragma once

// Motion Safety Score.
//
// For each constraint k in {pos, vel, acc} a per-frame, per-joint violation is
// normalized by its limit: max(0, |x| - limit) / limit. The violations are
// aggregated over frames x joints into v_k, mapped to S_k = exp(-sharpness*v_k)
// and combined as MSS = S_pos^w_pos * S_vel^w_vel * S_acc^w_acc.
//
// The position limit of a joint is the soft fraction of its half-range,
// measured from the range center.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <span>
#include <string>

#include "echo/error.hpp"
#include "echo/motion/clip.hpp"
#include "echo/motion/finite_diff.hpp"
#include "echo/motion/joints.hpp"
#include "echo/text.hpp"

namespace echo {

enum class ViolationAggregation { Mean, Max };

struct SafetyLimits {
  std::array<std::optional<JointRange>, kNumJoints> position{};
  double soft_fraction = 0.90;
  double vel_limit = 10.0;    // rad/s
  double acc_limit = 100.0;   // rad/s^2
  double sharpness = 100.0;
  double w_pos = 0.5;
  double w_vel = 0.3;
  double w_acc = 0.2;
  ViolationAggregation aggregation = ViolationAggregation::Mean;

  static SafetyLimits g1() {
    SafetyLimits limits;
    for (std::size_t j = 0; j < kNumJoints; ++j) limits.position[j] = kG1JointLimits[j];
    return limits;
  }

  void validate() const {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      require(position[j].has_value(), ErrorCode::MissingJointLimits,
              "no position limits for joint " + std::string(kJointNames[j]));
      require(position[j]->upper > position[j]->lower, ErrorCode::InvalidArgument,
              "empty position range for joint " + std::string(kJointNames[j]));
    }
    require(soft_fraction > 0.0 && soft_fraction <= 1.0, ErrorCode::InvalidArgument,
            "soft_fraction must lie in (0, 1]");
    require(vel_limit > 0.0 && acc_limit > 0.0 && sharpness > 0.0, ErrorCode::InvalidArgument,
            "limits and sharpness must be positive");
    require(w_pos >= 0 && w_vel >= 0 && w_acc >= 0 && std::abs(w_pos + w_vel + w_acc - 1.0) < 1e-9,
            ErrorCode::InvalidArgument, "MSS exponents must be non-negative and sum to 1");
  }
};

/// Parses a limits table: one joint per line, `name lower upper`; '#' starts
/// a comment. Joints may appear in any order but each must appear once.
inline SafetyLimits parse_joint_limits(std::span<const std::string> lines) {
  SafetyLimits limits;
  for (const auto& line : lines) {
    if (text::is_comment(line)) continue;
    const auto tok = text::tokens(text::strip_comment(line));
    require(tok.size() == 3, ErrorCode::Format, "limits line needs `name lower upper`: " + line);
    const auto idx = joint_index(tok[0]);
    require(idx.has_value(), ErrorCode::Format, "unknown joint name " + std::string(tok[0]));
    require(!limits.position[*idx].has_value(), ErrorCode::Format,
            "duplicate joint " + std::string(tok[0]));
    limits.position[*idx] = JointRange{text::parse_number<double>(tok[1]),
                                       text::parse_number<double>(tok[2])};
  }
  limits.validate();
  return limits;
}

inline SafetyLimits load_joint_limits(const std::string& path) {
  const auto lines = text::read_lines(path);
  return parse_joint_limits(lines);
}

struct SafetyScore {
  double mss = 1.0;
  double s_pos = 1.0;
  double s_vel = 1.0;
  double s_acc = 1.0;
  double v_pos = 0.0;
  double v_vel = 0.0;
  double v_acc = 0.0;
};

/// Combines aggregated violations into sub-scores and the final score.
inline SafetyScore safety_score_from_violations(double v_pos, double v_vel, double v_acc,
                                                const SafetyLimits& limits) {
  require(v_pos >= 0 && v_vel >= 0 && v_acc >= 0, ErrorCode::InvalidArgument,
          "violations must be non-negative");
  SafetyScore s;
  s.v_pos = v_pos;
  s.v_vel = v_vel;
  s.v_acc = v_acc;
  s.s_pos = std::exp(-limits.sharpness * v_pos);
  s.s_vel = std::exp(-limits.sharpness * v_vel);
  s.s_acc = std::exp(-limits.sharpness * v_acc);
  s.mss = std::pow(s.s_pos, limits.w_pos) * std::pow(s.s_vel, limits.w_vel) *
          std::pow(s.s_acc, limits.w_acc);
  return s;
}

struct FrameViolation {
  double pos = 0.0;
  double vel = 0.0;
  double acc = 0.0;
};

/// Violations of one frame summed (Mean) or maximized (Max) over joints.
inline FrameViolation frame_violation(std::span<const double, kNumJoints> q, const JointVector& vel,
                                      const JointVector& acc, const SafetyLimits& limits) {
  auto excess = [](double magnitude, double limit) { return std::max(0.0, magnitude - limit) / limit; };
  const bool use_max = limits.aggregation == ViolationAggregation::Max;
  auto fold = [use_max](double acc_value, double v) { return use_max ? std::max(acc_value, v) : acc_value + v; };
  FrameViolation f;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const auto& range = *limits.position[j];
    const double soft = limits.soft_fraction * range.half_range();
    f.pos = fold(f.pos, excess(std::abs(q[j] - range.center()), soft));
    f.vel = fold(f.vel, excess(std::abs(vel[j]), limits.vel_limit));
    f.acc = fold(f.acc, excess(std::abs(acc[j]), limits.acc_limit));
  }
  return f;
}

inline void accumulate(FrameViolation& total, const FrameViolation& f, ViolationAggregation agg) {
  if (agg == ViolationAggregation::Max) {
    total.pos = std::max(total.pos, f.pos);
    total.vel = std::max(total.vel, f.vel);
    total.acc = std::max(total.acc, f.acc);
  } else {
    total.pos += f.pos;
    total.vel += f.vel;
    total.acc += f.acc;
  }
}

inline SafetyScore score_from_total(const FrameViolation& total, std::size_t frames, const SafetyLimits& limits) {
  if (limits.aggregation == ViolationAggregation::Max) {
    return safety_score_from_violations(total.pos, total.vel, total.acc, limits);
  }
  const double n = static_cast<double>(frames * kNumJoints);
  return safety_score_from_violations(total.pos / n, total.vel / n, total.acc / n, limits);
}

inline SafetyScore motion_safety_score(const MotionClip& clip, const SafetyLimits& limits) {
  limits.validate();
  require(clip.size() >= 3, ErrorCode::ClipTooShort, "MSS needs at least 3 frames");
  validate_clip(clip);

  const auto vel = finite_diff(clip, 1);
  const auto acc = finite_diff(clip, 2);
  FrameViolation total;
  for (std::size_t t = 0; t < clip.size(); ++t) {
    accumulate(total, frame_violation(clip.frames[t].joint_pos(), vel[t], acc[t], limits), limits.aggregation);
  }
  return score_from_total(total, clip.size(), limits);
}

/// MSS over a clip that arrives in pieces. After each append the score
/// equals motion_safety_score of everything received so far; frames whose
/// difference stencils can no longer change are folded into running totals.
class OnlineSafety {
 public:
  explicit OnlineSafety(SafetyLimits limits, double fps = kDefaultFps) : limits_(std::move(limits)) {
    limits_.validate();
    received_.fps = fps;
  }

  void append(std::span<const MotionFrame> frames) {
    for (const auto& f : frames) {
      require(f.is_finite(), ErrorCode::NonFinite, "streamed frame has non-finite values");
      received_.frames.push_back(f);
    }
    const std::size_t n = received_.size();
    if (n < 3 || finalized_ + 2 > n) return;
    // Frames [finalized_, n - 1) have both neighbours; include one frame of
    // left context so their central stencils match the full clip.
    const std::size_t w = finalized_ == 0 ? 0 : finalized_ - 1;
    const auto window = slice(w, n);
    const auto vel = finite_diff(window, 1);
    const auto acc = finite_diff(window, 2);
    for (std::size_t t = finalized_; t + 1 < n; ++t) {
      accumulate(total_, frame_violation(received_.frames[t].joint_pos(), vel[t - w], acc[t - w], limits_),
                 limits_.aggregation);
    }
    finalized_ = n - 1;
  }

  std::size_t size() const { return received_.size(); }
  const MotionClip& received() const { return received_; }

  /// Empty until three frames have arrived.
  std::optional<SafetyScore> score() const {
    const std::size_t n = received_.size();
    if (n < 3) return std::nullopt;
    const auto tail = slice(n - 3, n);
    const auto vel = finite_diff(tail, 1);
    const auto acc = finite_diff(tail, 2);
    FrameViolation total = total_;
    accumulate(total, frame_violation(received_.frames[n - 1].joint_pos(), vel[2], acc[2], limits_),
               limits_.aggregation);
    return score_from_total(total, n, limits_);
  }

 private:
  MotionClip slice(std::size_t begin, std::size_t end) const {
    MotionClip c;
    c.fps = received_.fps;
    c.frames.assign(received_.frames.begin() + static_cast<std::ptrdiff_t>(begin),
                    received_.frames.begin() + static_cast<std::ptrdiff_t>(end));
    return c;
  }

  SafetyLimits limits_;
  MotionClip received_;
  std::size_t finalized_ = 0;
  FrameViolation total_;
};

/// Batch score: mean of per-clip scores.
inline double mean_motion_safety_score(std::span<const MotionClip> clips, const SafetyLimits& limits) {
  require(!clips.empty(), ErrorCode::EmptyInput, "no clips to score");
  double sum = 0;
  for (const auto& c : clips) sum += motion_safety_score(c, limits).mss;
  return sum / static_cast<double>(clips.size());
}

}  // namespace echo
