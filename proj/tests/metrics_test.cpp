#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "echo/metrics/embedding.hpp"
#include "echo/metrics/mpjpe.hpp"
#include "echo/metrics/safety.hpp"
#include "echo/metrics/trajectory.hpp"
#include "test_util.hpp"

namespace echo {
namespace {

using testing::still_clip;

// ---------------------------------------------------------------------------
// MSS

TEST(SafetyLimits, DataFileMatchesBuiltInTable) {
  const auto limits = load_joint_limits(std::string(ECHO_DATA_DIR) + "/g1.limits");
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    EXPECT_EQ(limits.position[j]->lower, kG1JointLimits[j].lower) << kJointNames[j];
    EXPECT_EQ(limits.position[j]->upper, kG1JointLimits[j].upper) << kJointNames[j];
  }
}

TEST(SafetyLimits, MissingJointIsAnError) {
  std::vector<std::string> lines;
  for (std::size_t j = 0; j + 1 < kNumJoints; ++j) lines.push_back(std::string(kJointNames[j]) + " -1 1");
  try {
    parse_joint_limits(lines);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingJointLimits);
  }
  EXPECT_THROW(motion_safety_score(still_clip(5), SafetyLimits{}), Error);
}

TEST(SafetyLimits, RejectsUnknownAndDuplicateJoints) {
  const std::vector<std::string> unknown{"left_tail 0 1"};
  EXPECT_THROW(parse_joint_limits(unknown), Error);
  const std::vector<std::string> dup{"left_knee 0 1", "left_knee 0 1"};
  EXPECT_THROW(parse_joint_limits(dup), Error);
}

TEST(MotionSafety, InLimitClipScoresOne) {
  auto clip = still_clip(20);
  for (auto& f : clip.frames) {
    for (std::size_t j = 0; j < kNumJoints; ++j) f.joint_pos()[j] = kG1JointLimits[j].center();
  }
  const auto s = motion_safety_score(clip, SafetyLimits::g1());
  EXPECT_EQ(s.mss, 1.0);
  EXPECT_EQ(s.s_pos, 1.0);
  EXPECT_EQ(s.s_vel, 1.0);
  EXPECT_EQ(s.s_acc, 1.0);
}

TEST(MotionSafety, SubScoreArithmetic) {
  const auto limits = SafetyLimits::g1();
  const auto s = safety_score_from_violations(0.01, 0.0, 0.0, limits);
  EXPECT_NEAR(s.mss, std::exp(-0.5), 1e-15);
  EXPECT_NEAR(s.mss, 0.6065306597, 1e-9);
}

TEST(MotionSafety, PositionViolationOnConstantClip) {
  // Unit symmetric ranges: soft limit 0.9 rad. Joint 0 at 0.9 * 1.29 exceeds
  // it by 0.29 of the limit; averaged over 29 joints that is v_pos = 0.01.
  SafetyLimits limits;
  for (auto& p : limits.position) p = JointRange{-1.0, 1.0};
  auto clip = still_clip(10);
  for (auto& f : clip.frames) f.joint_pos()[0] = 0.9 * 1.29;
  const auto s = motion_safety_score(clip, limits);
  EXPECT_NEAR(s.v_pos, 0.01, 1e-12);
  EXPECT_EQ(s.v_vel, 0.0);
  EXPECT_EQ(s.v_acc, 0.0);
  EXPECT_NEAR(s.mss, std::exp(-0.5), 1e-9);
}

TEST(MotionSafety, VelocityAndAccelerationViolations) {
  SafetyLimits limits;
  for (auto& p : limits.position) p = JointRange{-100.0, 100.0};
  auto clip = still_clip(10);
  // Ramp at 15 rad/s on one joint: velocity excess 0.5 of the limit on every
  // frame, zero acceleration.
  for (std::size_t t = 0; t < clip.size(); ++t) clip.frames[t].joint_pos()[3] = 15.0 * t / clip.fps;
  const auto s = motion_safety_score(clip, limits);
  EXPECT_NEAR(s.v_vel, 0.5 / 29.0, 1e-9);
  EXPECT_NEAR(s.v_acc, 0.0, 1e-9);
  EXPECT_NEAR(s.mss, std::pow(std::exp(-100.0 * 0.5 / 29.0), 0.3), 1e-9);

  limits.aggregation = ViolationAggregation::Max;
  EXPECT_NEAR(motion_safety_score(clip, limits).v_vel, 0.5, 1e-9);
}

TEST(MotionSafety, MonotoneAndBounded) {
  const auto limits = SafetyLimits::g1();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const auto s = safety_score_from_violations(a, b, c, limits);
    EXPECT_GE(s.mss, 0.0);
    EXPECT_LE(s.mss, 1.0);
    EXPECT_LE(safety_score_from_violations(a + 0.001, b, c, limits).mss, s.mss);
    EXPECT_LE(safety_score_from_violations(a, b + 0.001, c, limits).mss, s.mss);
    EXPECT_LE(safety_score_from_violations(a, b, c + 0.001, limits).mss, s.mss);
  }
}

TEST(MotionSafety, TooShort) {
  EXPECT_THROW(motion_safety_score(still_clip(2), SafetyLimits::g1()), Error);
}

TEST(MotionSafety, BatchMean) {
  SafetyLimits limits;
  for (auto& p : limits.position) p = JointRange{-1.0, 1.0};
  auto bad = still_clip(10);
  for (auto& f : bad.frames) f.joint_pos()[0] = 0.9 * 1.29;
  const std::vector<MotionClip> clips{still_clip(10), bad};
  EXPECT_NEAR(mean_motion_safety_score(clips, limits), 0.5 * (1.0 + std::exp(-0.5)), 1e-12);
}

TEST(OnlineSafety, MatchesOfflineScoreAfterEveryChunk) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> chunk(1, 30);
  for (auto agg : {ViolationAggregation::Mean, ViolationAggregation::Max}) {
    SafetyLimits limits = SafetyLimits::g1();
    limits.aggregation = agg;
    const auto clip = testing::random_clip(rng, 300, 0.4);
    OnlineSafety online(limits, clip.fps);
    std::size_t at = 0;
    while (at < clip.size()) {
      const std::size_t n = std::min<std::size_t>(clip.size() - at, static_cast<std::size_t>(chunk(rng)));
      online.append(std::span<const MotionFrame>(clip.frames).subspan(at, n));
      at += n;
      if (at < 3) {
        EXPECT_FALSE(online.score().has_value());
        continue;
      }
      MotionClip prefix;
      prefix.fps = clip.fps;
      prefix.frames.assign(clip.frames.begin(), clip.frames.begin() + static_cast<std::ptrdiff_t>(at));
      EXPECT_NEAR(online.score()->mss, motion_safety_score(prefix, limits).mss, 1e-12) << at;
    }
  }
}

// ---------------------------------------------------------------------------
// RTC

Path2d line_path(double length, std::size_t points, Eigen::Vector2d dir = {1, 0}) {
  Path2d p;
  for (std::size_t i = 0; i < points; ++i) p.push_back(dir * length * i / (points - 1));
  return p;
}

// Oracle: walk the polyline in tiny arc-length steps and record the position
// at each target arc length.
Path2d dense_resample(const Path2d& path, int k) {
  const double total = arc_length(path);
  Path2d out;
  const int steps = 200000;
  std::size_t seg = 0;
  double seg_start = 0;
  int next = 0;
  for (int s = 0; s <= steps && next < k; ++s) {
    const double at = total * s / steps;
    while (seg + 1 < path.size() - 1 && seg_start + (path[seg + 1] - path[seg]).norm() < at) {
      seg_start += (path[seg + 1] - path[seg]).norm();
      ++seg;
    }
    const double len = (path[seg + 1] - path[seg]).norm();
    const double u = len > 0 ? std::min(1.0, (at - seg_start) / len) : 0.0;
    const Eigen::Vector2d p = path[seg] + u * (path[seg + 1] - path[seg]);
    while (next < k && total * next / (k - 1) <= at + 1e-12) {
      out.push_back(p);
      ++next;
    }
  }
  return out;
}

TEST(Resample, MatchesDenseWalkOracle) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int trial = 0; trial < 10; ++trial) {
    Path2d path{{0, 0}};
    for (int i = 0; i < 40; ++i) path.push_back(path.back() + Eigen::Vector2d(0.05 + std::abs(n(rng)), n(rng)));
    path.push_back(path.back());  // zero-length segment
    const auto fast = resample_by_arc_length(path, 50);
    const auto slow = dense_resample(path, 50);
    ASSERT_EQ(fast.size(), 50u);
    ASSERT_EQ(slow.size(), 50u);
    for (int i = 0; i < 50; ++i) EXPECT_LT((fast[i] - slow[i]).norm(), 1e-4);
  }
}

TEST(Rtc, IdenticalPathsScoreOne) {
  const auto p = line_path(2.0, 30);
  const auto s = root_trajectory_consistency(std::span<const Eigen::Vector2d>(p), p);
  EXPECT_NEAR(s.rtc, 1.0, 1e-12);
  EXPECT_NEAR(s.s_shape, 1.0, 1e-12);
  EXPECT_EQ(s.s_extent, 1.0);
}

TEST(Rtc, HalfLengthLine) {
  const auto gt = line_path(1.0, 51);
  const auto gen = line_path(0.5, 26);
  const auto s = root_trajectory_consistency(std::span<const Eigen::Vector2d>(gen), gt);
  EXPECT_NEAR(s.s_extent, std::exp(-std::pow(std::log(0.5), 2) / 1.28), 1e-12);
  // Waypoint i sits at i/49 on gt and 0.5 i/49 on gen: mean gap 0.25 m.
  EXPECT_NEAR(s.shape_error, 0.25, 1e-12);
  EXPECT_NEAR(s.s_shape, std::exp(-0.0625 / (2 * 0.35 * 0.35)), 1e-12);
}

TEST(Rtc, ZeroLengthPaths) {
  const Path2d still(10, Eigen::Vector2d(3, 4));
  const auto s = root_trajectory_consistency(std::span<const Eigen::Vector2d>(still), still);
  EXPECT_EQ(s.rtc, 1.0);
}

TEST(Rtc, TranslationAndResamplingInvariance) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    Path2d gen{{0, 0}}, gt{{0, 0}};
    for (int i = 0; i < 60; ++i) {
      gen.push_back(gen.back() + Eigen::Vector2d(0.02 + n(rng), n(rng)));
      gt.push_back(gt.back() + Eigen::Vector2d(0.02 + n(rng), n(rng)));
    }
    const auto base = root_trajectory_consistency(std::span<const Eigen::Vector2d>(gen), gt);
    EXPECT_GT(base.rtc, 0.0);
    EXPECT_LE(base.rtc, 1.0);

    Path2d shifted = gen;
    for (auto& p : shifted) p += Eigen::Vector2d(7.0, -3.0);
    EXPECT_NEAR(root_trajectory_consistency(std::span<const Eigen::Vector2d>(shifted), gt).rtc, base.rtc, 1e-9);

    // Doubling the sampling rate along the same polyline.
    Path2d dense;
    for (std::size_t i = 0; i + 1 < gen.size(); ++i) {
      dense.push_back(gen[i]);
      dense.push_back(0.5 * (gen[i] + gen[i + 1]));
    }
    dense.push_back(gen.back());
    EXPECT_NEAR(root_trajectory_consistency(std::span<const Eigen::Vector2d>(dense), gt).rtc, base.rtc, 1e-9);
  }
}

TEST(Rtc, FromClipsIntegratesVelocities) {
  auto gt = still_clip(51);
  auto gen = still_clip(51);
  for (std::size_t t = 1; t < 51; ++t) {
    gt.frames[t].root_vel_xy()[0] = 0.02;
    gen.frames[t].root_vel_xy()[0] = 0.01;
  }
  const auto s = root_trajectory_consistency(gen, gt);
  EXPECT_NEAR(s.length_gt, 1.0, 1e-12);
  EXPECT_NEAR(s.s_extent, std::exp(-std::pow(std::log(0.5), 2) / 1.28), 1e-9);
}

TEST(Rtc, RejectsNonFinite) {
  Path2d bad{{0, 0}, {NAN, 0}};
  const Path2d ok{{0, 0}, {1, 0}};
  EXPECT_THROW(root_trajectory_consistency(std::span<const Eigen::Vector2d>(bad), ok), Error);
}

// ---------------------------------------------------------------------------
// Embedding metrics

EmbeddingSet gaussian_set(std::mt19937_64& rng, int n, int d, const Eigen::VectorXd& mean, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  EmbeddingSet e;
  e.rows.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) e.rows(i, k) = mean(k) + g(rng);
  }
  return e;
}

TEST(Fid, IdenticalSetsAreZero) {
  std::mt19937_64 rng(1);
  const auto a = gaussian_set(rng, 500, 6, Eigen::VectorXd::Zero(6));
  EXPECT_LT(fid(a, a), 1e-6);
}

TEST(Fid, CommutingCovariancesClosedForm) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  EXPECT_NEAR(frechet_distance(mu, 4.0 * Eigen::MatrixXd::Identity(2, 2), mu, Eigen::MatrixXd::Identity(2, 2)),
              2.0, 1e-12);
  // Diagonal covariances: sum_i (sqrt(a_i) - sqrt(b_i))^2 plus the mean term.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(5), b(5), ma(5), mb(5);
    double expected = 0;
    for (int i = 0; i < 5; ++i) {
      a(i) = u(rng);
      b(i) = u(rng);
      ma(i) = u(rng);
      mb(i) = u(rng);
      expected += std::pow(std::sqrt(a(i)) - std::sqrt(b(i)), 2) + std::pow(ma(i) - mb(i), 2);
    }
    EXPECT_NEAR(frechet_distance(ma, a.asDiagonal().toDenseMatrix(), mb, b.asDiagonal().toDenseMatrix()),
                expected, 1e-10);
  }
}

TEST(Fid, ShiftedGaussiansApproachMeanGap) {
  std::mt19937_64 rng(3);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(8);
  shift(0) = 1.0;
  const auto a = gaussian_set(rng, 10000, 8, Eigen::VectorXd::Zero(8));
  const auto b = gaussian_set(rng, 10000, 8, shift);
  EXPECT_NEAR(fid(a, b), 1.0, 0.05);
}

TEST(Fid, SymmetricAndNonNegative) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = gaussian_set(rng, 50, 4, Eigen::VectorXd::Zero(4), 0.5);
    const auto b = gaussian_set(rng, 60, 4, Eigen::VectorXd::Ones(4) * 0.1, 2.0);
    const double ab = fid(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, fid(b, a), 1e-9);
  }
  // Rank-deficient case stays non-negative.
  const auto small = gaussian_set(rng, 3, 10, Eigen::VectorXd::Zero(10));
  EXPECT_GE(fid(small, small), 0.0);
}

TEST(Fid, Errors) {
  EmbeddingSet a;
  a.rows = Eigen::MatrixXd::Zero(5, 3);
  EmbeddingSet b;
  b.rows = Eigen::MatrixXd::Zero(5, 4);
  EXPECT_THROW(fid(a, b), Error);
  a.rows(0, 0) = NAN;
  EXPECT_THROW(fid(a, a), Error);
}

TEST(RPrecision, IdenticalPairsAreTop1) {
  std::mt19937_64 rng(5);
  auto m = gaussian_set(rng, 64, 16, Eigen::VectorXd::Zero(16));
  const auto r = r_precision(m, m, 32, 1);
  EXPECT_EQ(r.top[0], 1.0);
  EXPECT_EQ(r.top[2], 1.0);
}

TEST(RPrecision, PoolOfOneAlwaysHits) {
  std::mt19937_64 rng(6);
  const auto m = gaussian_set(rng, 10, 4, Eigen::VectorXd::Zero(4));
  const auto t = gaussian_set(rng, 10, 4, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(r_precision(m, t, 1, 0).top[0], 1.0);
}

TEST(RPrecision, ChanceLevelForUnpairedEmbeddings) {
  std::mt19937_64 rng(7);
  const auto m = gaussian_set(rng, 4000, 8, Eigen::VectorXd::Zero(8));
  const auto t = gaussian_set(rng, 4000, 8, Eigen::VectorXd::Zero(8));
  const auto r = r_precision(m, t, 32, 11);
  for (int k = 0; k < 3; ++k) {
    const double p = (k + 1) / 32.0;
    const double se = std::sqrt(p * (1 - p) / 4000.0);
    EXPECT_NEAR(r.top[k], p, 4 * se) << "top-" << k + 1;
  }
  EXPECT_LE(r.top[0], r.top[1]);
  EXPECT_LE(r.top[1], r.top[2]);
}

TEST(RPrecision, DeterministicUnderSeed) {
  std::mt19937_64 rng(8);
  const auto m = gaussian_set(rng, 100, 4, Eigen::VectorXd::Zero(4));
  const auto t = gaussian_set(rng, 100, 4, Eigen::VectorXd::Zero(4), 0.3);
  EXPECT_EQ(r_precision(m, t, 32, 99).top, r_precision(m, t, 32, 99).top);
  EXPECT_THROW(r_precision(m, t, 101, 0), Error);
}

TEST(Diversity, IdenticalAndTwoPoint) {
  EmbeddingSet same;
  same.rows = Eigen::MatrixXd::Ones(20, 5);
  EXPECT_EQ(diversity(same, 300, 0), 0.0);

  EmbeddingSet two;
  two.rows = Eigen::MatrixXd::Zero(2, 3);
  two.rows(1, 2) = 2.5;
  EXPECT_DOUBLE_EQ(diversity(two, 1000, 3), 2.5);

  EmbeddingSet one;
  one.rows = Eigen::MatrixXd::Zero(1, 3);
  EXPECT_THROW(diversity(one), Error);
}

TEST(Diversity, MatchesExhaustivePairMean) {
  std::mt19937_64 rng(9);
  const auto e = gaussian_set(rng, 40, 6, Eigen::VectorXd::Zero(6));
  double sum = 0;
  int pairs = 0;
  for (int i = 0; i < 40; ++i) {
    for (int j = i + 1; j < 40; ++j) {
      sum += (e.rows.row(i) - e.rows.row(j)).norm();
      ++pairs;
    }
  }
  const double exhaustive = sum / pairs;
  EXPECT_NEAR(diversity(e, 200000, 5), exhaustive, 0.01 * exhaustive);
}

TEST(MmDist, Basics) {
  std::mt19937_64 rng(10);
  const auto m = gaussian_set(rng, 30, 5, Eigen::VectorXd::Zero(5));
  EXPECT_EQ(mm_dist(m, m), 0.0);
  auto shifted = m;
  shifted.rows.col(2).array() += 1.0;
  EXPECT_NEAR(mm_dist(m, shifted), 1.0, 1e-12);

  const auto t = gaussian_set(rng, 30, 5, Eigen::VectorXd::Zero(5));
  double brute = 0;
  for (int i = 0; i < 30; ++i) {
    double sq = 0;
    for (int k = 0; k < 5; ++k) sq += std::pow(m.rows(i, k) - t.rows(i, k), 2);
    brute += std::sqrt(sq);
  }
  EXPECT_NEAR(mm_dist(m, t), brute / 30, 1e-12);

  const auto short_set = gaussian_set(rng, 29, 5, Eigen::VectorXd::Zero(5));
  EXPECT_THROW(mm_dist(m, short_set), Error);
}

TEST(EmbeddingFiles, BinaryAndCsv) {
  std::mt19937_64 rng(11);
  auto e = gaussian_set(rng, 7, 3, Eigen::VectorXd::Zero(3));
  e.role = EmbeddingRole::Text;
  const auto bytes = encode_emb(e);
  ASSERT_EQ(bytes.size(), 13u + 7 * 3 * 4);
  const auto back = decode_emb(bytes);
  EXPECT_EQ(back.role, EmbeddingRole::Text);
  EXPECT_EQ(encode_emb(back), bytes);
  auto bad = bytes;
  bad[1] = 'X';
  EXPECT_THROW(decode_emb(bad), Error);

  const std::vector<std::string> csv{"# header", "1, 2, 3", "4 5 6"};
  const auto parsed = parse_embedding_csv(csv);
  EXPECT_EQ(parsed.count(), 2);
  EXPECT_EQ(parsed.rows(1, 2), 6.0);
  const std::vector<std::string> ragged{"1,2", "3"};
  EXPECT_THROW(parse_embedding_csv(ragged), Error);
}

// ---------------------------------------------------------------------------
// MPJPE

KeypointFrames random_keypoints(std::mt19937_64& rng, int frames, int points) {
  std::normal_distribution<double> n(0.0, 0.5);
  KeypointFrames out;
  for (int t = 0; t < frames; ++t) {
    Eigen::Matrix3Xd m(3, points);
    for (int i = 0; i < points; ++i) m.col(i) = Eigen::Vector3d(n(rng), n(rng), n(rng));
    out.push_back(m);
  }
  return out;
}

TEST(Mpjpe, IdenticalAndShifted) {
  std::mt19937_64 rng(12);
  const auto ref = random_keypoints(rng, 10, 12);
  const auto same = mpjpe(ref, ref);
  EXPECT_EQ(same.global_mm, 0.0);
  EXPECT_EQ(same.local_mm, 0.0);

  auto shifted = ref;
  for (auto& f : shifted) f.colwise() += Eigen::Vector3d(0.06, 0.08, 0.0);
  const auto r = mpjpe(shifted, ref);
  EXPECT_NEAR(r.global_mm, 100.0, 1e-9);
  EXPECT_NEAR(r.local_mm, 0.0, 1e-9);
}

TEST(Mpjpe, MatchesBruteForce) {
  std::mt19937_64 rng(13);
  const auto ref = random_keypoints(rng, 8, 5);
  auto act = ref;
  std::normal_distribution<double> n(0.0, 0.01);
  for (auto& f : act) {
    for (int i = 0; i < f.cols(); ++i) f.col(i) += Eigen::Vector3d(n(rng), n(rng), n(rng));
  }
  double g = 0, l = 0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    for (int i = 0; i < 5; ++i) {
      g += std::sqrt(std::pow(act[t](0, i) - ref[t](0, i), 2) + std::pow(act[t](1, i) - ref[t](1, i), 2) +
                     std::pow(act[t](2, i) - ref[t](2, i), 2));
      double sq = 0;
      for (int c = 0; c < 3; ++c) {
        sq += std::pow((act[t](c, i) - act[t](c, 0)) - (ref[t](c, i) - ref[t](c, 0)), 2);
      }
      l += std::sqrt(sq);
    }
  }
  const auto r = mpjpe(act, ref);
  EXPECT_NEAR(r.global_mm, 1000 * g / 40, 1e-9);
  EXPECT_NEAR(r.local_mm, 1000 * l / 40, 1e-9);

  auto both_shifted_a = act, both_shifted_r = ref;
  for (auto& f : both_shifted_a) f.colwise() += Eigen::Vector3d(1, 2, 3);
  for (auto& f : both_shifted_r) f.colwise() += Eigen::Vector3d(-4, 0, 1);
  EXPECT_NEAR(mpjpe(both_shifted_a, both_shifted_r).local_mm, r.local_mm, 1e-9);
}

TEST(Mpjpe, ShapeErrors) {
  std::mt19937_64 rng(14);
  const auto a = random_keypoints(rng, 4, 3);
  const auto b = random_keypoints(rng, 5, 3);
  const auto c = random_keypoints(rng, 4, 4);
  EXPECT_THROW(mpjpe(a, b), Error);
  EXPECT_THROW(mpjpe(a, c), Error);
}

}  // namespace
}  // namespace echo
