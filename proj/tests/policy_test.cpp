#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "echo/policy/action_filter.hpp"
#include "echo/policy/evidential.hpp"
#include "echo/policy/randomization.hpp"
#include "echo/policy/reward.hpp"
#include "echo/policy/symmetry.hpp"

namespace echo::policy {
namespace {

// ---------------------------------------------------------------------------
// Tracking reward

FeatureMap features(double pos, double vel) {
  return {{"joint_pos", Eigen::VectorXd::Constant(29, pos)}, {"joint_vel", Eigen::VectorXd::Constant(29, vel)}};
}

TEST(TrackingReward, ZeroErrorIsWeightSum) {
  const auto r = tracking_reward(features(0.1, 2.0), features(0.1, 2.0));
  EXPECT_EQ(r.total, 1.5);
  EXPECT_EQ(r.terms.at("joint_pos"), 1.0);
  EXPECT_EQ(r.terms.at("joint_vel"), 0.5);
}

TEST(TrackingReward, ErrorEqualToSigmaGivesInverseE) {
  RewardConfig cfg;
  cfg.terms = {{"joint_pos", {2.0, 0.5}}};
  FeatureMap a{{"joint_pos", Eigen::VectorXd::Zero(2)}};
  FeatureMap b{{"joint_pos", Eigen::VectorXd::Zero(2)}};
  b["joint_pos"] << 0.5, 0.5;  // squared norm 0.5
  EXPECT_NEAR(tracking_reward(a, b, cfg).total, 2.0 * std::exp(-1.0), 1e-15);
}

TEST(TrackingReward, BoundedAndDecreasing) {
  double last = 2.0;
  for (double e = 0.0; e < 1.0; e += 0.05) {
    const auto reward = tracking_reward(features(e, 0.0), features(0.0, 0.0));
    const double r = reward.terms.at("joint_pos");
    EXPECT_GT(r, 0.0);
    EXPECT_LE(reward.total, 1.5);
    EXPECT_LT(r, last);
    last = r;
  }
}

TEST(TrackingReward, Errors) {
  FeatureMap partial{{"joint_pos", Eigen::VectorXd::Zero(29)}};
  try {
    tracking_reward(partial, features(0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFeature);
  }
  RewardConfig bad;
  bad.terms["joint_pos"].sigma = 0.0;
  EXPECT_THROW(tracking_reward(features(0, 0), features(0, 0), bad), Error);
  FeatureMap wrong = features(0, 0);
  wrong["joint_vel"] = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(tracking_reward(wrong, features(0, 0)), Error);
}

TEST(TrackingReward, FullConfigHasDefaultWeights) {
  const auto cfg = RewardConfig::full();
  EXPECT_EQ(cfg.terms.at("joint_pos").weight, 1.0);
  EXPECT_EQ(cfg.terms.at("joint_vel").weight, 0.5);
  EXPECT_EQ(cfg.regularization.joint_velocity, 5.0e-4);
  EXPECT_EQ(cfg.regularization.action_rate, 0.01);
}

// ---------------------------------------------------------------------------
// Impact and air time

TEST(ImpactPenalty, Examples) {
  EXPECT_EQ(impact_penalty({}), 0.0);
  const std::vector<ContactSample> down{{-1.0, true}};
  EXPECT_EQ(impact_penalty(down), -1.0);
  const std::vector<ContactSample> up{{0.5, true}};
  EXPECT_EQ(impact_penalty(up), 0.0);
  const std::vector<ContactSample> mixed{{-2.0, true}, {-3.0, false}, {-0.5, true}, {1.0, true}};
  EXPECT_EQ(impact_penalty(mixed), -4.25);
}

std::vector<bool> gait(std::size_t stance, std::size_t swing, std::size_t cycles, bool start_in_swing = false) {
  std::vector<bool> c;
  for (std::size_t k = 0; k < cycles; ++k) {
    if (start_in_swing) {
      c.insert(c.end(), swing, false);
      c.insert(c.end(), stance, true);
    } else {
      c.insert(c.end(), stance, true);
      c.insert(c.end(), swing, false);
    }
  }
  c.push_back(true);
  return c;
}

TEST(FeetAirTime, Examples) {
  const AirTimeConfig cfg;  // 0.4 s target at 50 fps
  EXPECT_EQ(feet_air_time_reward(std::vector<bool>(100, true), cfg), 0.0);
  EXPECT_EQ(feet_air_time_dense(std::vector<bool>(100, true), cfg), 0.0);
  const auto one_swing = gait(5, 20, 1);
  EXPECT_NEAR(feet_air_time_reward(one_swing, cfg), 0.4, 1e-12);
  EXPECT_NEAR(feet_air_time_dense(one_swing, cfg), 0.4, 1e-12);
  // 1.2 s swing: capped at the target, minus 0.4 s beyond twice the target.
  EXPECT_NEAR(feet_air_time_reward(gait(5, 60, 1), cfg), 0.0, 1e-12);
  EXPECT_NEAR(feet_air_time_dense(gait(5, 60, 1), cfg), 0.4, 1e-12);
  // A swing that never lands earns nothing in event form.
  std::vector<bool> open(10, true);
  open.insert(open.end(), 30, false);
  EXPECT_EQ(feet_air_time_reward(open, cfg), 0.0);
}

TEST(FeetAirTime, SymmetricGaitGivesEqualTotals) {
  const auto left = gait(15, 15, 6);
  const auto right = gait(15, 15, 6, true);
  EXPECT_DOUBLE_EQ(feet_air_time_reward(left), feet_air_time_reward(right));
  EXPECT_NEAR(feet_air_time_reward(left), 6 * 0.3, 1e-12);
}

// ---------------------------------------------------------------------------
// Symmetry

TEST(MirrorMap, G1TableMatchesDataFile) {
  const auto file = load_mirror_map(std::string(ECHO_DATA_DIR) + "/g1_mirror.txt");
  const auto built = g1_joint_mirror();
  EXPECT_EQ(file.source, built.source);
  EXPECT_EQ(file.sign, built.sign);
  EXPECT_NO_THROW(built.validate());
  EXPECT_EQ(built.source[*joint_index("left_knee")], *joint_index("right_knee"));
  EXPECT_EQ(built.sign[*joint_index("waist_yaw")], -1.0);
  EXPECT_EQ(built.source[*joint_index("waist_pitch")], *joint_index("waist_pitch"));
}

TEST(MirrorMap, RejectsNonInvolutions) {
  MirrorMap m{{1, 2, 0}, {1, 1, 1}};
  try {
    m.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInvolution);
  }
  MirrorMap sign{{1, 0}, {1, -1}};
  EXPECT_THROW(sign.validate(), Error);
  const std::vector<std::string> gap{"0, 0, 1", "2, 2, 1"};
  EXPECT_THROW(parse_mirror_map(gap), Error);
}

MirrorMap obs_mirror() {
  // Joint positions, joint velocities, then projected gravity (y flips).
  const auto j = g1_joint_mirror();
  MirrorMap m;
  for (std::size_t block = 0; block < 2; ++block) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      m.source.push_back(block * 29 + j.source[i]);
      m.sign.push_back(j.sign[i]);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    m.source.push_back(58 + i);
    m.sign.push_back(i == 1 ? -1.0 : 1.0);
  }
  return m;
}

Eigen::MatrixXd as_matrix(const MirrorMap& m, bool with_sign = true) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.source[i])) = with_sign ? m.sign[i] : 1.0;
  }
  return t;
}

TEST(SymmetryLoss, EquivariantLinearPolicyIsZero) {
  SymmetrySpec spec{obs_mirror(), g1_joint_mirror(), 1.0, 1.0};
  const Eigen::MatrixXd to = as_matrix(spec.obs);
  const Eigen::MatrixXd ta = as_matrix(spec.act);
  const Eigen::MatrixXd pa = as_matrix(spec.act, false);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.1);
  Eigen::MatrixXd a(29, 61), c(29, 61);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = n(rng);
    c.data()[i] = n(rng);
  }
  // W = A + T_act A T_obs satisfies T_act W = W T_obs; likewise for the
  // permutation-only sigma branch.
  const Eigen::MatrixXd w = a + ta * a * to;
  const Eigen::MatrixXd b = c + pa * c * to;
  const Policy policy = [&](const Eigen::VectorXd& o) {
    return PolicyOutput{w * o, (b * o).array().exp().matrix()};
  };
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd o(61);
    for (Eigen::Index i = 0; i < 61; ++i) o(i) = 10 * n(rng);
    EXPECT_NEAR(symmetry_loss(policy, o, spec), 0.0, 1e-20);
  }
  // A generic policy is not symmetric.
  const Policy generic = [&](const Eigen::VectorXd& o) {
    return PolicyOutput{a * o, (c * o).array().exp().matrix()};
  };
  Eigen::VectorXd o = Eigen::VectorXd::Ones(61);
  EXPECT_GT(symmetry_loss(generic, o, spec), 1e-3);
}

TEST(SymmetryLoss, ConstantAsymmetricPolicy) {
  SymmetrySpec spec{obs_mirror(), g1_joint_mirror(), 1.5, 2.0};
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(29);
  mu(0) = 1.0;  // left_hip_pitch only: mirror puts it on right_hip_pitch
  Eigen::VectorXd sigma = Eigen::VectorXd::Constant(29, 0.3);
  sigma(1) = 0.5;  // left_hip_roll; its mirror holds 0.3
  const Policy policy = [&](const Eigen::VectorXd&) { return PolicyOutput{mu, sigma}; };
  // mu term: |e0 - e6|^2 = 2. sigma term: 0.2^2 twice = 0.08.
  const Eigen::VectorXd o = Eigen::VectorXd::Zero(61);
  EXPECT_NEAR(symmetry_loss(policy, o, spec), 1.5 * 2.0 + 2.0 * 0.08, 1e-12);
  spec.c_mu = 3.0;
  spec.c_sigma = 0.0;
  EXPECT_NEAR(symmetry_loss(policy, o, spec), 6.0, 1e-12);
}

TEST(SymmetryLoss, InvariantUnderMirroredObservation) {
  SymmetrySpec spec{obs_mirror(), g1_joint_mirror(), 1.0, 0.5};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.2);
  Eigen::MatrixXd a(29, 61);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  const Policy policy = [&](const Eigen::VectorXd& o) {
    return PolicyOutput{a * o, (a * o).array().abs().matrix()};
  };
  Eigen::VectorXd o(61);
  for (Eigen::Index i = 0; i < 61; ++i) o(i) = n(rng);
  EXPECT_NEAR(symmetry_loss(policy, o, spec), symmetry_loss(policy, spec.obs.apply(o), spec), 1e-12);
  const Policy bad = [](const Eigen::VectorXd&) { return PolicyOutput{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)}; };
  EXPECT_THROW(symmetry_loss(bad, o, spec), Error);
}

// ---------------------------------------------------------------------------
// Evidential loss

// -log of the NIG predictive density: y ~ N(mu, s) with mu ~ N(gamma, s / nu)
// gives y ~ N(gamma, s (1 + nu) / nu); the variance s ~ InvGamma(alpha, beta)
// is integrated out numerically.
double quadrature_nll(double err, double nu, double alpha, double beta) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto density = [&](double s) {
    if (s <= 0) return 0.0;
    const double var = s * (1 + nu) / nu;
    const double log_normal = -0.5 * std::log(2 * std::numbers::pi * var) - 0.5 * err * err / var;
    const double log_ig = alpha * std::log(beta) - std::lgamma(alpha) - (alpha + 1) * std::log(s) - beta / s;
    return std::exp(log_normal + log_ig);
  };
  return -std::log(integrator.integrate(density, 1e-14));
}

TEST(Evidential, NllMatchesQuadratureGrid) {
  const double nus[] = {0.1, 0.5, 1.0, 3.0, 10.0};
  const double alphas[] = {1.1, 1.5, 2.0, 4.0, 10.0};
  const double betas[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  for (double nu : nus) {
    for (double alpha : alphas) {
      for (double beta : betas) {
        for (double err : {0.0, 0.5, -1.7}) {
          const double got = evidential_nll_scalar(err, nu, alpha, beta);
          EXPECT_NEAR(got, quadrature_nll(err, nu, alpha, beta), 1e-6) << nu << " " << alpha << " " << beta;
        }
      }
    }
  }
}

TEST(Evidential, SummedOverDimensions) {
  Eigen::VectorXd mu(3), z(3);
  mu << 0.0, 1.0, -1.0;
  z << 0.5, 1.0, 0.0;
  const auto p = NIGParams::shared(mu, 1.0, 2.0, 1.0);
  const double want = evidential_nll_scalar(0.5, 1, 2, 1) + evidential_nll_scalar(0.0, 1, 2, 1) +
                      evidential_nll_scalar(1.0, 1, 2, 1);
  EXPECT_NEAR(evidential_nll(z, p), want, 1e-14);
  EXPECT_NEAR(evidential_nll_scalar(0.5, 1.0, 2.0, 1.0), quadrature_nll(0.5, 1.0, 2.0, 1.0), 1e-6);
}

TEST(Evidential, Regularizer) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd z(2);
  z << 0.6, 0.8;  // |z - mu| = 1
  const auto p = NIGParams::shared(mu, 1.0, 2.0, 1.0);
  EXPECT_NEAR(evidential_reg(z, p, 0.2), 0.8, 1e-15);
  EXPECT_EQ(evidential_reg(mu, p, 0.2), 0.0);
  EXPECT_NEAR(evidential_reg(3.0 * z, p, 0.2), 2.4, 1e-14);
  EXPECT_NEAR(evidential_loss(z, p, 0.2), evidential_nll(z, p) + 0.8, 1e-14);

  NIGParams per_dim{mu, Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(2.0, 3.0), Eigen::Vector2d(1.0, 1.0)};
  EXPECT_NEAR(evidential_reg(z, per_dim, 0.5), 0.5 * (0.6 * 4.0 + 0.8 * 7.0), 1e-14);
}

TEST(Evidential, ConstraintViolations) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  for (const auto& p : {NIGParams::shared(mu, 0.0, 2.0, 1.0), NIGParams::shared(mu, 1.0, 1.0, 1.0),
                        NIGParams::shared(mu, 1.0, 2.0, -1.0)}) {
    try {
      evidential_nll(mu, p);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConstraintViolation);
    }
  }
  NIGParams wrong{mu, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Ones(1)};
  EXPECT_THROW(evidential_nll(mu, wrong), Error);
}

// ---------------------------------------------------------------------------
// Domain randomization

TEST(Randomization, DataFileMatchesDefaults) {
  const auto file = load_randomization(std::string(ECHO_DATA_DIR) + "/randomization.cfg");
  const auto def = RandomizationSpec::defaults();
  ASSERT_EQ(file.entries.size(), def.entries.size());
  for (std::size_t i = 0; i < def.entries.size(); ++i) {
    EXPECT_EQ(file.entries[i].name, def.entries[i].name);
    EXPECT_EQ(file.entries[i].low, def.entries[i].low);
    EXPECT_EQ(file.entries[i].high, def.entries[i].high);
    EXPECT_EQ(file.entries[i].count, def.entries[i].count);
  }
}

TEST(Randomization, DrawsStayInRangeAndCentre) {
  const auto spec = RandomizationSpec::defaults();
  std::mt19937_64 rng(3);
  std::map<std::string, double> sum;
  std::map<std::string, std::size_t> n;
  for (int i = 0; i < 20000; ++i) {
    const auto d = sample_randomization(spec, rng);
    for (const auto& e : spec.entries) {
      const auto& v = d.at(e.name);
      ASSERT_EQ(v.size(), e.count);
      for (double x : v) {
        ASSERT_GE(x, e.low);
        ASSERT_LE(x, e.high);
        sum[e.name] += x;
        ++n[e.name];
      }
    }
  }
  for (const auto& e : spec.entries) {
    const double mean = sum[e.name] / static_cast<double>(n[e.name]);
    EXPECT_NEAR(mean, 0.5 * (e.low + e.high), 0.01 * (e.high - e.low)) << e.name;
  }
}

TEST(Randomization, DegenerateAndSeeded) {
  RandomizationSpec spec{{{"fixed", 0.7, 0.7, 2}}};
  EXPECT_EQ(sample_randomization(spec, 1).at("fixed"), (std::vector<double>{0.7, 0.7}));
  const auto def = RandomizationSpec::defaults();
  EXPECT_EQ(sample_randomization(def, 99), sample_randomization(def, 99));
  EXPECT_NE(sample_randomization(def, 99), sample_randomization(def, 100));
  RandomizationSpec bad{{{"inverted", 1.0, 0.0, 1}}};
  EXPECT_THROW(sample_randomization(bad, 1), Error);
  const std::vector<std::string> lines{"a 0 1", "a 0 2"};
  EXPECT_THROW(parse_randomization(lines), Error);
}

// ---------------------------------------------------------------------------
// Action filter

TEST(ActionFilter, Examples) {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(29);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(29);
  EXPECT_EQ(ema_action_filter(std::nullopt, one, 0.8), one);
  EXPECT_EQ(ema_action_filter(zero, one, 0.0), one);
  EXPECT_EQ(ema_action_filter(one, one, 0.8), one);

  ActionFilter f(0.8);
  f(zero);
  for (int n = 1; n <= 30; ++n) {
    const auto& out = f(one);
    EXPECT_NEAR(out(5), 1.0 - std::pow(0.8, n), 1e-12);
  }
  f.reset();
  EXPECT_EQ(f(one), one);
  EXPECT_THROW(ActionFilter(1.0), Error);
}

TEST(ActionFilter, ConvexCombination) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd a(29), b(29);
    for (int i = 0; i < 29; ++i) {
      a(i) = u(rng);
      b(i) = u(rng);
    }
    const auto out = ema_action_filter(a, b, std::abs(u(rng)) / 3.01);
    for (int i = 0; i < 29; ++i) {
      EXPECT_GE(out(i), std::min(a(i), b(i)) - 1e-15);
      EXPECT_LE(out(i), std::max(a(i), b(i)) + 1e-15);
    }
  }
}

}  // namespace
}  // namespace echo::policy
