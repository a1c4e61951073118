#include "pivot/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "test_rng.hpp"

using namespace pivot;

namespace {

constexpr double kCycleS = 0.033;

// A plant with analytic loss and exact kinematics: probe cycles move the
// pose the way the real controller would (press at v0 along the normalised
// probe, or a capped rotation increment), restore cycles apply the commanded
// motion verbatim.  The loss is a pure function of the probe vector, so
// finite-difference behaviour can be checked against calculus.
class AnalyticPlant : public ProbePlant {
 public:
  AnalyticPlant(DecisionMode mode, const ControllerConfig& ccfg,
                std::function<double(const Eigen::Vector3d&)> loss)
      : loss_(std::move(loss)), mode_(mode), ccfg_(ccfg) {}

  double probe_cycle(const Eigen::Vector3d& probe) override {
    if (mode_ == DecisionMode::PressDirection) {
      position_ += task_action_contact(probe, ccfg_) * kCycleS;
    } else {
      const RpyVector rpy = coordinating_action_air(probe, ccfg_);
      orientation_ = rpy_to_rotation(rpy).matrix() * orientation_;
    }
    return loss_(probe);
  }

  void restore_cycle(const Eigen::Vector3d& motion) override {
    if (mode_ == DecisionMode::PressDirection) {
      position_ += motion * kCycleS;
    } else {
      orientation_ = rpy_to_rotation(RpyVector::from_vector(motion)).matrix() * orientation_;
    }
  }

  Eigen::Vector3d gripper_position() const override { return position_; }
  Eigen::Matrix3d gripper_orientation() const override { return orientation_; }
  double cycle_s() const override { return kCycleS; }

  std::function<double(const Eigen::Vector3d&)> loss_;

 private:
  DecisionMode mode_;
  ControllerConfig ccfg_;
  Eigen::Vector3d position_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation_ = Eigen::Matrix3d::Identity();
};

// Replays one scripted loss value per schedule, ignoring the probe.
class ScriptedPlant : public ProbePlant {
 public:
  explicit ScriptedPlant(std::vector<double> per_schedule) : script_(std::move(per_schedule)) {}

  double probe_cycle(const Eigen::Vector3d&) override {
    const double v = script_[schedule_];
    if (++probe_in_schedule_ == 6) {
      probe_in_schedule_ = 0;
      ++schedule_;
    }
    return v;
  }
  void restore_cycle(const Eigen::Vector3d&) override {}
  Eigen::Vector3d gripper_position() const override { return Eigen::Vector3d::Zero(); }
  Eigen::Matrix3d gripper_orientation() const override { return Eigen::Matrix3d::Identity(); }
  double cycle_s() const override { return kCycleS; }

 private:
  std::vector<double> script_;
  std::size_t schedule_ = 0;
  int probe_in_schedule_ = 0;
};

OptimizerConfig opt_config() { return OptimizerConfig{}; }

ControllerConfig ctl_config(Scenario s) {
  ControllerConfig c;
  c.scenario = s;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------
// Loss shape
// ---------------------------------------------------------------------

TEST(RotationalLossTerm, HandValues) {
  EXPECT_DOUBLE_EQ(rotational_loss_term(1.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(rotational_loss_term(0.5, 1.0), -0.75);
  EXPECT_DOUBLE_EQ(rotational_loss_term(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(rotational_loss_term(-0.3, 1.0), 0.09);
  EXPECT_DOUBLE_EQ(rotational_loss_term(2.0, 1.0), 0.0);  // overshoot costs the reward back
}

TEST(RotationalLossTerm, ContinuousAtZeroMinimumAtSweetSpot) {
  for (double lambda0 : {0.5, 1.0, 2.0}) {
    const double h = 1e-8;
    EXPECT_NEAR(rotational_loss_term(h, lambda0), rotational_loss_term(-h, lambda0), 3.0 * lambda0 * h);

    EXPECT_DOUBLE_EQ(rotational_loss_term(lambda0, lambda0), -lambda0 * lambda0);
    for (double sigma = -3.0; sigma <= 3.0; sigma += 0.01) {
      EXPECT_GE(rotational_loss_term(sigma, lambda0), -lambda0 * lambda0);
    }
  }
}

TEST(CycleLoss, CombinesTranslationalAndRotationalTerms) {
  SlipMetrics m;
  m.s1 = {0.3, -0.4, 0.12};
  m.s2 = 0.2;
  const double sq = m.s1.squaredNorm();
  EXPECT_DOUBLE_EQ(cycle_loss(m, 0.3, -1), sq + 0.04);               // adverse spin, quadratic
  EXPECT_DOUBLE_EQ(cycle_loss(m, 0.3, +1), sq + (0.01 - 0.09));      // helpful spin, rewarded
}

// ---------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------

TEST(FiniteDifferenceGradient, HandValues) {
  const std::array<double, 6> losses = {1.2, 1.0, 2.0, 2.0, 0.0, 1.0};
  const Eigen::Vector3d g = finite_difference_gradient(losses, 0.05);
  EXPECT_DOUBLE_EQ(g.x(), 2.0);
  EXPECT_DOUBLE_EQ(g.y(), 0.0);
  EXPECT_DOUBLE_EQ(g.z(), -10.0);
}

// Central differences are exact (to rounding) on quadratics.
TEST(FiniteDifferenceGradient, ExactOnQuadratics) {
  const Eigen::Vector3d a(0.1, 0.3, -0.5);
  const Eigen::Vector3d w(1.5, 0.7, 2.2);
  const auto f = [&](const Eigen::Vector3d& d) {
    return (d - a).cwiseProduct(w.cwiseSqrt()).squaredNorm();
  };
  testutil::SplitMix64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d d = rng.vec3(-1.0, 1.0);
    const double eps = rng.uniform(0.01, 0.3);
    std::array<double, 6> losses{};
    for (int m = 0; m < 3; ++m) {
      Eigen::Vector3d p = d, q = d;
      p[m] += eps;
      q[m] -= eps;
      losses[2 * m] = f(p);
      losses[2 * m + 1] = f(q);
    }
    const Eigen::Vector3d analytic = 2.0 * w.cwiseProduct(d - a);
    EXPECT_LT((finite_difference_gradient(losses, eps) - analytic).norm(), 1e-9);
  }
}

// On a quartic the truncation error is pure second order in epsilon, so
// halving epsilon divides the error by almost exactly four.
TEST(FiniteDifferenceGradient, SecondOrderConvergence) {
  const Eigen::Vector3d a(0.2, -0.1, 0.4);
  const auto f = [&](const Eigen::Vector3d& d) {
    const Eigen::Vector3d e = d - a;
    return e.array().pow(4).sum();
  };
  const Eigen::Vector3d d(1.1, 0.8, -0.9);
  const Eigen::Vector3d analytic = 4.0 * (d - a).array().pow(3).matrix();

  const auto error_at = [&](double eps) {
    std::array<double, 6> losses{};
    for (int m = 0; m < 3; ++m) {
      Eigen::Vector3d p = d, q = d;
      p[m] += eps;
      q[m] -= eps;
      losses[2 * m] = f(p);
      losses[2 * m + 1] = f(q);
    }
    return (finite_difference_gradient(losses, eps) - analytic).norm();
  };

  double eps = 0.2;
  for (int halving = 0; halving < 3; ++halving) {
    const double ratio = error_at(eps) / error_at(eps / 2.0);
    EXPECT_GE(ratio, 3.9);
    EXPECT_LE(ratio, 4.1);
    eps /= 2.0;
  }
}

// ---------------------------------------------------------------------
// Update rule
// ---------------------------------------------------------------------

TEST(ApplyUpdate, PressDirectionStaysUnit) {
  OptimizerState s = make_press_direction_optimizer(Eigen::Vector3d::UnitX(), opt_config());
  s.alpha = 0.05;
  ASSERT_EQ(apply_update(s, Eigen::Vector3d(0.0, -2.0, 0.0), deg2rad(3.0)), UpdateOutcome::Applied);
  const Eigen::Vector3d expected = Eigen::Vector3d(1.0, 0.1, 0.0).normalized();
  EXPECT_LT((s.decision - expected).norm(), 1e-15);
  EXPECT_NEAR(s.decision.norm(), 1.0, 1e-12);
}

TEST(ApplyUpdate, DegenerateStepSkippedAndAlphaHalved) {
  OptimizerState s = make_press_direction_optimizer(Eigen::Vector3d::UnitX(), opt_config());
  s.alpha = 0.05;
  // candidate = (1,0,0) - 0.05 * (20,0,0) = 0 exactly.
  ASSERT_EQ(apply_update(s, Eigen::Vector3d(20.0, 0.0, 0.0), deg2rad(3.0)), UpdateOutcome::SkippedDegenerate);
  EXPECT_EQ(s.decision, Eigen::Vector3d::UnitX());
  EXPECT_DOUBLE_EQ(s.alpha, 0.025);
}

TEST(ApplyUpdate, RotationRateRespectsCap) {
  OptimizerState s = make_rotation_rate_optimizer(Eigen::Vector3d::Zero(), opt_config());
  s.alpha = 1.0;
  apply_update(s, Eigen::Vector3d(-0.5, 0.0, 0.0), deg2rad(3.0));
  const double angle = log_so3(rpy_to_rotation(RpyVector::from_vector(s.decision)).matrix()).norm();
  EXPECT_LE(angle, deg2rad(3.0) + 1e-12);
}

TEST(OptimizerConfigValidate, RejectsBadValues) {
  EXPECT_NO_THROW(opt_config().validate());
  OptimizerConfig bad = opt_config();
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = opt_config();
  bad.epsilon_rpy = -0.1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = opt_config();
  bad.lambda0_mm = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = opt_config();
  bad.cadence_cycles = 0;
  EXPECT_THROW(bad.validate(), ConfigError);

  EXPECT_THROW(make_press_direction_optimizer(Eigen::Vector3d::Zero(), opt_config()), ConfigError);
}

// ---------------------------------------------------------------------
// Full probe schedules
// ---------------------------------------------------------------------

TEST(OptimizeStep, GradientMatchesCalculusOnQuadraticPlant) {
  const ControllerConfig ccfg = ctl_config(Scenario::Contact);
  const Eigen::Vector3d a(0.1, 0.3, -0.5);
  const Eigen::Vector3d w(1.5, 0.7, 2.2);
  AnalyticPlant plant(DecisionMode::PressDirection, ccfg, [&](const Eigen::Vector3d& d) {
    return (d - a).cwiseProduct(w.cwiseSqrt()).squaredNorm();
  });

  OptimizerState s = make_press_direction_optimizer({0.2, -0.4, 0.8}, opt_config());
  const Eigen::Vector3d before = s.decision;
  const ProbeTrace trace = optimize_step(plant, s, ccfg);

  const Eigen::Vector3d analytic = 2.0 * w.cwiseProduct(before - a);
  EXPECT_LT((trace.gradient - analytic).norm(), 1e-9);
  EXPECT_EQ(trace.decision_before, before);
  EXPECT_EQ(trace.decision_after, s.decision);
  EXPECT_EQ(s.schedules_run, 1);
}

// After a schedule the gripper sits exactly where one unperturbed cycle
// would have put it, so probing is invisible to the outer motion.
TEST(OptimizeStep, ProbingIsKinematicallyNeutralPressDirection) {
  const ControllerConfig ccfg = ctl_config(Scenario::Contact);
  AnalyticPlant plant(DecisionMode::PressDirection, ccfg,
                      [](const Eigen::Vector3d& d) { return d.squaredNorm(); });
  OptimizerState s = make_press_direction_optimizer({0.3, 0.4, -0.7}, opt_config());
  testutil::SplitMix64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d target = rng.vec3(-1.0, 1.0);
    plant.loss_ = [target](const Eigen::Vector3d& d) { return (d - target).squaredNorm(); };
    const Eigen::Vector3d pos_before = plant.gripper_position();
    const Eigen::Vector3d decision_before = s.decision;
    optimize_step(plant, s, ccfg);
    const Eigen::Vector3d nominal = pos_before + ccfg.v0_mm_s * decision_before * kCycleS;
    ASSERT_LT((plant.gripper_position() - nominal).norm(), 1e-9) << "schedule " << i;
  }
}

TEST(OptimizeStep, ProbingIsKinematicallyNeutralRotationRate) {
  const ControllerConfig ccfg = ctl_config(Scenario::InAir);
  AnalyticPlant plant(DecisionMode::RotationRate, ccfg,
                      [](const Eigen::Vector3d& d) { return d.squaredNorm(); });
  OptimizerConfig ocfg = opt_config();
  ocfg.alpha_rpy = 0.3;
  OptimizerState s = make_rotation_rate_optimizer({0.01, -0.02, 0.015}, ocfg);
  testutil::SplitMix64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d target = rng.vec3(-0.04, 0.04);
    plant.loss_ = [target](const Eigen::Vector3d& d) { return (d - target).squaredNorm(); };
    const Eigen::Matrix3d before = plant.gripper_orientation();
    const Eigen::Vector3d decision_before = s.decision;
    optimize_step(plant, s, ccfg);
    const Eigen::Vector3d nominal = cap_rpy_increment(decision_before, ccfg.rotation_cap_rad());
    const Eigen::Matrix3d expected = rpy_to_rotation(RpyVector::from_vector(nominal)).matrix() * before;
    ASSERT_LT(geodesic_angle(plant.gripper_orientation(), expected), 1e-9) << "schedule " << i;
  }
}

// Gradient descent on a planted quadratic drives the rotation rate to the
// planted optimum.
TEST(OptimizeStep, ConvergesToPlantedRotationRate) {
  const ControllerConfig ccfg = ctl_config(Scenario::InAir);
  const Eigen::Vector3d target(0.012, -0.02, 0.008);  // well inside the cap
  AnalyticPlant plant(DecisionMode::RotationRate, ccfg,
                      [&](const Eigen::Vector3d& d) { return (d - target).squaredNorm(); });
  OptimizerConfig ocfg = opt_config();
  ocfg.alpha_rpy = 0.25;
  OptimizerState s = make_rotation_rate_optimizer(Eigen::Vector3d::Zero(), ocfg);
  for (int i = 0; i < 60; ++i) optimize_step(plant, s, ccfg);
  EXPECT_LT((s.decision - target).norm(), 1e-8);
}

// On a linear loss the press direction swings to the steepest-descent axis.
TEST(OptimizeStep, ConvergesToPlantedPressDirection) {
  const ControllerConfig ccfg = ctl_config(Scenario::Contact);
  const Eigen::Vector3d k = Eigen::Vector3d(0.3, -0.2, 0.93).normalized();
  AnalyticPlant plant(DecisionMode::PressDirection, ccfg,
                      [&](const Eigen::Vector3d& d) { return -k.dot(d); });
  OptimizerConfig ocfg = opt_config();
  ocfg.alpha = 0.5;
  OptimizerState s = make_press_direction_optimizer(Eigen::Vector3d::UnitX(), ocfg);
  for (int i = 0; i < 80; ++i) optimize_step(plant, s, ccfg);
  EXPECT_GT(s.decision.dot(k), 1.0 - 1e-9);
}

TEST(OptimizeStep, TwoRisingSchedulesHalveAlpha) {
  const ControllerConfig ccfg = ctl_config(Scenario::Contact);
  OptimizerState s = make_press_direction_optimizer(Eigen::Vector3d::UnitX(), opt_config());
  const double a0 = s.alpha;

  ScriptedPlant rising({1.0, 2.0, 3.0});
  optimize_step(rising, s, ccfg);
  EXPECT_DOUBLE_EQ(s.alpha, a0);
  optimize_step(rising, s, ccfg);
  EXPECT_DOUBLE_EQ(s.alpha, a0);  // one rise is tolerated
  optimize_step(rising, s, ccfg);
  EXPECT_DOUBLE_EQ(s.alpha, a0 / 2.0);

  OptimizerState s2 = make_press_direction_optimizer(Eigen::Vector3d::UnitX(), opt_config());
  ScriptedPlant sawtooth({1.0, 2.0, 1.0, 2.0});
  for (int i = 0; i < 4; ++i) optimize_step(sawtooth, s2, ccfg);
  EXPECT_DOUBLE_EQ(s2.alpha, a0);  // alternating rises never build a streak
}

TEST(OptimizeStep, NonFiniteLossAbortsTheSchedule) {
  const ControllerConfig ccfg = ctl_config(Scenario::Contact);
  AnalyticPlant plant(DecisionMode::PressDirection, ccfg,
                      [](const Eigen::Vector3d&) { return std::numeric_limits<double>::quiet_NaN(); });
  OptimizerState s = make_press_direction_optimizer(Eigen::Vector3d::UnitX(), opt_config());
  EXPECT_THROW(optimize_step(plant, s, ccfg), ProbeAborted);
  EXPECT_EQ(s.phase, ProbePhase::Normal);
}
