// End-to-end acceptance checks.  Each test prints a single PASS/FAIL line
// so the suite doubles as a release checklist; the assertions underneath
// give the details when something regresses.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pivot/ablation.hpp"
#include "pivot/config.hpp"
#include "pivot/demo.hpp"
#include "pivot/episode.hpp"
#include "pivot/optimizer.hpp"
#include "pivot/tactile.hpp"
#include "test_rng.hpp"

using namespace pivot;

namespace {

void report(int number, const char* name, bool ok) {
  std::cout << "[acceptance] " << number << ". " << name << ": " << (ok ? "PASS" : "FAIL") << std::endl;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Independent transcription of the slip-metric definitions, kept free of
// the library's helper functions.
void brute_force_metrics(const MarkerField& f, Eigen::Vector3d* s1, double* s2) {
  const std::size_t n = f.size();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal_sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d disp_sum = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    centroid += f.ref_positions[i];
    normal_sum += f.normals[i];
    disp_sum += f.displacements[i];
  }
  centroid /= double(n);
  const Eigen::Vector3d n_hat = normal_sum / normal_sum.norm();
  *s1 = disp_sum / double(n);

  double moment = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d arm = centroid - f.ref_positions[i];
    if (arm.norm() < 1e-9) continue;
    moment += (arm / arm.norm()).cross(f.displacements[i]).dot(n_hat);
    ++counted;
  }
  *s2 = counted > 0 ? moment / double(counted) : 0.0;
}

// Minimal exact-kinematics plant for probe-schedule checks: probe cycles
// move the pose the way the episode runner would, restore cycles apply the
// commanded motion verbatim, and the loss is an analytic function.
class KinematicPlant : public ProbePlant {
 public:
  KinematicPlant(DecisionMode mode, const ControllerConfig& ccfg) : mode_(mode), ccfg_(ccfg) {}

  double probe_cycle(const Eigen::Vector3d& probe) override {
    if (mode_ == DecisionMode::PressDirection) {
      position_ += task_action_contact(probe, ccfg_) * kCycle;
    } else {
      orientation_ = rpy_to_rotation(coordinating_action_air(probe, ccfg_)).matrix() * orientation_;
    }
    return loss(probe);
  }
  void restore_cycle(const Eigen::Vector3d& motion) override {
    if (mode_ == DecisionMode::PressDirection) {
      position_ += motion * kCycle;
    } else {
      orientation_ = rpy_to_rotation(RpyVector::from_vector(motion)).matrix() * orientation_;
    }
  }
  Eigen::Vector3d gripper_position() const override { return position_; }
  Eigen::Matrix3d gripper_orientation() const override { return orientation_; }
  double cycle_s() const override { return kCycle; }

  std::function<double(const Eigen::Vector3d&)> loss = [](const Eigen::Vector3d& d) {
    return d.squaredNorm();
  };

 private:
  static constexpr double kCycle = 0.033;
  DecisionMode mode_;
  ControllerConfig ccfg_;
  Eigen::Vector3d position_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation_ = Eigen::Matrix3d::Identity();
};

// The full experimental matrix is expensive, so it is run once (twice, for
// the determinism check) and shared between the tests that inspect it.
struct MatrixRuns {
  MatrixResult first;
  MatrixResult second;
  double first_run_s = 0.0;
};

const MatrixRuns& matrix_runs() {
  static const MatrixRuns runs = [] {
    MatrixRuns r;
    const auto t0 = std::chrono::steady_clock::now();
    r.first = run_matrix(MatrixSpec::full());
    r.first_run_s = seconds_since(t0);
    r.second = run_matrix(MatrixSpec::full());
    return r;
  }();
  return runs;
}

std::string csv_string(const MatrixResult& result) {
  std::ostringstream out;
  result.write_csv(out);
  return out.str();
}

bool has_line(const std::string& text, const std::string& wanted) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line == wanted) return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------
// 1. Slip metrics agree with a brute-force transcription of their
//    definitions on 1000 random marker fields.
// ---------------------------------------------------------------------

TEST(Acceptance, TranslationalAndRotationalSlipMatchBruteForce) {
  const auto t0 = std::chrono::steady_clock::now();
  testutil::SplitMix64 rng(1001);
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const std::size_t n = 3 + rng.next() % 398;
    MarkerField f;
    f.finger = (trial % 2 == 0) ? Finger::Left : Finger::Right;
    for (std::size_t i = 0; i < n; ++i) {
      f.ref_positions.push_back(rng.vec3(-10.0, 10.0));
      f.displacements.push_back(rng.vec3(-0.5, 0.5));
      Eigen::Vector3d nrm = rng.unit_vec3();
      nrm.z() = std::abs(nrm.z()) + 0.3;  // keep the mean normal well-defined
      f.normals.push_back(nrm.normalized());
    }
    Eigen::Vector3d s1_oracle;
    double s2_oracle = 0.0;
    brute_force_metrics(f, &s1_oracle, &s2_oracle);
    const SlipMetrics m = slip_metrics(f);
    const double tol1 = 1e-12 * std::max(1.0, s1_oracle.norm());
    const double tol2 = 1e-12 * std::max(1.0, std::abs(s2_oracle));
    ok = (m.s1 - s1_oracle).norm() <= tol1 && std::abs(m.s2 - s2_oracle) <= tol2;
    EXPECT_TRUE(ok) << "trial " << trial << " n=" << n;
  }
  const bool fast_enough = seconds_since(t0) < 5.0;
  EXPECT_TRUE(fast_enough);
  ok = ok && fast_enough;
  report(1, "slip metrics vs brute force (1000 random fields)", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 2. The canonical rotation pattern: four markers on a 5 mm square spun by
//    0.01 rad read s2 = +0.0500 with zero mean displacement.
// ---------------------------------------------------------------------

TEST(Acceptance, PureSpinReadsAsPureRotationalSlip) {
  const double theta = 0.01;
  MarkerField f;
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  for (const Eigen::Vector3d& p : {Eigen::Vector3d(5, 0, 0), Eigen::Vector3d(-5, 0, 0),
                                   Eigen::Vector3d(0, 5, 0), Eigen::Vector3d(0, -5, 0)}) {
    f.ref_positions.push_back(p);
    f.displacements.push_back(theta * z.cross(Eigen::Vector3d::Zero() - p));
    f.normals.push_back(z);
  }
  const SlipMetrics m = slip_metrics(f);
  const bool ok = std::abs(m.s2 - 0.05) <= 1e-9 && m.s1.cwiseAbs().maxCoeff() <= 1e-12;
  EXPECT_NEAR(m.s2, 0.05, 1e-9);
  EXPECT_LE(m.s1.cwiseAbs().maxCoeff(), 1e-12);
  report(2, "pure 0.01 rad spin reads s2 = +0.0500, s1 = 0", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 3. The finite-difference gradient is exact on quadratics and second-order
//    accurate (error ratio ~4 per epsilon halving) on quartics.
// ---------------------------------------------------------------------

TEST(Acceptance, GradientEstimateIsSecondOrderAccurate) {
  bool ok = true;

  const Eigen::Vector3d a(0.1, 0.3, -0.5);
  const Eigen::Vector3d w(1.5, 0.7, 2.2);
  testutil::SplitMix64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d d = rng.vec3(-1.0, 1.0);
    const double eps = rng.uniform(0.01, 0.3);
    std::array<double, 6> losses{};
    for (int m = 0; m < 3; ++m) {
      Eigen::Vector3d p = d, q = d;
      p[m] += eps;
      q[m] -= eps;
      losses[2 * m] = (p - a).cwiseProduct(w.cwiseSqrt()).squaredNorm();
      losses[2 * m + 1] = (q - a).cwiseProduct(w.cwiseSqrt()).squaredNorm();
    }
    const Eigen::Vector3d analytic = 2.0 * w.cwiseProduct(d - a);
    const double err = (finite_difference_gradient(losses, eps) - analytic).norm();
    ok = ok && err < 1e-9;
    EXPECT_LT(err, 1e-9) << "trial " << trial;
  }

  const Eigen::Vector3d d(1.1, 0.8, -0.9);
  const auto quartic_error = [&](double eps) {
    std::array<double, 6> losses{};
    for (int m = 0; m < 3; ++m) {
      Eigen::Vector3d p = d, q = d;
      p[m] += eps;
      q[m] -= eps;
      losses[2 * m] = (p - a).array().pow(4).sum();
      losses[2 * m + 1] = (q - a).array().pow(4).sum();
    }
    const Eigen::Vector3d analytic = 4.0 * (d - a).array().pow(3).matrix();
    return (finite_difference_gradient(losses, eps) - analytic).norm();
  };
  double eps = 0.2;
  for (int halving = 0; halving < 3; ++halving) {
    const double ratio = quartic_error(eps) / quartic_error(eps / 2.0);
    ok = ok && ratio >= 3.9 && ratio <= 4.1;
    EXPECT_GE(ratio, 3.9);
    EXPECT_LE(ratio, 4.1);
    eps /= 2.0;
  }

  report(3, "probe gradient exact on quadratics, O(eps^2) on quartics", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 4. A full probe schedule is kinematically invisible: afterwards the
//    gripper sits exactly where one nominal cycle would have put it.
// ---------------------------------------------------------------------

TEST(Acceptance, ProbeSchedulesRestoreThePoseExactly) {
  bool ok = true;
  testutil::SplitMix64 rng(41);

  ControllerConfig contact;
  contact.scenario = Scenario::Contact;
  KinematicPlant press(DecisionMode::PressDirection, contact);
  OptimizerState ps = make_press_direction_optimizer({0.3, 0.4, -0.7}, OptimizerConfig{});
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d target = rng.vec3(-1.0, 1.0);
    press.loss = [target](const Eigen::Vector3d& v) { return (v - target).squaredNorm(); };
    const Eigen::Vector3d pos0 = press.gripper_position();
    const Eigen::Vector3d dec0 = ps.decision;
    optimize_step(press, ps, contact);
    const Eigen::Vector3d nominal = pos0 + contact.v0_mm_s * dec0 * press.cycle_s();
    const double err = (press.gripper_position() - nominal).norm();
    ok = ok && err < 1e-9;
    EXPECT_LT(err, 1e-9) << "press schedule " << i;
  }

  ControllerConfig air;
  air.scenario = Scenario::InAir;
  KinematicPlant rot(DecisionMode::RotationRate, air);
  OptimizerConfig ocfg;
  ocfg.alpha_rpy = 0.3;
  OptimizerState rs = make_rotation_rate_optimizer({0.01, -0.02, 0.015}, ocfg);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d target = rng.vec3(-0.04, 0.04);
    rot.loss = [target](const Eigen::Vector3d& v) { return (v - target).squaredNorm(); };
    const Eigen::Matrix3d before = rot.gripper_orientation();
    const Eigen::Vector3d dec0 = rs.decision;
    optimize_step(rot, rs, air);
    const Eigen::Vector3d nominal = cap_rpy_increment(dec0, air.rotation_cap_rad());
    const Eigen::Matrix3d expected = rpy_to_rotation(RpyVector::from_vector(nominal)).matrix() * before;
    const double err = geodesic_angle(rot.gripper_orientation(), expected);
    ok = ok && err < 1e-9;
    EXPECT_LT(err, 1e-9) << "rotation schedule " << i;
  }

  report(4, "probe-and-restore leaves the pose on the nominal trajectory", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 5. The rotational-slip loss term is continuous at zero and attains its
//    minimum -lambda0^2 exactly at the sweet spot.
// ---------------------------------------------------------------------

TEST(Acceptance, RotationalLossShape) {
  bool ok = true;
  for (double lambda0 : {0.5, 1.0, 2.0}) {
    const double h = 1e-8;
    const double jump = std::abs(rotational_loss_term(h, lambda0) - rotational_loss_term(-h, lambda0));
    ok = ok && jump <= 3.0 * lambda0 * h && rotational_loss_term(0.0, lambda0) == 0.0;
    EXPECT_LE(jump, 3.0 * lambda0 * h);

    ok = ok && rotational_loss_term(lambda0, lambda0) == -lambda0 * lambda0;
    EXPECT_DOUBLE_EQ(rotational_loss_term(lambda0, lambda0), -lambda0 * lambda0);
    for (double sigma = -3.0; sigma <= 3.0; sigma += 0.005) {
      if (rotational_loss_term(sigma, lambda0) < -lambda0 * lambda0) {
        ok = false;
        ADD_FAILURE() << "loss below minimum at sigma=" << sigma << " lambda0=" << lambda0;
        break;
      }
    }
  }
  report(5, "rotational loss continuous at 0, minimum -lambda0^2 at lambda0", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 6. The entire experimental matrix is deterministic: two complete runs
//    produce byte-identical result tables.
// ---------------------------------------------------------------------

TEST(Acceptance, FullMatrixIsDeterministic) {
  const MatrixRuns& runs = matrix_runs();
  const std::string a = csv_string(runs.first);
  const std::string b = csv_string(runs.second);
  const bool ok = !a.empty() && a == b;
  EXPECT_EQ(a, b);
  report(6, "two full matrix runs are byte-identical", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 7. The ablation matrix reproduces the expected failure pattern within
//    the runtime budget.
// ---------------------------------------------------------------------

TEST(Acceptance, AblationMatrixReproducesTheFailurePattern) {
  const MatrixRuns& runs = matrix_runs();
  const MatrixResult& m = runs.first;
  bool ok = true;
  const auto check = [&ok](bool cond, const char* what) {
    ok = ok && cond;
    EXPECT_TRUE(cond) << what;
  };

  // Full controller: at most one non-success episode per scenario.
  check(m.count_label(Scenario::Contact, AblationGroup::ControlGroup, EpisodeLabel::Success) >= 14,
        "control group in contact");
  check(m.count_label(Scenario::InAir, AblationGroup::ControlGroup, EpisodeLabel::Success) >= 14,
        "control group in air");

  // Without the task action the motion never starts: stalls in contact.
  check(m.objects_with_label(Scenario::Contact, AblationGroup::NoTask, EpisodeLabel::Stall) >= 3,
        "task ablation stalls in contact");

  // Without the coordinating action the contact pivot slides away.
  check(m.objects_with_label(Scenario::Contact, AblationGroup::NoCoordinating, EpisodeLabel::Slip) >= 3,
        "coordinating ablation slips in contact");

  // Without online adjustment some episodes fail in both scenarios.
  check(m.count_label(Scenario::Contact, AblationGroup::NoOnlineAdjust, EpisodeLabel::Success) <= 14,
        "online-adjust ablation fails somewhere in contact");
  check(m.count_label(Scenario::InAir, AblationGroup::NoOnlineAdjust, EpisodeLabel::Success) <= 14,
        "online-adjust ablation fails somewhere in air");

  // The constraint action only matters under contact loads: dropping it
  // barely hurts in-air episodes but breaks contact ones.
  check(m.objects_failed(Scenario::InAir, AblationGroup::NoConstraint) <= 1,
        "constraint ablation mostly fine in air");
  check(m.objects_failed(Scenario::Contact, AblationGroup::NoConstraint) >= 2,
        "constraint ablation fails in contact");

  const bool fast_enough = runs.first_run_s < 600.0;
  EXPECT_TRUE(fast_enough) << runs.first_run_s << " s";
  ok = ok && fast_enough;

  std::ostringstream tables;
  m.write_tables(tables);
  std::cout << tables.str();

  report(7, "ablation matrix failure pattern and runtime", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 8. The shipped default config echoes back the documented safety numbers
//    exactly.
// ---------------------------------------------------------------------

TEST(Acceptance, DefaultConfigEchoesDocumentedThresholds) {
  const std::string path = std::string(PIVOT_REPO_DIR) + "/configs/defaults.cfg";
  const EpisodeConfig cfg = EpisodeConfig::from_config(KeyValueConfig::load_file(path));
  std::ostringstream echo;
  cfg.echo(echo);
  const std::string text = echo.str();

  bool ok = cfg.success_deg == 5.0 && cfg.slip_fail_mm == 20.0 && cfg.controller.rotation_cap_deg == 3.0;
  ok = ok && has_line(text, "episode.success_deg = 5");
  ok = ok && has_line(text, "episode.slip_fail_mm = 20");
  ok = ok && has_line(text, "controller.rotation_cap_deg = 3");
  EXPECT_TRUE(has_line(text, "episode.success_deg = 5"));
  EXPECT_TRUE(has_line(text, "episode.slip_fail_mm = 20"));
  EXPECT_TRUE(has_line(text, "controller.rotation_cap_deg = 3"));
  report(8, "default config echoes 5 deg / 20 mm / 3 deg-per-cycle exactly", ok);
  EXPECT_TRUE(ok);
}

// ---------------------------------------------------------------------
// 9. The two-phase demo (in-air roll, then contact pivot, under a scripted
//    disturbance) succeeds on at least 4 of 5 seeds.
// ---------------------------------------------------------------------

TEST(Acceptance, TwoPhaseDemoSucceedsAcrossSeeds) {
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DemoConfig cfg;
    cfg.seed = seed;
    const DemoOutcome out = run_two_phase_demo(cfg, nullptr);
    std::cout << "[acceptance]   demo seed " << seed << ": phase1=" << to_string(out.phase1.label)
              << " phase2=" << (out.phase2_run ? to_string(out.phase2.label) : "skipped") << "\n";
    if (out.success()) ++successes;
  }
  const bool ok = successes >= 4;
  report(9, "two-phase demo succeeds on >= 4 of 5 seeds", ok);
  EXPECT_TRUE(ok);
}
