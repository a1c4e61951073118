#pragma once

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <stdexcept>

#include "pivot/controller.hpp"
#include "pivot/tactile.hpp"

namespace pivot {

class ProbeAborted : public std::runtime_error {
 public:
  explicit ProbeAborted(const std::string& what) : std::runtime_error(what) {}
};

struct OptimizerConfig {
  double alpha = 0.05;                  // step size, press-direction mode
  double alpha_rpy = 150.0;             // step size, rotation-rate mode
  double epsilon = 0.1;                 // probe perturbation, press-direction mode
  double epsilon_rpy = deg2rad(0.5);    // probe perturbation, rotation-rate mode
  double lambda0_mm = 0.8;              // rotational-slip sweet spot; the
                                        // episode layer defaults this to
                                        // twice the slip threshold
  int cadence_cycles = 8;               // normal cycles between probe schedules

  void validate() const;  // throws ConfigError
};

// What the optimiser's decision variable means.
enum class DecisionMode : std::uint8_t {
  PressDirection,  // unit press direction (contact scenario)
  RotationRate,    // per-cycle gripper RPY increment (in-air scenario)
};

enum class ProbePhase : std::uint8_t { Normal, Probing, Restoring };
enum class UpdateOutcome : std::uint8_t { Applied, SkippedDegenerate };

struct OptimizerState {
  DecisionMode mode = DecisionMode::PressDirection;
  Eigen::Vector3d decision = -Eigen::Vector3d::UnitZ();
  double alpha = 0.05;
  // Step-size halvings stop here.  During a long maneuver the optimum keeps
  // moving, so the step size must never decay below what tracking needs.
  double alpha_floor = 0.05 / 8.0;
  double epsilon = 0.1;
  ProbePhase phase = ProbePhase::Normal;
  Eigen::Vector3d last_gradient = Eigen::Vector3d::Zero();
  std::array<double, 6> last_losses{};
  double last_mean_loss = std::numeric_limits<double>::quiet_NaN();
  int loss_rise_streak = 0;
  UpdateOutcome last_update = UpdateOutcome::Applied;
  long schedules_run = 0;
};

OptimizerState make_press_direction_optimizer(const Eigen::Vector3d& initial_direction,
                                              const OptimizerConfig& cfg);
OptimizerState make_rotation_rate_optimizer(const Eigen::Vector3d& initial_rate, const OptimizerConfig& cfg);

// -------------------------------------------------------------------------
// Loss
// -------------------------------------------------------------------------

// Rotational-slip term: quadratic penalty for adverse spin (sigma < 0),
// inverted-parabola reward peaking at sigma = lambda0 for beneficial spin.
// Continuous at 0; minimum value -lambda0^2 at sigma = lambda0.
double rotational_loss_term(double sigma, double lambda0);

// Full per-cycle loss: ||s1||^2 plus the rotational term, where sigma is
// s2_sense times the (orientation-aligned) s2 value in `metrics`.
double cycle_loss(const SlipMetrics& metrics, double lambda0, int s2_sense);

// Central differences from a probe schedule's six losses, ordered
// {+e0, -e0, +e1, -e1, +e2, -e2}.
Eigen::Vector3d finite_difference_gradient(const std::array<double, 6>& losses, double epsilon);

// Applies one gradient step to the decision variable.  PressDirection
// results are renormalised to unit length; a candidate of (near) zero
// length cannot be normalised, so the update is skipped and the step size
// halved instead.  RotationRate results are rescaled to the rotation cap.
UpdateOutcome apply_update(OptimizerState& state, const Eigen::Vector3d& gradient, double rotation_cap_rad);

// -------------------------------------------------------------------------
// Probe plant
// -------------------------------------------------------------------------

// The physical (or faked, in tests) system a probe schedule runs against.
// probe_cycle runs one control cycle with the decision variable overridden
// by `probe` (force held, other optimiser-driven actions suppressed) and
// returns the loss measured from that cycle's tactile frame.
// restore_cycle runs one cycle of pure repositioning: `motion` is a ground
// velocity (mm/s) in PressDirection mode, an RPY increment (rad) in
// RotationRate mode.
class ProbePlant {
 public:
  virtual ~ProbePlant() = default;
  virtual double probe_cycle(const Eigen::Vector3d& probe) = 0;
  virtual void restore_cycle(const Eigen::Vector3d& motion) = 0;
  virtual Eigen::Vector3d gripper_position() const = 0;
  virtual Eigen::Matrix3d gripper_orientation() const = 0;
  virtual double cycle_s() const = 0;
};

struct ProbeTrace {
  Eigen::Vector3d decision_before = Eigen::Vector3d::Zero();
  Eigen::Vector3d decision_after = Eigen::Vector3d::Zero();
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  std::array<double, 6> losses{};
  double mean_loss = 0.0;
  int cycles_used = 0;
  UpdateOutcome outcome = UpdateOutcome::Applied;
};

// Runs one full probe schedule against the plant: six perturbed cycles
// (+/- epsilon on each decision axis), followed by restoration cycles that
// leave the gripper pose exactly where one unperturbed action cycle would
// have -- so the schedule is kinematically equivalent to a single nominal
// cycle.  Then applies the gradient step, with the step size halved after
// two consecutive schedules of rising mean loss.
ProbeTrace optimize_step(ProbePlant& plant, OptimizerState& state, const ControllerConfig& ccfg);

}  // namespace pivot
