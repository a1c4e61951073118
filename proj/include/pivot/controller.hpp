#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

#include "pivot/command.hpp"
#include "pivot/geometry.hpp"
#include "pivot/tactile.hpp"

namespace pivot {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Scenario : std::uint8_t { Contact, InAir };

// Which of the superimposed reactions are active.  The experiment harness
// switches these off one at a time for the ablation groups.
struct ActionToggles {
  bool task = true;
  bool constraint = true;
  bool coordinating = true;
  bool online_adjust = true;
};

struct ControllerConfig {
  Scenario scenario = Scenario::Contact;
  ActionToggles enabled;

  double v0_mm_s = 6.0;       // translation speed used by both motion actions
  double delta_f_n = 0.5;     // grip force step
  double d_lim_mm = 0.4;      // translational slip threshold on ||s1||
  double f_init_n = 10.0;
  double f_min_n = 1.2;
  double f_max_n = 40.0;
  double rotation_cap_deg = 3.0;  // per-cycle gripper rotation cap
  double rotation_cap_rad() const { return deg2rad(rotation_cap_deg); }
  // Sign convention for the rotational slip channel: +1 reads a positive
  // hand-axis spin of the object as positive sigma; flip to -1 when the
  // task's beneficial rotation is the opposite spin.
  int s2_sense = -1;
  double tangent_floor_mm = kTangentFloorMm;

  void validate() const;  // throws ConfigError
};

// Per-cycle controller inputs derived from one tactile frame.
struct ControlInputs {
  SlipMetrics left;
  SlipMetrics right;
  Eigen::Vector3d left_normal = Eigen::Vector3d::UnitZ();   // sensor frame
  Eigen::Vector3d right_normal = Eigen::Vector3d::UnitZ();  // sensor frame
  Eigen::Matrix3d hand_to_ground = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d left_sensor_to_hand = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d right_sensor_to_hand = Eigen::Matrix3d::Identity();
  double grip_force_prev_n = 0.0;
};

ControlInputs make_control_inputs(const TactileFrame& frame, const Rotation& hand_to_ground,
                                  const Rotation& left_sensor_to_hand, const Rotation& right_sensor_to_hand,
                                  double grip_force_prev_n);

// ---------------------------------------------------------------------
// Individual actions
// ---------------------------------------------------------------------

// Contact task motion: press along the decision direction at v0.
Eigen::Vector3d task_action_contact(const Eigen::Vector3d& task_direction, const ControllerConfig& cfg);

// In-air task reaction: release grip while the pads are quiet, floored at
// f_min.  Returns the new force.
double task_action_air(const SlipMetrics& signal, double force_n, const ControllerConfig& cfg);

// Grip reaction to the slip threshold: tighten when ||s1|| exceeds d_lim,
// clamped to [f_min, f_max].  Never loosens.
double constraint_action(const SlipMetrics& signal, double force_n, const ControllerConfig& cfg);

// Contact coordinating motion: follow the measured tangential slip
// direction, mapped from the signal finger's sensor frame to ground.
// Returns nothing when the tangential component is below the floor.
std::optional<Eigen::Vector3d> coordinating_action_contact(const SlipMetrics& signal,
                                                           const Eigen::Vector3d& contact_normal,
                                                           const Eigen::Matrix3d& hand_to_ground,
                                                           const Eigen::Matrix3d& sensor_to_hand,
                                                           const ControllerConfig& cfg);

// In-air coordinating rotation: the decision interpreted as a per-cycle
// RPY increment, scaled down so the induced rotation angle stays within
// the configured cap.
RpyVector coordinating_action_air(const Eigen::Vector3d& rpy_rate, const ControllerConfig& cfg);

// Helper shared with the optimiser: rescales an RPY-increment vector so
// its induced rotation angle is at most `cap_rad`.
Eigen::Vector3d cap_rpy_increment(const Eigen::Vector3d& rpy, double cap_rad);

// Rotational slip read in a finger-independent orientation: the raw s2 of
// the two mirrored pads have opposite signs for the same physical object
// spin, so s2 is first aligned to the hand grasp axis and then the
// configured sense is applied.
double oriented_sigma(const SlipMetrics& metrics, const Eigen::Matrix3d& sensor_to_hand, int s2_sense);

// ---------------------------------------------------------------------
// Full cycle
// ---------------------------------------------------------------------

// Superimposes the enabled actions into one gripper command.  `decision`
// is the online-adjusted variable: the press direction in the contact
// scenario, the RPY rotation rate in-air.
GripperCommand control_cycle(const ControlInputs& in, const Eigen::Vector3d& decision,
                             const ControllerConfig& cfg);

}  // namespace pivot
