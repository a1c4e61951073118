#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pivot/command.hpp"
#include "pivot/geometry.hpp"
#include "pivot/tactile.hpp"

namespace pivot {

// Units throughout: mm, N, s, kg (so torque is N*mm, inertia kg*mm^2, and
// linear acceleration is 1000*F/m in mm/s^2).

class SimDiverged : public std::runtime_error {
 public:
  explicit SimDiverged(const std::string& what) : std::runtime_error(what) {}
};

class ObjectDropped : public std::runtime_error {
 public:
  explicit ObjectDropped(const std::string& what) : std::runtime_error(what) {}
};

// -------------------------------------------------------------------------
// Configuration
// -------------------------------------------------------------------------

struct ObjectParams {
  double mass_kg = 0.10;
  Eigen::Vector3d half_extents_mm{30.0, 10.0, 12.0};  // box geometry, body frame
  Eigen::Vector3d com_offset_mm{3.0, 0.0, 0.0};       // centre of mass, body frame
  // Internal mass shift ("sloshing" contents): the centre of mass moves
  // sinusoidally along body X with this amplitude and period.
  double com_slosh_amp_mm = 0.0;
  double com_slosh_period_s = 3.0;
  double mu = 0.8;                  // static friction against the finger pads
  double mu_kinetic_ratio = 0.85;   // kinetic/static friction ratio
  double mu_texture = 0.0;          // per-pin friction variation fraction
  double pad_curvature_mm = 0.0;    // >0 bulges the grasped faces (radius)
  double pad_stiffness_scale = 1.0; // <1 for compliant objects
};

struct PatchParams {
  double half_extent_mm = 10.0;
  int pins_per_side = 10;
  double k_tangent = 0.2;   // N/mm per pin
  double k_normal = 0.6;    // N/mm per pin
  // Viscoplastic slip regularisation: once a pin exceeds its friction cap,
  // it slides with rate (excess deflection)/slip_time.  The resulting
  // rate-dependent overshoot is what makes macroscopic slip visible in the
  // marker displacements instead of saturating at the static cap.
  double slip_time_s = 0.05;
};

struct EnvBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half = Eigen::Vector3d::Zero();
};

struct EnvironmentModel {
  bool has_floor = false;
  double floor_z_mm = 0.0;
  std::vector<EnvBox> boxes;
  double mu = 0.8;
  double k_contact = 5.0;       // N/mm penalty stiffness per sample point
  double damping = 0.02;        // N/(mm/s) normal-rate damping
  // Friction uses the same anchored-spring viscoplasticity as the finger
  // pads: a contact point sticks to where it first touched and the anchor
  // slides once the tangential spring force exceeds the friction cone.
  double k_tangent = 2.0;       // N/mm per contact point
  double slip_time_s = 0.05;
};

// Smooth scripted wrench applied at the object's centre of mass.
struct DisturbanceScript {
  double force_n = 0.0;
  double torque_nmm = 0.0;
  double freq_hz = 0.4;
  double phase = 0.0;
  Eigen::Vector3d dir_a{1.0, 0.0, 0.0};
  Eigen::Vector3d dir_b{0.0, 0.0, 1.0};

  Eigen::Vector3d force_at(double t) const;
  Eigen::Vector3d torque_at(double t) const;
};

struct SimParams {
  // The substep must resolve the stiffest pad/environment springs against
  // the lightest object; 0.5 ms keeps the integration convergent for the
  // whole object suite (verified against 0.25 ms).
  double dt_s = 5e-4;
  int substeps_per_cycle = 66;  // control cycle = dt_s * substeps_per_cycle
  double gravity_n_per_kg = 9.81;
  double lin_damping = 0.05;    // N/(mm/s) on object translation
  double ang_damping = 8.0;     // N*mm/(rad/s) on object rotation
  // Divergence guards; exceeding either aborts the episode.
  double max_speed_mm_s = 3000.0;
  double max_omega_rad_s = 300.0;
  // Sanity limits on commands (violations are programming errors).
  double cmd_speed_limit = 60.0;
  double cmd_rpy_limit = 0.2;   // rad per cycle, per component

  double cycle_s() const { return dt_s * substeps_per_cycle; }
};

struct GripperInit {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // hand origin, ground
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  double grip_force_n = 8.0;
};

struct SimWorldConfig {
  ObjectParams object;
  PatchParams patch;
  EnvironmentModel environment;
  DisturbanceScript disturbance;
  SimParams params;
  GripperInit gripper;
  Eigen::Matrix3d object_orientation = Eigen::Matrix3d::Identity();
  // Body-frame point clamped between the two patch centres at start.
  Eigen::Vector3d grasp_point_body{-20.0, 0.0, 0.0};
  std::uint64_t seed = 0;  // texture pattern stream
};

struct GripperState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  double grip_force_n = 0.0;
};

struct ObjectState {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();  // body origin, ground
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d lin_vel = Eigen::Vector3d::Zero();  // mm/s
  Eigen::Vector3d ang_vel = Eigen::Vector3d::Zero();  // rad/s
};

// -------------------------------------------------------------------------
// SimWorld
// -------------------------------------------------------------------------
//
// A two-fingered parallel gripper holding one rigid object, optionally in
// contact with a floor and fixed boxes.  Each finger pad is a grid of
// elasto-plastic "pins": tangential and axial springs whose anchors ride
// with the gripper and whose far ends stick to object material points,
// sliding (with viscoplastic regularisation) when the local friction cap
// is exceeded.  The pin deflections double as the simulated tactile marker
// displacements.
//
// Marker displacements are reported relative to the commanded-grip rest
// state: the uniform squeeze component (grip_force / pin count) is
// subtracted from the normal channel, the way a marker tracker zeroed
// after grasping would report them.
//
// Fingers close along hand Y.  The left pad (at +Y) has sensor frame
// columns x->x, y->+z, z->-y in hand coordinates; the right pad mirrors
// it, so both sensor Z axes point into the object.
//
// The simulation is fully deterministic: no hidden RNG draws at step time,
// fixed iteration order, fixed substep count per cycle.
class SimWorld {
 public:
  explicit SimWorld(const SimWorldConfig& cfg);

  // Advances one control cycle.  Throws SimDiverged / ObjectDropped.
  TactileFrame step(const GripperCommand& cmd);

  const GripperState& gripper() const { return gripper_; }
  const ObjectState& object_state() const { return object_; }

  Rotation hand_to_ground() const;
  Rotation sensor_to_hand(Finger f) const;
  static Eigen::Matrix3d sensor_to_hand_matrix(Finger f);

  double orientation_error_deg(const Eigen::Matrix3d& target) const;

  // Path length of macroscopic tangential sliding at a pad (mm).  Uses the
  // per-substep mean slide vector over the pad's pins, so pure in-hand
  // pivoting (whose slide vectors cancel) does not count as sliding.
  double accumulated_slip_mm(Finger f) const;
  double max_accumulated_slip_mm() const;

  double finger_normal_force_n(Finger f) const;
  double sim_time_s() const { return time_; }
  long tick() const { return tick_; }
  double cycle_s() const { return cfg_.params.cycle_s(); }

  // Kinetic + gravitational + stored elastic energy, joules.
  double energy_j() const;

  const SimWorldConfig& config() const { return cfg_; }

 private:
  struct Pin {
    Eigen::Vector2d anchor = Eigen::Vector2d::Zero();   // patch plane, mm
    Eigen::Vector3d attach_body = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal_c = Eigen::Vector3d::UnitZ();
    double mu_scale = 1.0;
    bool sliding = false;
    double normal_force = 0.0;  // latest, N
  };

  struct FingerPatch {
    Finger id = Finger::Left;
    Eigen::Vector3d center_h = Eigen::Vector3d::Zero();
    Eigen::Matrix3d r_hc = Eigen::Matrix3d::Identity();
    std::vector<Pin> pins;
    double accumulated_slip = 0.0;
    double total_normal = 0.0;
    Eigen::Vector2d mean_offset = Eigen::Vector2d::Zero();  // attachments vs anchors
  };

  void build_patches();
  Eigen::Vector3d com_body(double t) const;
  void substep(const Eigen::Vector3d& v_cmd, const Eigen::Matrix3d& dr_sub, double t, double dt);
  void apply_pin_forces(double t, Eigen::Vector3d& force, Eigen::Vector3d& torque, const Eigen::Vector3d& com_w);
  void apply_env_forces(Eigen::Vector3d& force, Eigen::Vector3d& torque, const Eigen::Vector3d& com_w,
                        double dt);
  void update_pin_plasticity(double dt);
  void check_health();
  MarkerField make_marker_field(const FingerPatch& patch) const;

  // Sticking state of one environment sample point.
  struct EnvContact {
    bool active = false;
    Eigen::Vector3d anchor = Eigen::Vector3d::Zero();  // world frame
  };

  SimWorldConfig cfg_;
  GripperState gripper_;
  ObjectState object_;
  FingerPatch left_;
  FingerPatch right_;
  std::vector<Eigen::Vector3d> env_points_body_;
  std::vector<EnvContact> env_contacts_;
  Eigen::Matrix3d inertia_body_;  // about COM, kg*mm^2
  double time_ = 0.0;
  long tick_ = 0;
};

// -------------------------------------------------------------------------
// Object zoo
// -------------------------------------------------------------------------

// A named object with per-object pad parameters, used by the experiment
// harness to assemble scenarios.
struct ObjectTemplate {
  std::string id;
  ObjectParams object;
};

// The five-object benchmark suite: a compliant block, a container with
// shifting contents, a rough narrow stick, a slick curved shell and a
// heavy asymmetric body.
std::vector<ObjectTemplate> make_object_suite();

}  // namespace pivot
