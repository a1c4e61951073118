#include "pivot/controller.hpp"

#include <cmath>

namespace pivot {

void ControllerConfig::validate() const {
  if (v0_mm_s <= 0.0) throw ConfigError("v0 must be positive");
  if (delta_f_n <= 0.0) throw ConfigError("force step must be positive");
  if (d_lim_mm <= 0.0) throw ConfigError("slip threshold must be positive");
  if (!(0.0 < f_min_n && f_min_n <= f_init_n && f_init_n <= f_max_n)) {
    throw ConfigError("force limits must satisfy 0 < f_min <= f_init <= f_max");
  }
  if (!(rotation_cap_deg > 0.0 && rotation_cap_deg <= 12.0)) {
    throw ConfigError("rotation cap must be in (0, 12] degrees");
  }
  if (s2_sense != 1 && s2_sense != -1) throw ConfigError("s2 sense must be +1 or -1");
  if (tangent_floor_mm < 0.0) throw ConfigError("tangent floor must be non-negative");
}

ControlInputs make_control_inputs(const TactileFrame& frame, const Rotation& hand_to_ground,
                                  const Rotation& left_sensor_to_hand, const Rotation& right_sensor_to_hand,
                                  double grip_force_prev_n) {
  ControlInputs in;
  in.left = slip_metrics(frame.left);
  in.right = slip_metrics(frame.right);
  in.left_normal = mean_normal(frame.left);
  in.right_normal = mean_normal(frame.right);
  in.hand_to_ground = hand_to_ground.matrix();
  in.left_sensor_to_hand = left_sensor_to_hand.matrix();
  in.right_sensor_to_hand = right_sensor_to_hand.matrix();
  in.grip_force_prev_n = grip_force_prev_n;
  return in;
}

Eigen::Vector3d task_action_contact(const Eigen::Vector3d& task_direction, const ControllerConfig& cfg) {
  const double n = task_direction.norm();
  if (n < 1e-12) return Eigen::Vector3d::Zero();
  return cfg.v0_mm_s * (task_direction / n);
}

double task_action_air(const SlipMetrics& signal, double force_n, const ControllerConfig& cfg) {
  if (signal.s1.norm() < cfg.d_lim_mm) {
    return std::max(force_n - cfg.delta_f_n, cfg.f_min_n);
  }
  return force_n;
}

double constraint_action(const SlipMetrics& signal, double force_n, const ControllerConfig& cfg) {
  if (signal.s1.norm() > cfg.d_lim_mm) {
    return std::clamp(force_n + cfg.delta_f_n, cfg.f_min_n, cfg.f_max_n);
  }
  return force_n;
}

std::optional<Eigen::Vector3d> coordinating_action_contact(const SlipMetrics& signal,
                                                           const Eigen::Vector3d& contact_normal,
                                                           const Eigen::Matrix3d& hand_to_ground,
                                                           const Eigen::Matrix3d& sensor_to_hand,
                                                           const ControllerConfig& cfg) {
  const auto e_tan = tangential_direction(signal, contact_normal, cfg.tangent_floor_mm);
  if (!e_tan) return std::nullopt;
  return cfg.v0_mm_s * (hand_to_ground * (sensor_to_hand * (*e_tan)));
}

Eigen::Vector3d cap_rpy_increment(const Eigen::Vector3d& rpy, double cap_rad) {
  // Cap on the geodesic angle the increment induces, not on the raw RPY
  // norm: shrink the rotation along its own axis and convert back.
  const Eigen::Matrix3d r = rpy_to_rotation(RpyVector::from_vector(rpy)).matrix();
  const Eigen::Vector3d w = log_so3(r);
  const double angle = w.norm();
  if (angle <= cap_rad) return rpy;
  return rotation_to_rpy(exp_so3(w * (cap_rad / angle))).as_vector();
}

RpyVector coordinating_action_air(const Eigen::Vector3d& rpy_rate, const ControllerConfig& cfg) {
  return RpyVector::from_vector(cap_rpy_increment(rpy_rate, cfg.rotation_cap_rad()));
}

double oriented_sigma(const SlipMetrics& metrics, const Eigen::Matrix3d& sensor_to_hand, int s2_sense) {
  // Sensor Z expressed in the hand frame, projected on the grasp axis:
  // -1 for the left pad, +1 for the right pad by construction.
  const double alignment = sensor_to_hand.col(2).dot(Eigen::Vector3d::UnitY()) >= 0.0 ? 1.0 : -1.0;
  return s2_sense * alignment * metrics.s2;
}

GripperCommand control_cycle(const ControlInputs& in, const Eigen::Vector3d& decision,
                             const ControllerConfig& cfg) {
  const SignalSelection sel = select_signal_finger(in.left, in.right);
  const bool left_is_signal = sel.finger == Finger::Left;
  const Eigen::Vector3d& normal = left_is_signal ? in.left_normal : in.right_normal;
  const Eigen::Matrix3d& sensor_to_hand = left_is_signal ? in.left_sensor_to_hand : in.right_sensor_to_hand;

  GripperCommand cmd;
  cmd.grip_force_n = in.grip_force_prev_n;

  if (cfg.scenario == Scenario::InAir && cfg.enabled.task) {
    cmd.grip_force_n = task_action_air(sel.metrics, cmd.grip_force_n, cfg);
  }
  if (cfg.enabled.constraint) {
    cmd.grip_force_n = constraint_action(sel.metrics, cmd.grip_force_n, cfg);
  }

  if (cfg.scenario == Scenario::Contact) {
    if (cfg.enabled.task) {
      cmd.linear_velocity += task_action_contact(decision, cfg);
    }
    if (cfg.enabled.coordinating) {
      const auto v = coordinating_action_contact(sel.metrics, normal, in.hand_to_ground, sensor_to_hand, cfg);
      if (v) cmd.linear_velocity += *v;
    }
  } else if (cfg.enabled.coordinating) {
    cmd.rotation = coordinating_action_air(decision, cfg);
  }
  return cmd;
}

}  // namespace pivot
