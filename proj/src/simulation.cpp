#include "pivot/simulation.hpp"

#include <cmath>

#include "pivot/rng.hpp"

namespace pivot {

namespace {

constexpr double kPinEngaged = 1e-9;       // N
constexpr double kPatchEscapeFactor = 2.2; // times patch half extent

Eigen::Matrix3d box_inertia(double mass, const Eigen::Vector3d& half) {
  const double x2 = half.x() * half.x(), y2 = half.y() * half.y(), z2 = half.z() * half.z();
  return (mass / 3.0) * Eigen::Vector3d(y2 + z2, x2 + z2, x2 + y2).asDiagonal();
}

std::vector<Eigen::Vector3d> box_sample_points(const Eigen::Vector3d& h) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(26);
  for (int sx : {-1, 0, 1})
    for (int sy : {-1, 0, 1})
      for (int sz : {-1, 0, 1}) {
        if (sx == 0 && sy == 0 && sz == 0) continue;
        pts.emplace_back(sx * h.x(), sy * h.y(), sz * h.z());
      }
  return pts;
}

}  // namespace

Eigen::Vector3d DisturbanceScript::force_at(double t) const {
  if (force_n == 0.0) return Eigen::Vector3d::Zero();
  const double w = 2.0 * kPi * freq_hz;
  return force_n * (std::sin(w * t + phase) * dir_a + 0.6 * std::sin(0.37 * w * t + 1.7 * phase) * dir_b);
}

Eigen::Vector3d DisturbanceScript::torque_at(double t) const {
  if (torque_nmm == 0.0) return Eigen::Vector3d::Zero();
  const double w = 2.0 * kPi * freq_hz;
  return torque_nmm * std::sin(0.77 * w * t + 0.3 * phase) * dir_a.cross(dir_b).normalized();
}

Eigen::Matrix3d SimWorld::sensor_to_hand_matrix(Finger f) {
  Eigen::Matrix3d m;
  if (f == Finger::Left) {
    m << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  } else {
    m << 1, 0, 0, 0, 0, 1, 0, -1, 0;
  }
  return m;
}

SimWorld::SimWorld(const SimWorldConfig& cfg) : cfg_(cfg) {
  if (cfg_.object.mass_kg <= 0.0 || cfg_.patch.pins_per_side < 2 || cfg_.params.dt_s <= 0.0 ||
      cfg_.params.substeps_per_cycle < 1) {
    throw std::invalid_argument("simulation config has non-physical values");
  }
  gripper_.position = cfg_.gripper.position;
  gripper_.orientation = cfg_.gripper.orientation;
  gripper_.grip_force_n = cfg_.gripper.grip_force_n;

  object_.orientation = cfg_.object_orientation;
  object_.origin = gripper_.position - object_.orientation * cfg_.grasp_point_body;

  inertia_body_ = box_inertia(cfg_.object.mass_kg, cfg_.object.half_extents_mm);
  env_points_body_ = box_sample_points(cfg_.object.half_extents_mm);
  env_contacts_.resize(env_points_body_.size());

  build_patches();
}

void SimWorld::build_patches() {
  const int n = cfg_.patch.pins_per_side;
  const double h = cfg_.patch.half_extent_mm;
  const double spacing = 2.0 * h / (n - 1);
  const double gap = cfg_.object.half_extents_mm.y();
  const double rc = cfg_.object.pad_curvature_mm;

  for (FingerPatch* patch : {&left_, &right_}) {
    const bool is_left = patch == &left_;
    patch->id = is_left ? Finger::Left : Finger::Right;
    patch->center_h = Eigen::Vector3d(0.0, is_left ? gap : -gap, 0.0);
    patch->r_hc = sensor_to_hand_matrix(patch->id);
    patch->pins.resize(static_cast<std::size_t>(n) * n);

    const Eigen::Matrix3d r_cw = gripper_.orientation * patch->r_hc;
    const Eigen::Vector3d base_w = gripper_.position + gripper_.orientation * patch->center_h;

    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Pin& pin = patch->pins[static_cast<std::size_t>(i) * n + j];
        pin.anchor = Eigen::Vector2d(-h + i * spacing, -h + j * spacing);
        if (rc > 0.0) {
          const double r2 = pin.anchor.squaredNorm();
          pin.normal_c =
              Eigen::Vector3d(-pin.anchor.x(), -pin.anchor.y(), std::sqrt(std::max(rc * rc - r2, 0.25 * rc * rc)))
                  .normalized();
        } else {
          pin.normal_c = Eigen::Vector3d::UnitZ();
        }
        if (cfg_.object.mu_texture > 0.0) {
          const std::uint64_t key =
              mix_keys(cfg_.seed, is_left ? 1 : 2, static_cast<std::uint64_t>(i) * 64 + j);
          const double u = static_cast<double>(key >> 11) * 0x1.0p-53;
          pin.mu_scale = std::max(0.05, 1.0 + cfg_.object.mu_texture * (2.0 * u - 1.0));
        }
        // Attach the pin to the object material point currently under it.
        const Eigen::Vector3d anchor_w = base_w + r_cw * Eigen::Vector3d(pin.anchor.x(), pin.anchor.y(), 0.0);
        pin.attach_body = object_.orientation.transpose() * (anchor_w - object_.origin);
        pin.normal_force = gripper_.grip_force_n / patch->pins.size();
      }
    }
    patch->total_normal = gripper_.grip_force_n;
  }
}

Eigen::Vector3d SimWorld::com_body(double t) const {
  Eigen::Vector3d c = cfg_.object.com_offset_mm;
  if (cfg_.object.com_slosh_amp_mm != 0.0) {
    c.x() += cfg_.object.com_slosh_amp_mm * std::sin(2.0 * kPi * t / cfg_.object.com_slosh_period_s);
  }
  return c;
}

TactileFrame SimWorld::step(const GripperCommand& cmd) {
  if (!cmd.linear_velocity.allFinite() || !std::isfinite(cmd.grip_force_n)) {
    throw std::logic_error("non-finite gripper command");
  }
  if (cmd.linear_velocity.norm() > cfg_.params.cmd_speed_limit) {
    throw std::logic_error("commanded speed exceeds limit");
  }
  if (std::abs(cmd.rotation.about_z) > cfg_.params.cmd_rpy_limit ||
      std::abs(cmd.rotation.about_y) > cfg_.params.cmd_rpy_limit ||
      std::abs(cmd.rotation.about_x) > cfg_.params.cmd_rpy_limit) {
    throw std::logic_error("commanded rotation increment exceeds limit");
  }
  gripper_.grip_force_n = std::max(0.0, cmd.grip_force_n);

  const Eigen::Matrix3d cycle_rot = rpy_to_rotation(cmd.rotation).matrix();
  const Eigen::Matrix3d dr_sub = exp_so3(log_so3(cycle_rot) / cfg_.params.substeps_per_cycle);

  const double dt = cfg_.params.dt_s;
  for (int i = 0; i < cfg_.params.substeps_per_cycle; ++i) {
    substep(cmd.linear_velocity, dr_sub, time_ + i * dt, dt);
  }
  time_ += cfg_.params.substeps_per_cycle * dt;
  ++tick_;

  check_health();

  TactileFrame frame;
  frame.left = make_marker_field(left_);
  frame.right = make_marker_field(right_);
  frame.tick = tick_;
  frame.sim_time_s = time_;
  return frame;
}

void SimWorld::substep(const Eigen::Vector3d& v_cmd, const Eigen::Matrix3d& dr_sub, double t, double dt) {
  const Eigen::Vector3d com_w = object_.origin + object_.orientation * com_body(t);

  Eigen::Vector3d force(0.0, 0.0, -cfg_.object.mass_kg * cfg_.params.gravity_n_per_kg);
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();

  force += cfg_.disturbance.force_at(t);
  torque += cfg_.disturbance.torque_at(t);
  force -= cfg_.params.lin_damping * object_.lin_vel;
  torque -= cfg_.params.ang_damping * object_.ang_vel;

  apply_pin_forces(t, force, torque, com_w);
  apply_env_forces(force, torque, com_w, dt);

  // Semi-implicit Euler.  1000 converts N/kg to mm/s^2 and N*mm to
  // kg*mm^2/s^2.
  object_.lin_vel += dt * 1000.0 * force / cfg_.object.mass_kg;
  const Eigen::Matrix3d iw =
      object_.orientation * inertia_body_ * object_.orientation.transpose();
  const Eigen::Vector3d gyro = object_.ang_vel.cross(iw * object_.ang_vel);
  object_.ang_vel += dt * iw.ldlt().solve(1000.0 * torque - gyro);
  object_.origin += dt * object_.lin_vel;
  object_.orientation = orthonormalized(exp_so3(object_.ang_vel * dt) * object_.orientation);

  gripper_.position += dt * v_cmd;
  gripper_.orientation = orthonormalized(dr_sub * gripper_.orientation);

  update_pin_plasticity(dt);
}

void SimWorld::apply_pin_forces(double /*t*/, Eigen::Vector3d& force, Eigen::Vector3d& torque,
                                const Eigen::Vector3d& com_w) {
  const double k_t = cfg_.patch.k_tangent * cfg_.object.pad_stiffness_scale;
  const double k_n = cfg_.patch.k_normal * cfg_.object.pad_stiffness_scale;

  for (FingerPatch* patch : {&left_, &right_}) {
    const Eigen::Matrix3d r_cw = gripper_.orientation * patch->r_hc;
    const Eigen::Vector3d base_w = gripper_.position + gripper_.orientation * patch->center_h;
    const double base_force = gripper_.grip_force_n / patch->pins.size();

    for (Pin& pin : patch->pins) {
      const Eigen::Vector3d anchor_w = base_w + r_cw * Eigen::Vector3d(pin.anchor.x(), pin.anchor.y(), 0.0);
      const Eigen::Vector3d attach_w = object_.origin + object_.orientation * pin.attach_body;
      const Eigen::Vector3d rel = attach_w - anchor_w;
      const Eigen::Vector3d n_w = r_cw * pin.normal_c;
      const double compression = -rel.dot(n_w);
      const double fn = std::max(0.0, base_force + k_n * compression);
      const Eigen::Vector3d tangential = rel - rel.dot(n_w) * n_w;
      Eigen::Vector3d f_t = -k_t * tangential;
      // The pad can transmit at most the friction-cone force, whatever the
      // spring deflection says; the attach point catches up in
      // update_pin_plasticity.
      const double cone = cfg_.object.mu * pin.mu_scale * fn;
      const double f_t_norm = f_t.norm();
      if (f_t_norm > cone) f_t *= cone / f_t_norm;
      const Eigen::Vector3d f_pin = fn * n_w + f_t;
      force += f_pin;
      torque += (attach_w - com_w).cross(f_pin);
    }
  }
}

void SimWorld::apply_env_forces(Eigen::Vector3d& force, Eigen::Vector3d& torque, const Eigen::Vector3d& com_w,
                                double dt) {
  const EnvironmentModel& env = cfg_.environment;
  if (!env.has_floor && env.boxes.empty()) return;
  const double slip_gain = std::min(1.0, dt / env.slip_time_s);

  for (std::size_t idx = 0; idx < env_points_body_.size(); ++idx) {
    const Eigen::Vector3d p_w = object_.origin + object_.orientation * env_points_body_[idx];
    EnvContact& contact = env_contacts_[idx];
    double depth = -1.0;
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();

    if (env.has_floor) {
      const double d = env.floor_z_mm - p_w.z();
      if (d > depth) {
        depth = d;
        normal = Eigen::Vector3d::UnitZ();
      }
    }
    for (const EnvBox& box : env.boxes) {
      const Eigen::Vector3d q = p_w - box.center;
      const Eigen::Vector3d margin = box.half - q.cwiseAbs();
      if ((margin.array() > 0.0).all()) {
        int axis;
        margin.minCoeff(&axis);
        if (margin[axis] > depth) {
          depth = margin[axis];
          normal = Eigen::Vector3d::Zero();
          normal[axis] = q[axis] >= 0.0 ? 1.0 : -1.0;
        }
      }
    }
    const Eigen::Vector3d v_p = object_.lin_vel + object_.ang_vel.cross(p_w - com_w);
    const double vn = depth > 0.0 ? v_p.dot(normal) : 0.0;
    const double fn = depth > 0.0 ? std::max(0.0, env.k_contact * depth - env.damping * vn) : 0.0;
    if (fn <= 0.0) {
      contact.active = false;
      continue;
    }
    if (!contact.active) {
      contact.active = true;
      contact.anchor = p_w;
    }

    Eigen::Vector3d defl = p_w - contact.anchor;
    defl -= defl.dot(normal) * normal;
    Eigen::Vector3d f_t = -env.k_tangent * defl;
    const double cone = env.mu * fn;
    const double ft_norm = f_t.norm();
    if (ft_norm > cone) f_t *= cone / ft_norm;

    const Eigen::Vector3d f = fn * normal + f_t;
    force += f;
    torque += (p_w - com_w).cross(f);

    // Viscoplastic anchor slide, and keep the anchor on the current
    // contact plane so stale normal offsets cannot accumulate.
    const double cap = cone / env.k_tangent;
    const double d_norm = defl.norm();
    if (d_norm > cap) {
      contact.anchor += (d_norm - cap) * slip_gain * (defl / d_norm);
    }
    contact.anchor -= (contact.anchor - p_w).dot(normal) * normal;
  }
}

void SimWorld::update_pin_plasticity(double dt) {
  const double k_t = cfg_.patch.k_tangent * cfg_.object.pad_stiffness_scale;
  const double k_n = cfg_.patch.k_normal * cfg_.object.pad_stiffness_scale;
  const double slip_gain = std::min(1.0, dt / cfg_.patch.slip_time_s);

  for (FingerPatch* patch : {&left_, &right_}) {
    const Eigen::Matrix3d r_cw = gripper_.orientation * patch->r_hc;
    const Eigen::Vector3d base_w = gripper_.position + gripper_.orientation * patch->center_h;
    const double base_force = gripper_.grip_force_n / patch->pins.size();
    const double mu_s = cfg_.object.mu;
    const double mu_k = mu_s * cfg_.object.mu_kinetic_ratio;

    Eigen::Vector2d slide_sum = Eigen::Vector2d::Zero();
    Eigen::Vector2d offset_sum = Eigen::Vector2d::Zero();
    double normal_sum = 0.0;

    for (Pin& pin : patch->pins) {
      const Eigen::Vector3d anchor_w = base_w + r_cw * Eigen::Vector3d(pin.anchor.x(), pin.anchor.y(), 0.0);
      Eigen::Vector3d attach_w = object_.origin + object_.orientation * pin.attach_body;
      const Eigen::Vector3d n_w = r_cw * pin.normal_c;
      Eigen::Vector3d rel = attach_w - anchor_w;
      const double compression = -rel.dot(n_w);
      const double fn = std::max(0.0, base_force + k_n * compression);
      pin.normal_force = fn;
      normal_sum += fn;

      Eigen::Vector3d tangential = rel - rel.dot(n_w) * n_w;
      const double defl = tangential.norm();
      const double cap_static = mu_s * pin.mu_scale * fn / k_t;
      const double cap_kinetic = mu_k * pin.mu_scale * fn / k_t;

      if (defl > (pin.sliding ? cap_kinetic : cap_static)) {
        pin.sliding = true;
        const double slide = (defl - cap_kinetic) * slip_gain;
        const Eigen::Vector3d dir = tangential / defl;
        attach_w -= slide * dir;
        pin.attach_body = object_.orientation.transpose() * (attach_w - object_.origin);
        const Eigen::Vector3d slide_c = r_cw.transpose() * (slide * dir);
        slide_sum += slide_c.head<2>();
        rel = attach_w - anchor_w;
        tangential = rel - rel.dot(n_w) * n_w;
      } else if (pin.sliding && defl <= cap_kinetic) {
        pin.sliding = false;
      }
      const Eigen::Vector3d offset_c = r_cw.transpose() * tangential;
      offset_sum += offset_c.head<2>();
    }

    const double n_pins = static_cast<double>(patch->pins.size());
    patch->accumulated_slip += (slide_sum / n_pins).norm();
    patch->mean_offset = offset_sum / n_pins;
    patch->total_normal = normal_sum;
  }
}

void SimWorld::check_health() {
  if (!object_.origin.allFinite() || !object_.lin_vel.allFinite() || !object_.ang_vel.allFinite()) {
    throw SimDiverged("object state became non-finite at t=" + std::to_string(time_));
  }
  if (object_.lin_vel.norm() > cfg_.params.max_speed_mm_s || object_.ang_vel.norm() > cfg_.params.max_omega_rad_s) {
    throw SimDiverged("object velocity exceeded guard at t=" + std::to_string(time_));
  }

  const double escape = kPatchEscapeFactor * cfg_.patch.half_extent_mm;
  const bool left_lost = left_.total_normal < kPinEngaged || left_.mean_offset.norm() > escape;
  const bool right_lost = right_.total_normal < kPinEngaged || right_.mean_offset.norm() > escape;
  if (left_lost && right_lost) {
    throw ObjectDropped("both finger contacts lost at t=" + std::to_string(time_));
  }
  if (object_.origin.z() < gripper_.position.z() - 200.0) {
    throw ObjectDropped("object fell away from the gripper at t=" + std::to_string(time_));
  }
}

MarkerField SimWorld::make_marker_field(const FingerPatch& patch) const {
  const double k_t = cfg_.patch.k_tangent * cfg_.object.pad_stiffness_scale;
  const double k_n = cfg_.patch.k_normal * cfg_.object.pad_stiffness_scale;
  (void)k_t;

  MarkerField field;
  field.finger = patch.id;
  field.ref_positions.reserve(patch.pins.size());
  field.displacements.reserve(patch.pins.size());
  field.normals.reserve(patch.pins.size());

  const Eigen::Matrix3d r_cw = gripper_.orientation * patch.r_hc;
  const Eigen::Vector3d base_w = gripper_.position + gripper_.orientation * patch.center_h;
  const double base_force = gripper_.grip_force_n / patch.pins.size();

  for (const Pin& pin : patch.pins) {
    const Eigen::Vector3d anchor_w = base_w + r_cw * Eigen::Vector3d(pin.anchor.x(), pin.anchor.y(), 0.0);
    const Eigen::Vector3d attach_w = object_.origin + object_.orientation * pin.attach_body;
    const Eigen::Vector3d rel_c = r_cw.transpose() * (attach_w - anchor_w);
    const Eigen::Vector3d n_c = pin.normal_c;
    const Eigen::Vector3d tangential_c = rel_c - rel_c.dot(n_c) * n_c;

    field.ref_positions.emplace_back(pin.anchor.x(), pin.anchor.y(), 0.0);
    // Normal channel is reported relative to the commanded-grip rest state
    // (sensor zeroed after grasping), so only force *deviations* show.
    const double dz = -(pin.normal_force - base_force) / k_n;
    field.displacements.push_back(tangential_c + dz * n_c);
    field.normals.push_back(n_c);
  }
  return field;
}

Rotation SimWorld::hand_to_ground() const {
  return Rotation::from_matrix(gripper_.orientation, FrameId::Hand, FrameId::Ground);
}

Rotation SimWorld::sensor_to_hand(Finger f) const {
  return Rotation::from_matrix(sensor_to_hand_matrix(f),
                               f == Finger::Left ? FrameId::SensorLeft : FrameId::SensorRight, FrameId::Hand);
}

double SimWorld::orientation_error_deg(const Eigen::Matrix3d& target) const {
  return rad2deg(geodesic_angle(object_.orientation, target));
}

double SimWorld::accumulated_slip_mm(Finger f) const {
  return f == Finger::Left ? left_.accumulated_slip : right_.accumulated_slip;
}

double SimWorld::max_accumulated_slip_mm() const {
  return std::max(left_.accumulated_slip, right_.accumulated_slip);
}

double SimWorld::finger_normal_force_n(Finger f) const {
  return f == Finger::Left ? left_.total_normal : right_.total_normal;
}

double SimWorld::energy_j() const {
  const double m = cfg_.object.mass_kg;
  const Eigen::Vector3d com_w = object_.origin + object_.orientation * com_body(time_);
  const Eigen::Matrix3d iw = object_.orientation * inertia_body_ * object_.orientation.transpose();

  double e = 0.5 * m * object_.lin_vel.squaredNorm() * 1e-6;
  e += 0.5 * object_.ang_vel.dot(iw * object_.ang_vel) * 1e-6;
  e += m * cfg_.params.gravity_n_per_kg * com_w.z() * 1e-3;

  const double k_t = cfg_.patch.k_tangent * cfg_.object.pad_stiffness_scale;
  const double k_n = cfg_.patch.k_normal * cfg_.object.pad_stiffness_scale;
  for (const FingerPatch* patch : {&left_, &right_}) {
    const Eigen::Matrix3d r_cw = gripper_.orientation * patch->r_hc;
    const Eigen::Vector3d base_w = gripper_.position + gripper_.orientation * patch->center_h;
    for (const Pin& pin : patch->pins) {
      const Eigen::Vector3d anchor_w = base_w + r_cw * Eigen::Vector3d(pin.anchor.x(), pin.anchor.y(), 0.0);
      const Eigen::Vector3d attach_w = object_.origin + object_.orientation * pin.attach_body;
      const Eigen::Vector3d rel = attach_w - anchor_w;
      const Eigen::Vector3d n_w = r_cw * pin.normal_c;
      const Eigen::Vector3d tangential = rel - rel.dot(n_w) * n_w;
      e += 0.5 * k_t * tangential.squaredNorm() * 1e-3;
      e += 0.5 * pin.normal_force * pin.normal_force / k_n * 1e-3;
    }
  }
  const EnvironmentModel& env = cfg_.environment;
  if (env.has_floor || !env.boxes.empty()) {
    for (std::size_t idx = 0; idx < env_points_body_.size(); ++idx) {
      const Eigen::Vector3d p_w = object_.origin + object_.orientation * env_points_body_[idx];
      double depth = 0.0;
      if (env.has_floor) depth = std::max(depth, env.floor_z_mm - p_w.z());
      for (const EnvBox& box : env.boxes) {
        const Eigen::Vector3d margin = box.half - (p_w - box.center).cwiseAbs();
        if ((margin.array() > 0.0).all()) depth = std::max(depth, margin.minCoeff());
      }
      if (depth > 0.0) e += 0.5 * env.k_contact * depth * depth * 1e-3;
      if (env_contacts_[idx].active) {
        const double d = (p_w - env_contacts_[idx].anchor).norm();
        e += 0.5 * env.k_tangent * d * d * 1e-3;
      }
    }
  }
  return e;
}

std::vector<ObjectTemplate> make_object_suite() {
  std::vector<ObjectTemplate> suite;

  {
    ObjectTemplate t;
    t.id = "block_soft";
    t.object.mass_kg = 0.08;
    t.object.half_extents_mm = {36.0, 10.0, 12.0};
    t.object.com_offset_mm = {-8.0, 0.0, 0.0};
    t.object.mu = 0.95;
    t.object.mu_kinetic_ratio = 0.9;
    t.object.pad_stiffness_scale = 0.45;
    suite.push_back(t);
  }
  {
    ObjectTemplate t;
    t.id = "bottle_shifting";
    t.object.mass_kg = 0.12;
    t.object.half_extents_mm = {38.0, 10.0, 11.0};
    t.object.com_offset_mm = {-14.0, 0.0, 0.0};
    t.object.com_slosh_amp_mm = 1.5;
    t.object.com_slosh_period_s = 2.5;
    t.object.mu = 0.85;
    suite.push_back(t);
  }
  {
    ObjectTemplate t;
    t.id = "stick_textured";
    t.object.mass_kg = 0.09;
    t.object.half_extents_mm = {35.0, 9.0, 9.0};
    t.object.com_offset_mm = {-8.0, 0.0, 0.0};
    t.object.mu = 1.05;
    t.object.mu_texture = 0.5;
    suite.push_back(t);
  }
  {
    ObjectTemplate t;
    t.id = "shell_curved";
    t.object.mass_kg = 0.10;
    t.object.half_extents_mm = {40.0, 10.0, 13.0};
    t.object.com_offset_mm = {-16.0, 0.0, 0.0};
    t.object.mu = 0.65;
    t.object.pad_curvature_mm = 28.0;
    suite.push_back(t);
  }
  {
    ObjectTemplate t;
    t.id = "body_heavy";
    t.object.mass_kg = 0.16;
    t.object.half_extents_mm = {45.0, 10.0, 11.0};
    t.object.com_offset_mm = {-16.0, 0.0, -2.0};
    t.object.mu = 0.9;
    suite.push_back(t);
  }
  return suite;
}

}  // namespace pivot
