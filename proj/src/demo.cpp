#include "pivot/demo.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "pivot/rng.hpp"

namespace pivot {

namespace {

Eigen::Vector3d random_unit_vector(SplitMix64& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

DemoConfig DemoConfig::from_config(const KeyValueConfig& kv) {
  DemoConfig c;
  c.object_id = kv.get_string("object", c.object_id);
  c.seed = kv.get_u64("seed", c.seed);
  c.phase1_roll_deg = kv.get_double("demo.phase1_roll_deg", c.phase1_roll_deg);
  c.phase2_pitch_deg = kv.get_double("demo.phase2_pitch_deg", c.phase2_pitch_deg);
  c.phase_time_limit_s = kv.get_double("demo.phase_time_limit_s", c.phase_time_limit_s);
  c.disturbance_fraction = kv.get_double("disturbance.fraction", c.disturbance_fraction);
  c.disturbance_freq_hz = kv.get_double("disturbance.freq_hz", c.disturbance_freq_hz);
  kv.require_all_consumed();
  c.validate();
  return c;
}

void DemoConfig::echo(std::ostream& out) const {
  out << "object = " << object_id << "\n";
  out << "seed = " << seed << "\n";
  out << "demo.phase1_roll_deg = " << format_double(phase1_roll_deg) << "\n";
  out << "demo.phase2_pitch_deg = " << format_double(phase2_pitch_deg) << "\n";
  out << "demo.phase_time_limit_s = " << format_double(phase_time_limit_s) << "\n";
  out << "disturbance.fraction = " << format_double(disturbance_fraction) << "\n";
  out << "disturbance.freq_hz = " << format_double(disturbance_freq_hz) << "\n";
}

void DemoConfig::validate() const {
  if (object_id.empty()) throw ConfigError("object id must not be empty");
  if (std::abs(phase1_roll_deg) < 1e-9 || std::abs(phase1_roll_deg) > 90.0) {
    throw ConfigError("demo.phase1_roll_deg magnitude must be in (0, 90]");
  }
  if (std::abs(phase2_pitch_deg) < 1e-9 || std::abs(phase2_pitch_deg) > 90.0) {
    throw ConfigError("demo.phase2_pitch_deg magnitude must be in (0, 90]");
  }
  if (!(phase_time_limit_s > 0.0)) throw ConfigError("demo.phase_time_limit_s must be positive");
  if (disturbance_fraction < 0.0) throw ConfigError("disturbance.fraction must be >= 0");
  if (!(disturbance_freq_hz > 0.0)) throw ConfigError("disturbance.freq_hz must be positive");
}

DemoOutcome run_two_phase_demo(const DemoConfig& cfg, std::ostream* log) {
  cfg.validate();

  const auto suite = make_object_suite();
  const ObjectTemplate* tmpl = nullptr;
  std::uint64_t object_key = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    if (suite[i].id == cfg.object_id) {
      tmpl = &suite[i];
      object_key = i + 1;
    }
  }
  if (tmpl == nullptr) throw ConfigError("unknown object \"" + cfg.object_id + "\"");

  SplitMix64 rng(mix_keys(cfg.seed, object_key, 33));

  EpisodeConfig p1 = EpisodeConfig::defaults_for(Scenario::InAir);
  p1.object_id = cfg.object_id;
  p1.seed = cfg.seed;
  p1.target_axis = 'x';
  p1.target_deg = cfg.phase1_roll_deg;
  p1.time_limit_s = cfg.phase_time_limit_s;

  EpisodeConfig p2 = EpisodeConfig::defaults_for(Scenario::Contact);
  p2.object_id = cfg.object_id;
  p2.seed = cfg.seed;
  p2.target_axis = 'y';
  p2.target_deg = cfg.phase2_pitch_deg;
  p2.time_limit_s = cfg.phase_time_limit_s;

  // One persistent world for both phases.  The object starts aloft with a
  // small roll toward the phase-1 target; the obstacle slab sits a seeded
  // gap ahead of the nose, with its lateral position and height jittered.
  SimWorldConfig w;
  w.object = tmpl->object;
  w.seed = cfg.seed;
  w.grasp_point_body = {-25.0, 0.0, 0.0};
  w.gripper.grip_force_n = p1.controller.f_init_n;

  const double start_z = 80.0;
  const double roll_sign = cfg.phase1_roll_deg >= 0.0 ? 1.0 : -1.0;
  const Eigen::Matrix3d tilt = axis_rotation('x', roll_sign * rng.uniform(1.0, 2.5));
  w.object_orientation = tilt;
  w.gripper.orientation = tilt;
  w.gripper.position = Eigen::Vector3d(0.0, 0.0, start_z) + tilt * w.grasp_point_body;

  w.environment.has_floor = true;
  w.environment.floor_z_mm = 0.0;
  const double gap = rng.uniform(1.2, 2.0);
  EnvBox slab;
  slab.center = {w.object.half_extents_mm.x() + gap + 15.0, rng.uniform(-5.0, 5.0),
                 start_z - 60.0 + rng.uniform(-5.0, 5.0)};
  slab.half = {15.0, 40.0, 60.0};
  w.environment.boxes.push_back(slab);

  if (cfg.disturbance_fraction > 0.0) {
    const double weight = w.object.mass_kg * w.params.gravity_n_per_kg;
    w.disturbance.force_n = cfg.disturbance_fraction * weight;
    w.disturbance.torque_nmm = cfg.disturbance_fraction * weight * 10.0;
    w.disturbance.freq_hz = cfg.disturbance_freq_hz;
    w.disturbance.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.disturbance.dir_a = random_unit_vector(rng);
    Eigen::Vector3d b = random_unit_vector(rng);
    b -= b.dot(w.disturbance.dir_a) * w.disturbance.dir_a;
    w.disturbance.dir_b = b.norm() > 1e-6 ? Eigen::Vector3d(b.normalized()) : Eigen::Vector3d::UnitZ();
  }

  SimWorld world(w);
  DemoOutcome out;

  if (log != nullptr) *log << "# demo phase 1: in-air roll\n";
  {
    const Eigen::Matrix3d target1 = axis_rotation('x', cfg.phase1_roll_deg);
    EpisodeRunner runner(world, p1, target1, Eigen::Vector3d::Zero(), log);
    out.phase1 = runner.run();
  }
  if (out.phase1.label != EpisodeLabel::Success) return out;

  // Phase-2 target: the configured pitch about the grasp axis, measured at
  // the pose phase 1 actually reached, so the request is exactly an
  // in-hand rotation.
  out.phase2_run = true;
  if (log != nullptr) *log << "# demo phase 2: contact pivot\n";
  {
    const Eigen::Vector3d grasp_axis = world.gripper().orientation * Eigen::Vector3d::UnitY();
    const Eigen::Matrix3d target2 =
        Eigen::AngleAxisd(deg2rad(cfg.phase2_pitch_deg), grasp_axis).toRotationMatrix() *
        world.object_state().orientation;
    const Eigen::Vector3d press_seed = toward_nearest_surface(w.environment, world.gripper().position);
    EpisodeRunner runner(world, p2, target2, press_seed, log);
    out.phase2 = runner.run();
  }
  return out;
}

}  // namespace pivot
