#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>

#include "pivot/config.hpp"
#include "pivot/controller.hpp"
#include "pivot/optimizer.hpp"
#include "pivot/simulation.hpp"

namespace pivot {

// -------------------------------------------------------------------------
// Episode configuration
// -------------------------------------------------------------------------

enum class EpisodeLabel : std::uint8_t { Success, Slip, Stall, SlipAndStall, Dropped, Diverged };

const char* to_string(EpisodeLabel label);

struct EpisodeConfig {
  std::string object_id = "block_soft";
  Scenario scenario = Scenario::Contact;
  ActionToggles toggles;
  std::uint64_t seed = 0;

  // Target rotation: ground axis ('x'|'y'|'z') and signed angle.
  char target_axis = 'y';
  double target_deg = 55.0;

  double time_limit_s = 90.0;
  double success_deg = 5.0;    // terminal success when error drops below this
  double slip_fail_mm = 20.0;  // SL once max accumulated slip exceeds this
  double stall_window_s = 12.0;
  double stall_min_progress_deg = 0.25;

  // Scripted wrench at the object's centre of mass, as a fraction of the
  // object's weight (torque uses a 10 mm lever on the same amplitude).
  double disturbance_fraction = 0.0;
  double disturbance_freq_hz = 0.4;

  // 0 = derive from the target rotation sense; otherwise forced +1/-1.
  int s2_sense_override = 0;

  ControllerConfig controller;  // scenario/enabled/s2_sense are set at assembly
  OptimizerConfig optimizer;

  static EpisodeConfig defaults_for(Scenario scenario);

  // Load from a key-value config; keys absent from the file keep the
  // scenario defaults.  Unknown keys are rejected.
  static EpisodeConfig from_config(const KeyValueConfig& kv);

  // Canonical key=value dump; parsing the output reproduces this config.
  void echo(std::ostream& out) const;

  void validate() const;  // throws ConfigError
};

// -------------------------------------------------------------------------
// Outcome
// -------------------------------------------------------------------------

struct EpisodeOutcome {
  EpisodeLabel label = EpisodeLabel::Stall;
  double final_error_deg = 0.0;
  double max_slip_mm = 0.0;
  double duration_s = 0.0;
  std::string log_path;  // empty when the episode was not logged to a file
};

// -------------------------------------------------------------------------
// Scene assembly
// -------------------------------------------------------------------------

// Contact episodes place the object horizontally with its nose a small gap
// away from a vertical slab: pressing against the slab below the object's
// mid-height pivots it nose-down, which is the only way to reach large
// in-hand rotations without the gripper colliding with the support surface.
// In-air episodes start with a small seeded roll offset so the gravity
// signal has a defined downhill direction from the first probe.
struct AssembledScene {
  SimWorldConfig world;
  Eigen::Matrix3d target = Eigen::Matrix3d::Identity();
  Eigen::Vector3d press_seed = -Eigen::Vector3d::UnitZ();
};

AssembledScene assemble_scene(const EpisodeConfig& cfg);

Eigen::Matrix3d axis_rotation(char axis, double degrees);

// Unit direction from `from` toward the closest environment surface point
// (floor or box).  Falls back to -Z when the scene has no environment.
Eigen::Vector3d toward_nearest_surface(const EnvironmentModel& env, const Eigen::Vector3d& from);

// -------------------------------------------------------------------------
// Episode runner
// -------------------------------------------------------------------------

// Runs the control loop on an externally assembled world so that callers
// can chain phases on one persistent scene.  Episode logs are line
// oriented: `cycle,...` rows (one per control cycle, including settle,
// probe and restore cycles), `opt,...` rows after each probe schedule, and
// a final `end,...` row.
class EpisodeRunner : private ProbePlant {
 public:
  EpisodeRunner(SimWorld& world, const EpisodeConfig& cfg, const Eigen::Matrix3d& target,
                const Eigen::Vector3d& press_seed, std::ostream* log);

  EpisodeOutcome run();

  static constexpr int kSettleCycles = 15;

 private:
  // ProbePlant
  double probe_cycle(const Eigen::Vector3d& probe) override;
  void restore_cycle(const Eigen::Vector3d& motion) override;
  Eigen::Vector3d gripper_position() const override;
  Eigen::Matrix3d gripper_orientation() const override;
  double cycle_s() const override;

  struct Activity {
    char phase = 'N';  // S settle, N normal, P probe, R restore
    bool task = false;
    bool constraint = false;
    bool coordinating = false;
  };

  bool step_cycle(const GripperCommand& cmd, const Activity& activity);
  GripperCommand next_command(Activity& activity);
  void update_detectors();
  double current_loss() const;
  bool probing_enabled() const;
  void log_cycle(const Activity& activity);
  void log_opt(const ProbeTrace& trace);

  SimWorld& world_;
  EpisodeConfig cfg_;
  Eigen::Matrix3d target_;
  OptimizerState opt_;
  std::ostream* log_ = nullptr;

  TactileFrame frame_;
  double force_cmd_ = 0.0;
  int cycles_since_schedule_ = 0;
  bool terminal_ = false;
  EpisodeLabel fault_label_ = EpisodeLabel::Stall;
  bool faulted_ = false;
  bool success_ = false;
  bool slip_latched_ = false;
  bool stall_fired_ = false;
  double error_deg_ = 0.0;
  std::deque<std::pair<double, double>> error_history_;  // (time, error)
};

// Assembles the scene described by `cfg` and runs one episode.
EpisodeOutcome run_episode(const EpisodeConfig& cfg, std::ostream* log);

// Same, logging to `log_path` (parent directory must exist).
EpisodeOutcome run_episode_to_file(const EpisodeConfig& cfg, const std::string& log_path);

}  // namespace pivot
