#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pivot/episode.hpp"

namespace pivot {

// Two-phase reorientation demo: first roll the object to an intermediate
// orientation in the air, then pitch it the rest of the way by pressing it
// against an obstacle.  The obstacle pose is randomized per seed and never
// appears in any controller-visible config; the controller works from
// tactile feedback alone.  A scripted wrench (a dragging-cable analogue)
// disturbs the object continuously through both phases.
struct DemoConfig {
  std::string object_id = "block_soft";
  std::uint64_t seed = 0;

  double phase1_roll_deg = 25.0;   // in-air target, about ground x
  double phase2_pitch_deg = 55.0;  // in-hand target, about the grasp axis
  double phase_time_limit_s = 60.0;

  // Disturbance amplitude as a fraction of the object's weight.
  double disturbance_fraction = 0.2;
  double disturbance_freq_hz = 0.4;

  static DemoConfig from_config(const KeyValueConfig& kv);
  void echo(std::ostream& out) const;
  void validate() const;  // throws ConfigError
};

struct DemoOutcome {
  EpisodeOutcome phase1;
  bool phase2_run = false;  // phase 2 starts only after phase-1 success
  EpisodeOutcome phase2;

  bool success() const {
    return phase1.label == EpisodeLabel::Success && phase2_run &&
           phase2.label == EpisodeLabel::Success;
  }
};

// Runs both phases on one persistent world.  The phase-2 target is the
// configured pitch about the grasp axis measured at the hand's actual
// phase-1 end pose, so phase 2 always asks for a pure in-hand rotation.
DemoOutcome run_two_phase_demo(const DemoConfig& cfg, std::ostream* log);

}  // namespace pivot
