#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pivot/episode.hpp"

namespace pivot {

// ---------------------------------------------------------------------
// Experiment groups
// ---------------------------------------------------------------------

// The full controller and the four single-action ablations.  Each ablated
// group differs from the control group in exactly one toggle.
enum class AblationGroup : std::uint8_t {
  NoTask,          // NTO: task-oriented action off
  NoConstraint,    // NCB: constraint-based action off
  NoCoordinating,  // NC:  coordinating action off
  NoOnlineAdjust,  // NOA: online adjustment off
  ControlGroup,    // CG:  everything on
};

// Column order used in result tables.
inline constexpr std::array<AblationGroup, 5> kAllGroups = {
    AblationGroup::NoTask, AblationGroup::NoConstraint, AblationGroup::NoCoordinating,
    AblationGroup::NoOnlineAdjust, AblationGroup::ControlGroup};

const char* group_code(AblationGroup group);               // "NTO", "NCB", "NC", "NOA", "CG"
AblationGroup group_from_code(const std::string& code);    // throws ConfigError
ActionToggles group_toggles(AblationGroup group);

// ---------------------------------------------------------------------
// Matrix runner
// ---------------------------------------------------------------------

struct MatrixSpec {
  std::vector<std::string> object_ids;                      // default: whole suite
  std::vector<Scenario> scenarios = {Scenario::Contact, Scenario::InAir};
  std::vector<AblationGroup> groups{kAllGroups.begin(), kAllGroups.end()};
  std::vector<std::uint64_t> seeds = {0, 1, 2};

  static MatrixSpec full();
};

// Builds the episode config one matrix cell runs with: scenario defaults,
// the group's toggles, and the given object and seed.  Everything else in
// the matrix is held at the defaults, so two groups differ only in their
// toggles.
EpisodeConfig matrix_episode_config(const std::string& object_id, Scenario scenario,
                                    AblationGroup group, std::uint64_t seed);

struct MatrixRow {
  std::string object_id;
  Scenario scenario = Scenario::Contact;
  AblationGroup group = AblationGroup::ControlGroup;
  std::uint64_t seed = 0;
  EpisodeOutcome outcome;
};

struct MatrixResult {
  std::vector<MatrixRow> rows;  // in spec iteration order

  // Majority label over the seeds of one (object, scenario, group) cell;
  // ties resolve to the most severe tied label.
  EpisodeLabel cell_label(const std::string& object_id, Scenario scenario, AblationGroup group) const;

  // Episode-level count of `label` within one (scenario, group) column.
  int count_label(Scenario scenario, AblationGroup group, EpisodeLabel label) const;

  // Number of objects whose cell label matches / fails in one column.
  int objects_with_label(Scenario scenario, AblationGroup group, EpisodeLabel label) const;
  int objects_failed(Scenario scenario, AblationGroup group) const;

  // One row per episode: object,scenario,group,seed,label,final_error_deg,
  // max_slip_mm,duration_s.  Deterministic order and formatting, so a rerun
  // with the same seeds is byte-identical.
  void write_csv(std::ostream& out) const;

  // Human-readable per-scenario tables of cell labels.
  void write_tables(std::ostream& out) const;

 private:
  std::vector<std::string> ordered_objects() const;
};

// Runs every episode in the spec, serially, in a fixed order.  `progress`
// (when non-null) receives one line per finished episode.
MatrixResult run_matrix(const MatrixSpec& spec, std::ostream* progress = nullptr);

}  // namespace pivot
