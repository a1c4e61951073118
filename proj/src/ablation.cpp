#include "pivot/ablation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>

namespace pivot {

namespace {

const char* scenario_name(Scenario s) { return s == Scenario::Contact ? "contact" : "in_air"; }

// Severity order used only for majority-tie resolution.
int label_severity(EpisodeLabel label) {
  switch (label) {
    case EpisodeLabel::Success: return 0;
    case EpisodeLabel::Stall: return 1;
    case EpisodeLabel::Slip: return 2;
    case EpisodeLabel::SlipAndStall: return 3;
    case EpisodeLabel::Dropped: return 4;
    case EpisodeLabel::Diverged: return 5;
  }
  return 5;
}

}  // namespace

const char* group_code(AblationGroup group) {
  switch (group) {
    case AblationGroup::NoTask: return "NTO";
    case AblationGroup::NoConstraint: return "NCB";
    case AblationGroup::NoCoordinating: return "NC";
    case AblationGroup::NoOnlineAdjust: return "NOA";
    case AblationGroup::ControlGroup: return "CG";
  }
  return "?";
}

AblationGroup group_from_code(const std::string& code) {
  for (AblationGroup g : kAllGroups) {
    if (code == group_code(g)) return g;
  }
  throw ConfigError("unknown group code \"" + code + "\" (known: NTO, NCB, NC, NOA, CG)");
}

ActionToggles group_toggles(AblationGroup group) {
  ActionToggles t;  // everything on
  switch (group) {
    case AblationGroup::NoTask: t.task = false; break;
    case AblationGroup::NoConstraint: t.constraint = false; break;
    case AblationGroup::NoCoordinating: t.coordinating = false; break;
    case AblationGroup::NoOnlineAdjust: t.online_adjust = false; break;
    case AblationGroup::ControlGroup: break;
  }
  return t;
}

MatrixSpec MatrixSpec::full() {
  MatrixSpec spec;
  for (const ObjectTemplate& tmpl : make_object_suite()) spec.object_ids.push_back(tmpl.id);
  return spec;
}

EpisodeConfig matrix_episode_config(const std::string& object_id, Scenario scenario,
                                    AblationGroup group, std::uint64_t seed) {
  EpisodeConfig cfg = EpisodeConfig::defaults_for(scenario);
  cfg.object_id = object_id;
  cfg.seed = seed;
  cfg.toggles = group_toggles(group);
  return cfg;
}

MatrixResult run_matrix(const MatrixSpec& spec, std::ostream* progress) {
  MatrixSpec resolved = spec;
  if (resolved.object_ids.empty()) resolved.object_ids = MatrixSpec::full().object_ids;

  MatrixResult result;
  for (const std::string& object_id : resolved.object_ids) {
    for (Scenario scenario : resolved.scenarios) {
      for (AblationGroup group : resolved.groups) {
        for (std::uint64_t seed : resolved.seeds) {
          MatrixRow row;
          row.object_id = object_id;
          row.scenario = scenario;
          row.group = group;
          row.seed = seed;
          row.outcome = run_episode(matrix_episode_config(object_id, scenario, group, seed), nullptr);
          if (progress != nullptr) {
            *progress << object_id << ' ' << scenario_name(scenario) << ' ' << group_code(group)
                      << " seed=" << seed << " -> " << to_string(row.outcome.label)
                      << " err=" << format_double(row.outcome.final_error_deg)
                      << " slip=" << format_double(row.outcome.max_slip_mm)
                      << " t=" << format_double(row.outcome.duration_s) << "\n";
          }
          result.rows.push_back(std::move(row));
        }
      }
    }
  }
  return result;
}

EpisodeLabel MatrixResult::cell_label(const std::string& object_id, Scenario scenario,
                                      AblationGroup group) const {
  std::map<EpisodeLabel, int> votes;
  for (const MatrixRow& row : rows) {
    if (row.object_id == object_id && row.scenario == scenario && row.group == group) {
      ++votes[row.outcome.label];
    }
  }
  if (votes.empty()) throw ConfigError("no matrix rows for " + object_id);
  EpisodeLabel best = votes.begin()->first;
  int best_count = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_count || (count == best_count && label_severity(label) > label_severity(best))) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

int MatrixResult::count_label(Scenario scenario, AblationGroup group, EpisodeLabel label) const {
  int n = 0;
  for (const MatrixRow& row : rows) {
    if (row.scenario == scenario && row.group == group && row.outcome.label == label) ++n;
  }
  return n;
}

std::vector<std::string> MatrixResult::ordered_objects() const {
  std::vector<std::string> ids;
  for (const MatrixRow& row : rows) {
    if (std::find(ids.begin(), ids.end(), row.object_id) == ids.end()) ids.push_back(row.object_id);
  }
  return ids;
}

int MatrixResult::objects_with_label(Scenario scenario, AblationGroup group, EpisodeLabel label) const {
  int n = 0;
  for (const std::string& id : ordered_objects()) {
    if (cell_label(id, scenario, group) == label) ++n;
  }
  return n;
}

int MatrixResult::objects_failed(Scenario scenario, AblationGroup group) const {
  int n = 0;
  for (const std::string& id : ordered_objects()) {
    if (cell_label(id, scenario, group) != EpisodeLabel::Success) ++n;
  }
  return n;
}

void MatrixResult::write_csv(std::ostream& out) const {
  out << "object,scenario,group,seed,label,final_error_deg,max_slip_mm,duration_s\n";
  for (const MatrixRow& row : rows) {
    out << row.object_id << ',' << scenario_name(row.scenario) << ',' << group_code(row.group) << ','
        << row.seed << ',' << to_string(row.outcome.label) << ','
        << format_double(row.outcome.final_error_deg) << ',' << format_double(row.outcome.max_slip_mm)
        << ',' << format_double(row.outcome.duration_s) << "\n";
  }
}

void MatrixResult::write_tables(std::ostream& out) const {
  const std::vector<std::string> ids = ordered_objects();
  std::size_t width = 8;
  for (const std::string& id : ids) width = std::max(width, id.size());

  std::vector<Scenario> scenarios;
  for (const MatrixRow& row : rows) {
    if (std::find(scenarios.begin(), scenarios.end(), row.scenario) == scenarios.end()) {
      scenarios.push_back(row.scenario);
    }
  }
  std::vector<AblationGroup> groups;
  for (const MatrixRow& row : rows) {
    if (std::find(groups.begin(), groups.end(), row.group) == groups.end()) groups.push_back(row.group);
  }

  for (Scenario scenario : scenarios) {
    out << "scenario: " << scenario_name(scenario) << " (cell = majority label over seeds)\n";
    out << std::left << std::setw(static_cast<int>(width)) << "object";
    for (AblationGroup group : groups) out << " | " << std::setw(7) << group_code(group);
    out << "\n";
    out << std::string(width, '-');
    for (std::size_t i = 0; i < groups.size(); ++i) out << "-+-" << std::string(7, '-');
    out << "\n";
    for (const std::string& id : ids) {
      out << std::left << std::setw(static_cast<int>(width)) << id;
      for (AblationGroup group : groups) {
        out << " | " << std::setw(7) << to_string(cell_label(id, scenario, group));
      }
      out << "\n";
    }
    out << "\n";
  }
}

}  // namespace pivot
