// CLI front end: single episodes, the ablation matrix, the two-phase demo,
// and plot-data extraction from episode logs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pivot/ablation.hpp"
#include "pivot/demo.hpp"
#include "pivot/episode.hpp"
#include "pivot/plots.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

void print_outcome(const char* tag, const pivot::EpisodeOutcome& out) {
  std::cout << tag << " label=" << pivot::to_string(out.label)
            << " final_error_deg=" << pivot::format_double(out.final_error_deg)
            << " max_slip_mm=" << pivot::format_double(out.max_slip_mm)
            << " duration_s=" << pivot::format_double(out.duration_s) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile-slip driven in-hand reorientation: simulator, controller and experiment harness"};
  app.require_subcommand(1);

  // ----- run ------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run one episode");
  std::string run_cfg;
  std::string run_out;
  std::uint64_t run_seed = 0;
  bool run_echo = false;
  run->add_option("--config", run_cfg, "Episode config file (defaults when omitted)");
  run->add_option("--seed", run_seed, "Override the episode seed");
  run->add_option("--out", run_out, "Write the episode log to this path");
  run->add_flag("--echo-config", run_echo, "Print the resolved config and exit");
  run->callback([&] {
    pivot::EpisodeConfig cfg =
        run_cfg.empty() ? pivot::EpisodeConfig::defaults_for(pivot::Scenario::Contact)
                        : pivot::EpisodeConfig::from_config(pivot::KeyValueConfig::load_file(run_cfg));
    if (run->count("--seed") > 0) cfg.seed = run_seed;
    if (run_echo) {
      cfg.echo(std::cout);
      return;
    }
    const pivot::EpisodeOutcome out =
        run_out.empty() ? pivot::run_episode(cfg, nullptr) : pivot::run_episode_to_file(cfg, run_out);
    print_outcome("episode", out);
  });

  // ----- ablate ---------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "Run the ablation matrix");
  std::string ab_cfg;
  std::string ab_out;
  std::uint64_t ab_seed = 0;
  bool ab_progress = false;
  ablate->add_option("--config", ab_cfg,
                     "Matrix config file (keys: ablate.objects, ablate.groups, ablate.seeds)");
  ablate->add_option("--seed", ab_seed, "Run a single seed instead of the default 0,1,2");
  ablate->add_option("--out", ab_out, "Write the per-episode results CSV to this path");
  ablate->add_flag("--progress", ab_progress, "Print one line per finished episode to stderr");
  ablate->callback([&] {
    pivot::MatrixSpec spec = pivot::MatrixSpec::full();
    if (!ab_cfg.empty()) {
      const pivot::KeyValueConfig kv = pivot::KeyValueConfig::load_file(ab_cfg);
      if (kv.has("ablate.objects")) spec.object_ids = split_list(kv.get_string("ablate.objects", ""));
      if (kv.has("ablate.groups")) {
        spec.groups.clear();
        for (const std::string& code : split_list(kv.get_string("ablate.groups", ""))) {
          spec.groups.push_back(pivot::group_from_code(code));
        }
      }
      if (kv.has("ablate.seeds")) {
        spec.seeds.clear();
        for (const std::string& s : split_list(kv.get_string("ablate.seeds", ""))) {
          spec.seeds.push_back(std::stoull(s));
        }
      }
      kv.require_all_consumed();
    }
    if (ablate->count("--seed") > 0) spec.seeds = {ab_seed};
    const pivot::MatrixResult result = pivot::run_matrix(spec, ab_progress ? &std::cerr : nullptr);
    if (!ab_out.empty()) {
      std::ofstream out(ab_out);
      if (!out) throw pivot::ConfigError("cannot open results path: " + ab_out);
      result.write_csv(out);
    }
    result.write_tables(std::cout);
  });

  // ----- demo -----------------------------------------------------------
  auto* demo = app.add_subcommand("demo", "Run the two-phase reorientation demo");
  std::string demo_cfg;
  std::string demo_out;
  std::uint64_t demo_seed = 0;
  demo->add_option("--config", demo_cfg, "Demo config file (defaults when omitted)");
  demo->add_option("--seed", demo_seed, "Override the demo seed");
  demo->add_option("--out", demo_out, "Write the combined episode log to this path");
  demo->callback([&] {
    pivot::DemoConfig cfg = demo_cfg.empty()
                                ? pivot::DemoConfig{}
                                : pivot::DemoConfig::from_config(pivot::KeyValueConfig::load_file(demo_cfg));
    if (demo->count("--seed") > 0) cfg.seed = demo_seed;
    std::ofstream log_file;
    std::ostream* log = nullptr;
    if (!demo_out.empty()) {
      log_file.open(demo_out);
      if (!log_file) throw pivot::ConfigError("cannot open log path: " + demo_out);
      log = &log_file;
    }
    const pivot::DemoOutcome out = pivot::run_two_phase_demo(cfg, log);
    print_outcome("phase1", out.phase1);
    if (out.phase2_run) {
      print_outcome("phase2", out.phase2);
    } else {
      std::cout << "phase2 skipped (phase 1 did not succeed)\n";
    }
    std::cout << "demo " << (out.success() ? "Success" : "Failed") << "\n";
  });

  // ----- plot -----------------------------------------------------------
  auto* plot = app.add_subcommand("plot", "Emit columnar plot data from an episode log");
  std::string plot_log;
  std::string plot_out;
  plot->add_option("--log", plot_log, "Episode log to read")->required();
  plot->add_option("--out", plot_out, "Output file prefix")->required();
  plot->callback([&] { pivot::emit_plots(plot_log, plot_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
