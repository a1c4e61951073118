#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace pivot {

class MalformedLog : public std::runtime_error {
 public:
  explicit MalformedLog(const std::string& what) : std::runtime_error(what) {}
};

// Per-cycle columns extracted from an episode log.  All vectors have one
// entry per `cycle,` row, in log order.
struct PlotSeries {
  std::vector<double> time_s;
  std::vector<double> error_deg;
  std::vector<double> grip_force_n;
  std::vector<double> s1_norm_left;
  std::vector<double> s2_left;
  std::vector<double> s1_norm_right;
  std::vector<double> s2_right;
  std::vector<char> phase;  // S settle, N normal, P probe, R restore
  std::vector<int> task;
  std::vector<int> constraint;
  std::vector<int> coordinating;

  std::size_t size() const { return time_s.size(); }
};

// Parses an episode log (as written by EpisodeRunner).  Header lines,
// `opt,` and `end,` rows are validated and skipped.  Throws MalformedLog
// with a line number for anything unrecognized.
PlotSeries parse_episode_log(std::istream& in);
PlotSeries load_episode_log(const std::string& path);  // MalformedLog if unreadable

// Writes four columnar files next to `out_prefix`:
//   <prefix>_error.csv     time_s,error_deg
//   <prefix>_force.csv     time_s,grip_force_n
//   <prefix>_slip.csv      time_s,s1_norm_left,s2_left,s1_norm_right,s2_right
//   <prefix>_activity.csv  time_s,phase,task,constraint,coordinating
// An empty episode produces header-only files.
void write_plot_files(const PlotSeries& series, const std::string& out_prefix);

// Convenience: load + write.
void emit_plots(const std::string& log_path, const std::string& out_prefix);

}  // namespace pivot
