#include "pivot/plots.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pivot/config.hpp"

namespace pivot {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw MalformedLog("line " + std::to_string(line_no) + ": bad number \"" + text + "\"");
  }
}

int parse_flag(const std::string& text, int line_no) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw MalformedLog("line " + std::to_string(line_no) + ": bad activity flag \"" + text + "\"");
}

constexpr std::size_t kCycleFields = 25;
constexpr std::size_t kOptFields = 20;
constexpr std::size_t kEndFields = 5;

}  // namespace

PlotSeries parse_episode_log(std::istream& in) {
  PlotSeries series;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.front() == "cycle") {
      if (f.size() != kCycleFields) {
        throw MalformedLog("line " + std::to_string(line_no) + ": cycle row has " +
                           std::to_string(f.size()) + " fields, expected " + std::to_string(kCycleFields));
      }
      series.time_s.push_back(parse_number(f[1], line_no));
      series.grip_force_n.push_back(parse_number(f[9], line_no));
      const double s1lx = parse_number(f[10], line_no);
      const double s1ly = parse_number(f[11], line_no);
      const double s1lz = parse_number(f[12], line_no);
      series.s1_norm_left.push_back(std::sqrt(s1lx * s1lx + s1ly * s1ly + s1lz * s1lz));
      series.s2_left.push_back(parse_number(f[13], line_no));
      const double s1rx = parse_number(f[14], line_no);
      const double s1ry = parse_number(f[15], line_no);
      const double s1rz = parse_number(f[16], line_no);
      series.s1_norm_right.push_back(std::sqrt(s1rx * s1rx + s1ry * s1ry + s1rz * s1rz));
      series.s2_right.push_back(parse_number(f[17], line_no));
      series.error_deg.push_back(parse_number(f[20], line_no));
      if (f[21].size() != 1) {
        throw MalformedLog("line " + std::to_string(line_no) + ": bad phase \"" + f[21] + "\"");
      }
      series.phase.push_back(f[21][0]);
      series.task.push_back(parse_flag(f[22], line_no));
      series.constraint.push_back(parse_flag(f[23], line_no));
      series.coordinating.push_back(parse_flag(f[24], line_no));
    } else if (f.front() == "opt") {
      if (f.size() != kOptFields) {
        throw MalformedLog("line " + std::to_string(line_no) + ": opt row has " +
                           std::to_string(f.size()) + " fields, expected " + std::to_string(kOptFields));
      }
    } else if (f.front() == "end") {
      if (f.size() != kEndFields) {
        throw MalformedLog("line " + std::to_string(line_no) + ": end row has " +
                           std::to_string(f.size()) + " fields, expected " + std::to_string(kEndFields));
      }
    } else {
      throw MalformedLog("line " + std::to_string(line_no) + ": unknown row type \"" + f.front() + "\"");
    }
  }
  return series;
}

PlotSeries load_episode_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedLog("cannot open log: " + path);
  return parse_episode_log(in);
}

void write_plot_files(const PlotSeries& series, const std::string& out_prefix) {
  const auto open = [&](const std::string& suffix) {
    std::ofstream out(out_prefix + suffix);
    if (!out) throw MalformedLog("cannot open output: " + out_prefix + suffix);
    return out;
  };

  {
    std::ofstream out = open("_error.csv");
    out << "time_s,error_deg\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << format_double(series.time_s[i]) << ',' << format_double(series.error_deg[i]) << "\n";
    }
  }
  {
    std::ofstream out = open("_force.csv");
    out << "time_s,grip_force_n\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << format_double(series.time_s[i]) << ',' << format_double(series.grip_force_n[i]) << "\n";
    }
  }
  {
    std::ofstream out = open("_slip.csv");
    out << "time_s,s1_norm_left,s2_left,s1_norm_right,s2_right\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << format_double(series.time_s[i]) << ',' << format_double(series.s1_norm_left[i]) << ','
          << format_double(series.s2_left[i]) << ',' << format_double(series.s1_norm_right[i]) << ','
          << format_double(series.s2_right[i]) << "\n";
    }
  }
  {
    std::ofstream out = open("_activity.csv");
    out << "time_s,phase,task,constraint,coordinating\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << format_double(series.time_s[i]) << ',' << series.phase[i] << ',' << series.task[i] << ','
          << series.constraint[i] << ',' << series.coordinating[i] << "\n";
    }
  }
}

void emit_plots(const std::string& log_path, const std::string& out_prefix) {
  write_plot_files(load_episode_log(log_path), out_prefix);
}

}  // namespace pivot
