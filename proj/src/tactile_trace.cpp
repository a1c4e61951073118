#include "pivot/tactile_trace.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pivot {

namespace {

void append_double(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

double parse_double(std::istringstream& s, const char* what, std::size_t line_no) {
  std::string tok;
  if (!(s >> tok)) {
    throw MalformedTrace("line " + std::to_string(line_no) + ": missing " + what);
  }
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw MalformedTrace("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" + tok + "'");
  }
  return v;
}

}  // namespace

void write_marker_trace(std::ostream& out, std::span<const TraceRecord> records) {
  std::string line;
  for (const auto& rec : records) {
    rec.field.validate();
    line.clear();
    line += std::to_string(rec.tick);
    line += ' ';
    line += rec.field.finger == Finger::Left ? '0' : '1';
    line += ' ';
    line += std::to_string(rec.field.size());
    line += '\n';
    out << line;
    for (std::size_t i = 0; i < rec.field.size(); ++i) {
      line.clear();
      for (const auto* vec : {&rec.field.ref_positions[i], &rec.field.displacements[i], &rec.field.normals[i]}) {
        for (int k = 0; k < 3; ++k) {
          append_double(line, (*vec)[k]);
          line += ' ';
        }
      }
      line.back() = '\n';
      out << line;
    }
  }
}

std::vector<TraceRecord> read_marker_trace(std::istream& in) {
  std::vector<TraceRecord> records;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.empty()) continue;
    std::istringstream header(raw);
    TraceRecord rec;
    int finger_code = -1;
    long count = -1;
    if (!(header >> rec.tick >> finger_code >> count)) {
      throw MalformedTrace("line " + std::to_string(line_no) + ": bad record header '" + raw + "'");
    }
    if (finger_code != 0 && finger_code != 1) {
      throw MalformedTrace("line " + std::to_string(line_no) + ": finger code must be 0 or 1");
    }
    if (count < 0) {
      throw MalformedTrace("line " + std::to_string(line_no) + ": negative marker count");
    }
    rec.field.finger = finger_code == 0 ? Finger::Left : Finger::Right;
    rec.field.ref_positions.reserve(count);
    rec.field.displacements.reserve(count);
    rec.field.normals.reserve(count);
    for (long i = 0; i < count; ++i) {
      if (!std::getline(in, raw)) {
        throw MalformedTrace("record at line " + std::to_string(line_no) + ": truncated after " + std::to_string(i) +
                             " of " + std::to_string(count) + " markers");
      }
      ++line_no;
      std::istringstream row(raw);
      Eigen::Vector3d ref, disp, nrm;
      for (int k = 0; k < 3; ++k) ref[k] = parse_double(row, "ref coordinate", line_no);
      for (int k = 0; k < 3; ++k) disp[k] = parse_double(row, "displacement coordinate", line_no);
      for (int k = 0; k < 3; ++k) nrm[k] = parse_double(row, "normal coordinate", line_no);
      std::string extra;
      if (row >> extra) {
        throw MalformedTrace("line " + std::to_string(line_no) + ": trailing token '" + extra + "'");
      }
      rec.field.ref_positions.push_back(ref);
      rec.field.displacements.push_back(disp);
      rec.field.normals.push_back(nrm);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_marker_trace_file(const std::string& path, std::span<const TraceRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_marker_trace(out, records);
}

std::vector<TraceRecord> read_marker_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return read_marker_trace(in);
}

}  // namespace pivot
