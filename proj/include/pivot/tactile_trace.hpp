#pragma once

#include "pivot/tactile.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pivot {

class MalformedTrace : public std::runtime_error {
 public:
  explicit MalformedTrace(const std::string& what) : std::runtime_error(what) {}
};

// One recorded tactile reading.
struct TraceRecord {
  long tick = 0;
  MarkerField field;
};

// Plain-text marker trace format, one record per reading:
//
//   <tick> <finger:0|1> <marker_count>
//   <ref_x> <ref_y> <ref_z> <disp_x> <disp_y> <disp_z> <n_x> <n_y> <n_z>
//   ... (marker_count rows)
//
// Doubles are written with enough digits (%.17g) that read-back values are
// bit-identical, so recorded traces replay exactly.
void write_marker_trace(std::ostream& out, std::span<const TraceRecord> records);
std::vector<TraceRecord> read_marker_trace(std::istream& in);

void write_marker_trace_file(const std::string& path, std::span<const TraceRecord> records);
std::vector<TraceRecord> read_marker_trace_file(const std::string& path);

}  // namespace pivot
