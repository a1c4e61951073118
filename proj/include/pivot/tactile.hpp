#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pivot {

enum class Finger : std::uint8_t { Left, Right };

const char* finger_name(Finger f);

class TactileError : public std::runtime_error {
 public:
  explicit TactileError(const std::string& what) : std::runtime_error(what) {}
};

class TooFewMarkers : public TactileError {
 public:
  explicit TooFewMarkers(const std::string& what) : TactileError(what) {}
};

class DegenerateNormal : public TactileError {
 public:
  explicit DegenerateNormal(const std::string& what) : TactileError(what) {}
};

// One tactile reading: marker rest positions, their current displacements
// and the local contact normals, all expressed in that finger's sensor
// frame.  Positions and displacements are millimetres; normals are unit.
struct MarkerField {
  Finger finger = Finger::Left;
  std::vector<Eigen::Vector3d> ref_positions;
  std::vector<Eigen::Vector3d> displacements;
  std::vector<Eigen::Vector3d> normals;

  std::size_t size() const { return ref_positions.size(); }

  // Throws TactileError subclasses on inconsistent sizes, non-finite
  // entries or non-unit normals (checked to 1e-6).
  void validate() const;
};

// Slip summary for one finger.  s1 is the mean marker displacement (mm, in
// the sensor frame); s2 is the mean moment of displacement about the marker
// centroid projected on the contact normal (mm) and signals in-hand
// rotation of the contact patch.
struct SlipMetrics {
  Eigen::Vector3d s1 = Eigen::Vector3d::Zero();
  double s2 = 0.0;
};

// Area-mean contact normal, renormalised to unit length.  Throws
// DegenerateNormal if the normals cancel to (near) zero.
Eigen::Vector3d mean_normal(const MarkerField& field);

// Computes both slip metrics.  Requires at least 3 markers.  Markers lying
// on the centroid of the reference pattern (within 1e-9 mm) contribute
// nothing to s2 and are excluded from its normalising count.
SlipMetrics slip_metrics(const MarkerField& field);

// Minimum tangential magnitude treated as signal rather than noise (mm).
inline constexpr double kTangentFloorMm = 1e-6;

// Unit direction of the translational slip component tangent to the
// contact: normalize(s1 - (s1.n)n).  Returns nullopt when the tangential
// residual is below `floor_mm`; callers treat that as "no slip direction
// this cycle" rather than an error.
std::optional<Eigen::Vector3d> tangential_direction(const SlipMetrics& metrics, const Eigen::Vector3d& normal,
                                                    double floor_mm = kTangentFloorMm);

// Finger whose tactile signal drives the control reaction this cycle: the
// one with the larger ||s1||, ties resolved to Left for determinism.
struct SignalSelection {
  Finger finger = Finger::Left;
  SlipMetrics metrics;
};

SignalSelection select_signal_finger(const SlipMetrics& left, const SlipMetrics& right);

// One control cycle's tactile output for both fingers.
struct TactileFrame {
  MarkerField left;
  MarkerField right;
  long tick = 0;
  double sim_time_s = 0.0;
};

}  // namespace pivot
