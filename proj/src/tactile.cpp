#include "pivot/tactile.hpp"

#include <cmath>

namespace pivot {

namespace {

constexpr double kCentroidCoincidenceMm = 1e-9;

}  // namespace

const char* finger_name(Finger f) { return f == Finger::Left ? "left" : "right"; }

void MarkerField::validate() const {
  if (displacements.size() != ref_positions.size() || normals.size() != ref_positions.size()) {
    throw TactileError("marker field arrays have inconsistent sizes");
  }
  for (std::size_t i = 0; i < ref_positions.size(); ++i) {
    if (!ref_positions[i].allFinite() || !displacements[i].allFinite() || !normals[i].allFinite()) {
      throw TactileError("marker field contains non-finite entries");
    }
    if (std::abs(normals[i].norm() - 1.0) > 1e-6) {
      throw TactileError("marker normal " + std::to_string(i) + " is not unit length");
    }
  }
}

Eigen::Vector3d mean_normal(const MarkerField& field) {
  field.validate();
  if (field.size() == 0) {
    throw TooFewMarkers("mean_normal needs at least one marker");
  }
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& n : field.normals) sum += n;
  const double len = sum.norm();
  if (len < 1e-9 * static_cast<double>(field.size())) {
    throw DegenerateNormal("contact normals cancel; mean normal undefined");
  }
  return sum / len;
}

SlipMetrics slip_metrics(const MarkerField& field) {
  field.validate();
  const std::size_t n = field.size();
  if (n < 3) {
    throw TooFewMarkers("slip metrics need at least 3 markers, got " + std::to_string(n));
  }

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : field.ref_positions) centroid += p;
  centroid /= static_cast<double>(n);

  const Eigen::Vector3d normal = mean_normal(field);

  SlipMetrics out;
  double moment_sum = 0.0;
  std::size_t moment_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.s1 += field.displacements[i];
    const Eigen::Vector3d to_centroid = centroid - field.ref_positions[i];
    const double dist = to_centroid.norm();
    if (dist < kCentroidCoincidenceMm) continue;  // no lever arm: direction undefined
    moment_sum += (to_centroid / dist).cross(field.displacements[i]).dot(normal);
    ++moment_count;
  }
  out.s1 /= static_cast<double>(n);
  out.s2 = moment_count > 0 ? moment_sum / static_cast<double>(moment_count) : 0.0;
  return out;
}

std::optional<Eigen::Vector3d> tangential_direction(const SlipMetrics& metrics, const Eigen::Vector3d& normal,
                                                    double floor_mm) {
  const Eigen::Vector3d tangential = metrics.s1 - metrics.s1.dot(normal) * normal;
  const double len = tangential.norm();
  if (len < floor_mm) return std::nullopt;
  return tangential / len;
}

SignalSelection select_signal_finger(const SlipMetrics& left, const SlipMetrics& right) {
  if (right.s1.norm() > left.s1.norm()) return {Finger::Right, right};
  return {Finger::Left, left};
}

}  // namespace pivot
