#include "pivot/geometry.hpp"

#include <cmath>

namespace pivot {

const char* frame_name(FrameId f) {
  switch (f) {
    case FrameId::Ground:
      return "Ground";
    case FrameId::Hand:
      return "Hand";
    case FrameId::SensorLeft:
      return "SensorLeft";
    case FrameId::SensorRight:
      return "SensorRight";
  }
  return "?";
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m, FrameId from, FrameId to) {
  const double ortho_err = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
  if (!m.allFinite() || ortho_err > 1e-9 || m.determinant() < 0.0) {
    throw BadRotation("matrix is not a proper rotation (orthonormality error " + std::to_string(ortho_err) + ")");
  }
  return Rotation(m, from, to);
}

Rotation Rotation::about_axis(const Eigen::Vector3d& axis, double angle_rad, FrameId from, FrameId to) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle_rad)) {
    throw BadRotation("axis must be nonzero and angle finite");
  }
  return Rotation(Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix(), from, to);
}

Rotation Rotation::operator*(const Rotation& rhs) const {
  if (from_ != rhs.to_) {
    throw FrameMismatch(std::string("cannot compose ") + frame_name(rhs.from_) + "->" + frame_name(rhs.to_) +
                        " with " + frame_name(from_) + "->" + frame_name(to_));
  }
  return Rotation(m_ * rhs.m_, rhs.from_, to_);
}

FramedVec3 Rotation::operator*(const FramedVec3& in) const {
  if (in.frame != from_) {
    throw FrameMismatch(std::string("vector in ") + frame_name(in.frame) + " given to " + frame_name(from_) + "->" +
                        frame_name(to_) + " rotation");
  }
  return {m_ * in.v, to_};
}

Rotation rpy_to_rotation(const RpyVector& rpy) {
  if (!std::isfinite(rpy.about_z) || !std::isfinite(rpy.about_y) || !std::isfinite(rpy.about_x)) {
    throw BadRotation("rpy angles must be finite");
  }
  const Eigen::Matrix3d m = (Eigen::AngleAxisd(rpy.about_z, Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(rpy.about_y, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(rpy.about_x, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  return Rotation::from_matrix(m, FrameId::Ground, FrameId::Ground);
}

RpyVector rotation_to_rpy(const Eigen::Matrix3d& m) {
  // For R = Rz(a) Ry(b) Rx(c):
  //   m(2,0) = -sin b,  m(1,0)/m(0,0) = tan a,  m(2,1)/m(2,2) = tan c.
  RpyVector out;
  const double sb = -m(2, 0);
  out.about_y = std::asin(std::clamp(sb, -1.0, 1.0));
  if (std::abs(sb) > 1.0 - 1e-12) {
    // Gimbal-lock: split the remaining rotation arbitrarily but consistently.
    out.about_z = std::atan2(-m(0, 1), m(1, 1));
    out.about_x = 0.0;
  } else {
    out.about_z = std::atan2(m(1, 0), m(0, 0));
    out.about_x = std::atan2(m(2, 1), m(2, 2));
  }
  return out;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-14) {
    Eigen::Matrix3d skew;
    skew << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return Eigen::Matrix3d::Identity() + skew;  // first-order, error O(angle^2) < 1e-28
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& m) {
  const Eigen::AngleAxisd aa(m);
  return aa.angle() * aa.axis();
}

double geodesic_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  // Quaternion form: accurate near 0 and pi, where the acos-of-trace
  // formula loses half the significant digits.
  const Eigen::Quaterniond d = Eigen::Quaterniond(a).conjugate() * Eigen::Quaterniond(b);
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m) {
  return Eigen::Quaterniond(m).normalized().toRotationMatrix();
}

}  // namespace pivot
