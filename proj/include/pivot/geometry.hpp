#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pivot {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Coordinate frames used throughout the library.
//   Ground      : fixed world frame, Z up.
//   Hand        : gripper palm frame; fingers close along Hand Y.
//   SensorLeft  : tactile pad frame on the finger at +Y of the hand.
//   SensorRight : tactile pad frame on the finger at -Y of the hand.
// Sensor frames have Z pointing out of the pad into the grasped object.
enum class FrameId : std::uint8_t { Ground, Hand, SensorLeft, SensorRight };

const char* frame_name(FrameId f);

// Thrown when framed quantities from incompatible frames are combined.
// This always indicates a programming error, hence logic_error.
class FrameMismatch : public std::logic_error {
 public:
  explicit FrameMismatch(const std::string& what) : std::logic_error(what) {}
};

class BadRotation : public std::invalid_argument {
 public:
  explicit BadRotation(const std::string& what) : std::invalid_argument(what) {}
};

// A 3-vector tagged with the frame its coordinates are expressed in.
struct FramedVec3 {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  FrameId frame = FrameId::Ground;
};

// =========================================================================
// Rotation: a frame-tagged proper rotation matrix
// =========================================================================
//
// A Rotation maps coordinates of a vector expressed in `from` to the same
// vector expressed in `to`.  Composition and vector transforms check the
// tags, so accidental use of a matrix in the wrong direction fails loudly
// instead of producing silently wrong numbers.
class Rotation {
 public:
  // Identity mapping of a frame onto itself.
  static Rotation identity(FrameId frame) { return Rotation(Eigen::Matrix3d::Identity(), frame, frame); }

  // Wraps an existing matrix; throws BadRotation unless it is orthonormal
  // with determinant +1 (checked to 1e-9).
  static Rotation from_matrix(const Eigen::Matrix3d& m, FrameId from, FrameId to);

  // Rotation by `angle_rad` about `axis` (need not be unit length).
  static Rotation about_axis(const Eigen::Vector3d& axis, double angle_rad, FrameId from, FrameId to);

  const Eigen::Matrix3d& matrix() const { return m_; }
  FrameId from_frame() const { return from_; }
  FrameId to_frame() const { return to_; }

  Rotation inverse() const { return Rotation(m_.transpose(), to_, from_); }

  // Composition: (A: H->G) * (B: C->H) = C->G.  Throws FrameMismatch if the
  // inner frames disagree.
  Rotation operator*(const Rotation& rhs) const;

  // Vector transform; the input must be expressed in from_frame().
  FramedVec3 operator*(const FramedVec3& in) const;

  // Convenience for callers that track frames themselves.
  Eigen::Vector3d apply(const Eigen::Vector3d& v) const { return m_ * v; }

 private:
  Rotation(const Eigen::Matrix3d& m, FrameId from, FrameId to) : m_(m), from_(from), to_(to) {}

  Eigen::Matrix3d m_;
  FrameId from_;
  FrameId to_;
};

// =========================================================================
// Roll-pitch-yaw increments
// =========================================================================
//
// (theta1, theta2, theta3) are rotations about the ground Z, Y and X axes.
// The resulting operator is R(Z,theta1) * R(Y,theta2) * R(X,theta3), i.e.
// the X rotation is applied first.  Angles are radians and treated as
// per-cycle increments, so magnitudes stay small in normal operation.
struct RpyVector {
  double about_z = 0.0;
  double about_y = 0.0;
  double about_x = 0.0;

  Eigen::Vector3d as_vector() const { return {about_z, about_y, about_x}; }
  static RpyVector from_vector(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

// Builds the ground-frame rotation operator for an RPY increment.
Rotation rpy_to_rotation(const RpyVector& rpy);

// Inverse of rpy_to_rotation for the non-degenerate range |pitch| < pi/2.
// Angles come back in principal ranges (|about_z|,|about_x| <= pi,
// |about_y| <= pi/2), which is ample for per-cycle increments.
RpyVector rotation_to_rpy(const Eigen::Matrix3d& m);

// Matrix exponential / logarithm on rotations (Rodrigues form).
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& axis_times_angle);
Eigen::Vector3d log_so3(const Eigen::Matrix3d& m);

// Geodesic distance between two rotations, radians in [0, pi].
double geodesic_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// Nearest proper rotation to an almost-orthonormal matrix (drift cleanup).
Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m);

}  // namespace pivot
