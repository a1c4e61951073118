#pragma once

#include <Eigen/Dense>

#include "pivot/geometry.hpp"

namespace pivot {

// One control cycle's worth of gripper actuation.  Linear velocity is held
// for the whole cycle; the rotation increment is spread evenly over the
// cycle's substeps; grip force is the commanded squeeze per finger.
struct GripperCommand {
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();  // mm/s, ground frame
  RpyVector rotation;                                         // rad per cycle, ground axes
  double grip_force_n = 0.0;
};

}  // namespace pivot
