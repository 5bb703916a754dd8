#pragma once

#include <cmath>
#include <numbers>

#include "msfuse/calib/camera.hpp"

namespace msfuse::calib {

/// Two calibrated cameras; right_to_left maps right-camera coordinates into the left camera frame.
struct StereoRig {
  PinholeCamera left;
  PinholeCamera right;
  RigidTransform right_to_left;

  double baseline() const { return right_to_left.t.norm(); }

  /// Angle between the two optical axes, degrees.
  double convergence_deg() const {
    const Vec3 axis_right = right_to_left.R * Vec3::UnitZ();
    return std::acos(std::clamp(axis_right.z(), -1.0, 1.0)) * 180.0 / std::numbers::pi;
  }
};

}  // namespace msfuse::calib
