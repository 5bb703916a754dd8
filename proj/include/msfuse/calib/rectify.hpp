#pragma once

#include <cmath>
#include <limits>

#include "msfuse/calib/rig.hpp"
#include "msfuse/remap.hpp"

namespace msfuse::calib {

enum class PrincipalPointMode {
  shared,      ///< both rectified views keep the image center; infinity maps to zero disparity
  recentered,  ///< each view is shifted so its original image center stays centered (converged rigs)
};

struct RectifyOptions {
  PrincipalPointMode principal_point = PrincipalPointMode::shared;
  int width = 0;   ///< 0: keep the left camera size
  int height = 0;
};

struct Rectification {
  RemapField map_left;
  RemapField map_right;
  StereoRig rectified;  ///< distortion-free, identical orientation, baseline along +x
  Mat3 rotate_left = Mat3::Identity();   ///< original left camera frame -> rectified frame
  Mat3 rotate_right = Mat3::Identity();  ///< original right camera frame -> rectified frame

  /// cx_right - cx_left of the rectified cameras; depth = f * B / (d + disparity_offset).
  double disparity_offset() const { return rectified.right.cx - rectified.left.cx; }

  Vec2 to_rectified(bool left, const Vec2& original_px) const {
    const PinholeCamera& src = left ? original_left : original_right;
    const PinholeCamera& dst = left ? rectified.left : rectified.right;
    const Vec3 r = (left ? rotate_left : rotate_right) * src.ray(original_px);
    return {dst.fx * r.x() / r.z() + dst.cx, dst.fy * r.y() / r.z() + dst.cy};
  }

  PinholeCamera original_left;
  PinholeCamera original_right;
};

namespace detail {
inline RemapField rectify_map(const PinholeCamera& original, const PinholeCamera& rect, const Mat3& rotate) {
  RemapField f{Image<float>(rect.width, rect.height), Image<float>(rect.width, rect.height)};
  const Mat3 back = rotate.transpose();
  for (int y = 0; y < rect.height; ++y)
    for (int x = 0; x < rect.width; ++x) {
      const Vec3 ray((x - rect.cx) / rect.fx, (y - rect.cy) / rect.fy, 1.0);
      const auto px = try_project(original, RigidTransform{back, Vec3::Zero()}, ray);
      f.src_x(x, y) = px ? static_cast<float>(px->x()) : std::numeric_limits<float>::quiet_NaN();
      f.src_y(x, y) = px ? static_cast<float>(px->y()) : std::numeric_limits<float>::quiet_NaN();
    }
  return f;
}
}  // namespace detail

/// Rotates both views onto a common image plane whose x axis follows the baseline.
inline Rectification rectify(const StereoRig& rig, const RectifyOptions& opt = {}) {
  const Vec3 t = rig.right_to_left.t;
  if (!(t.norm() > 0.0)) throw DegenerateError("cannot rectify a zero-baseline rig");
  const Vec3 e1 = t.normalized();
  const Vec3 z_mean = (Vec3::UnitZ() + rig.right_to_left.R * Vec3::UnitZ()).normalized();
  Vec3 e2 = z_mean.cross(e1);
  if (e2.norm() < 1e-12) throw DegenerateError("baseline parallel to the optical axes");
  e2.normalize();
  const Vec3 e3 = e1.cross(e2);

  Rectification out;
  out.original_left = rig.left;
  out.original_right = rig.right;
  out.rotate_left.row(0) = e1.transpose();
  out.rotate_left.row(1) = e2.transpose();
  out.rotate_left.row(2) = e3.transpose();
  out.rotate_right = out.rotate_left * rig.right_to_left.R;

  const int w = opt.width > 0 ? opt.width : rig.left.width;
  const int h = opt.height > 0 ? opt.height : rig.left.height;
  const double f = 0.25 * (rig.left.fx + rig.left.fy + rig.right.fx + rig.right.fy);
  PinholeCamera L = PinholeCamera::centered(f, f, w, h, 0, 0, 0, rig.left.pixel_pitch_um);
  PinholeCamera R = PinholeCamera::centered(f, f, w, h, 0, 0, 0, rig.right.pixel_pitch_um);

  if (opt.principal_point == PrincipalPointMode::recentered) {
    const Vec3 axis_l = out.rotate_left * Vec3::UnitZ();
    const Vec3 axis_r = out.rotate_right * Vec3::UnitZ();
    L.cx = w / 2.0 - f * axis_l.x() / axis_l.z();
    R.cx = w / 2.0 - f * axis_r.x() / axis_r.z();
    const double cy = h / 2.0 - 0.5 * f * (axis_l.y() / axis_l.z() + axis_r.y() / axis_r.z());
    L.cy = R.cy = cy;
  }

  out.rectified.left = L;
  out.rectified.right = R;
  out.rectified.right_to_left = {Mat3::Identity(), Vec3(t.norm(), 0.0, 0.0)};
  out.map_left = detail::rectify_map(rig.left, L, out.rotate_left);
  out.map_right = detail::rectify_map(rig.right, R, out.rotate_right);
  return out;
}

}  // namespace msfuse::calib
