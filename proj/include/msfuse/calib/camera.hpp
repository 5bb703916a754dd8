#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "msfuse/errors.hpp"

namespace msfuse::calib {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics with even-polynomial radial distortion in normalized coordinates.
/// The principal point sits at the image center for physical cameras and is never optimized.
struct PinholeCamera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  int width = 0, height = 0;
  double pixel_pitch_um = 5.5;

  static PinholeCamera centered(double fx, double fy, int width, int height, double k1 = 0.0, double k2 = 0.0,
                                double k3 = 0.0, double pixel_pitch_um = 5.5) {
    return PinholeCamera{fx, fy, width / 2.0, height / 2.0, k1, k2, k3, width, height, pixel_pitch_um};
  }

  double focal_mm_x() const { return fx * pixel_pitch_um * 1e-3; }

  bool has_distortion() const { return k1 != 0.0 || k2 != 0.0 || k3 != 0.0; }

  double radial_factor(double r2) const { return 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3)); }

  Vec2 distort(const Vec2& n) const { return n * radial_factor(n.squaredNorm()); }

  /// Inverse of distort(): 10 fixed-point sweeps, then Newton on the radial polynomial.
  Vec2 undistort(const Vec2& d) const {
    if (!has_distortion()) return d;
    Vec2 p = d;
    for (int i = 0; i < 10; ++i) p = d / radial_factor(p.squaredNorm());
    const double rd = d.norm();
    if (rd == 0.0) return p;
    double r = p.norm();
    for (int i = 0; i < 30; ++i) {
      const double r2 = r * r;
      const double g = r * radial_factor(r2) - rd;
      const double dg = 1.0 + r2 * (3.0 * k1 + r2 * (5.0 * k2 + r2 * 7.0 * k3));
      if (dg <= 0.0) break;
      const double step = g / dg;
      r -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + r)) break;
    }
    return d * (r / rd);
  }

  Vec2 to_pixel(const Vec2& distorted) const { return {fx * distorted.x() + cx, fy * distorted.y() + cy}; }
  Vec2 to_normalized(const Vec2& px) const { return {(px.x() - cx) / fx, (px.y() - cy) / fy}; }

  /// Undistorted normalized ray (x, y, 1) through a pixel.
  Vec3 ray(const Vec2& px) const {
    const Vec2 n = undistort(to_normalized(px));
    return {n.x(), n.y(), 1.0};
  }
};

/// X_target = R * X_source + t.
struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_rotation_vector(const Vec3& rvec, const Vec3& t) {
    const double angle = rvec.norm();
    Mat3 R = angle > 0.0 ? Eigen::AngleAxisd(angle, rvec / angle).toRotationMatrix() : Mat3::Identity();
    return {R, t};
  }

  Vec3 rotation_vector() const {
    Eigen::AngleAxisd aa(R);
    return aa.axis() * aa.angle();
  }

  Vec3 apply(const Vec3& x) const { return R * x + t; }

  RigidTransform inverse() const { return {R.transpose(), -R.transpose() * t}; }

  /// (a * b)(x) = a(b(x))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {a.R * b.R, a.R * b.t + a.t};
  }

  bool is_rotation(double tol = 1e-9) const {
    return (R.transpose() * R - Mat3::Identity()).norm() <= tol && std::abs(R.determinant() - 1.0) <= tol;
  }
};

/// Camera center of a world->camera transform, expressed in world coordinates.
inline Vec3 camera_center(const RigidTransform& world_to_cam) { return -world_to_cam.R.transpose() * world_to_cam.t; }

/// Rotation angle between two rotations, radians.
inline double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

/// Returns nullopt for points at or behind the camera plane.
inline std::optional<Vec2> try_project(const PinholeCamera& cam, const RigidTransform& pose, const Vec3& point) {
  const Vec3 pc = pose.apply(point);
  if (!(pc.z() > 0.0)) return std::nullopt;
  return cam.to_pixel(cam.distort(Vec2(pc.x() / pc.z(), pc.y() / pc.z())));
}

inline Vec2 project(const PinholeCamera& cam, const RigidTransform& pose, const Vec3& point) {
  auto px = try_project(cam, pose, point);
  if (!px) throw ProjectionError("point projects from behind the camera");
  return *px;
}

}  // namespace msfuse::calib
