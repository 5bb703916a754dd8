#pragma once

#include <cmath>
#include <vector>

#include "msfuse/calib/features.hpp"
#include "msfuse/calib/rig.hpp"

namespace msfuse::calib {

struct Triangulated {
  Vec3 point;              ///< left-camera frame, meters
  double gap = 0.0;        ///< length of the common perpendicular between the rays
  bool low_confidence = false;
};

/// Midpoint of the common perpendicular of the two back-projected rays.
inline Triangulated triangulate(const StereoRig& rig, const Vec2& px_left, const Vec2& px_right) {
  const Vec3 o1 = Vec3::Zero();
  const Vec3 d1 = rig.left.ray(px_left).normalized();
  const Vec3 o2 = rig.right_to_left.t;
  const Vec3 d2 = (rig.right_to_left.R * rig.right.ray(px_right)).normalized();

  const Vec3 w0 = o1 - o2;
  const double b = d1.dot(d2);
  const double d = d1.dot(w0);
  const double e = d2.dot(w0);
  const double denom = 1.0 - b * b;
  if (!(denom > 1e-14)) throw DegenerateError("rays are parallel; cannot triangulate");
  const double s = (b * e - d) / denom;
  const double u = (e - b * d) / denom;
  const Vec3 p1 = o1 + s * d1;
  const Vec3 p2 = o2 + u * d2;

  Triangulated out;
  out.point = 0.5 * (p1 + p2);
  out.gap = (p1 - p2).norm();
  out.low_confidence = denom < 1e-6 || s <= 0.0 || u <= 0.0;
  return out;
}

struct TriangulatedFeature {
  int id = 0;
  Triangulated result;
};

/// Triangulates every id present in both sets.
inline std::vector<TriangulatedFeature> triangulate_features(const StereoRig& rig, const FeatureSet& left,
                                                             const FeatureSet& right) {
  std::vector<TriangulatedFeature> out;
  for (const auto& m : left.matches)
    if (auto r = right.find(m.id)) out.push_back({m.id, triangulate(rig, m.image, r->image)});
  return out;
}

}  // namespace msfuse::calib
