#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Eigenvalues>

#include "msfuse/calib/triangulate.hpp"

namespace msfuse::calib {

struct DistancePair {
  int id_a = 0;
  int id_b = 0;
  double known_m = 0.0;
};

struct DistanceCheck {
  DistancePair pair;
  double measured_m = 0.0;
  double abs_error_m = 0.0;
  double rel_error = 0.0;
};

struct MeasurementStats {
  std::vector<DistanceCheck> checks;
  std::vector<DistancePair> skipped;  ///< pairs with an id missing from either view
  double mean_abs_m = 0.0, max_abs_m = 0.0;
  double mean_rel = 0.0, max_rel = 0.0;
};

/// Adjacent-corner pairs along rows and columns (known distance = square size) plus both board diagonals.
inline std::vector<DistancePair> checkerboard_distance_pairs(const CheckerboardSpec& spec) {
  std::vector<DistancePair> pairs;
  const double s = spec.square_size;
  for (int r = 0; r < spec.inner_rows; ++r)
    for (int c = 0; c < spec.inner_cols; ++c) {
      if (c + 1 < spec.inner_cols) pairs.push_back({spec.id(r, c), spec.id(r, c + 1), s});
      if (r + 1 < spec.inner_rows) pairs.push_back({spec.id(r, c), spec.id(r + 1, c), s});
    }
  const double diag = s * std::hypot(spec.inner_rows - 1, spec.inner_cols - 1);
  pairs.push_back({spec.id(0, 0), spec.id(spec.inner_rows - 1, spec.inner_cols - 1), diag});
  pairs.push_back({spec.id(0, spec.inner_cols - 1), spec.id(spec.inner_rows - 1, 0), diag});
  return pairs;
}

/// Compares reconstructed inter-feature distances against known ones.
inline MeasurementStats validate_measurement(const StereoRig& rig, const FeatureSet& left, const FeatureSet& right,
                                             const std::vector<DistancePair>& pairs) {
  std::map<int, Vec3> points;
  for (const auto& t : triangulate_features(rig, left, right)) points[t.id] = t.result.point;

  MeasurementStats st;
  for (const auto& p : pairs) {
    auto a = points.find(p.id_a);
    auto b = points.find(p.id_b);
    if (a == points.end() || b == points.end()) {
      st.skipped.push_back(p);
      continue;
    }
    DistanceCheck c{p, (a->second - b->second).norm(), 0.0, 0.0};
    c.abs_error_m = std::abs(c.measured_m - p.known_m);
    c.rel_error = p.known_m > 0.0 ? c.abs_error_m / p.known_m : 0.0;
    st.checks.push_back(c);
  }
  for (const auto& c : st.checks) {
    st.mean_abs_m += c.abs_error_m;
    st.mean_rel += c.rel_error;
    st.max_abs_m = std::max(st.max_abs_m, c.abs_error_m);
    st.max_rel = std::max(st.max_rel, c.rel_error);
  }
  if (!st.checks.empty()) {
    st.mean_abs_m /= static_cast<double>(st.checks.size());
    st.mean_rel /= static_cast<double>(st.checks.size());
  }
  return st;
}

struct PlanarityStats {
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double rms_m = 0.0;
  double max_m = 0.0;
  std::vector<double> residuals;  ///< signed point-plane distances
};

/// Least-squares plane through the points (smallest principal direction) and the point-plane residuals.
inline PlanarityStats validate_planarity(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw DegenerateError("planarity needs at least 3 points");
  PlanarityStats st;
  for (const auto& p : points) st.centroid += p;
  st.centroid /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) cov += (p - st.centroid) * (p - st.centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  st.normal = eig.eigenvectors().col(0);
  double ss = 0.0;
  for (const auto& p : points) {
    const double d = (p - st.centroid).dot(st.normal);
    st.residuals.push_back(d);
    ss += d * d;
    st.max_m = std::max(st.max_m, std::abs(d));
  }
  st.rms_m = std::sqrt(ss / static_cast<double>(points.size()));
  return st;
}

}  // namespace msfuse::calib
