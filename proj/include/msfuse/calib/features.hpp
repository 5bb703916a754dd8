#pragma once

#include <optional>
#include <unordered_set>
#include <vector>

#include "msfuse/calib/camera.hpp"

namespace msfuse::calib {

struct CheckerboardSpec {
  int inner_rows = 6;
  int inner_cols = 9;
  double square_size = 0.01;  ///< meters

  int corner_count() const { return inner_rows * inner_cols; }
  int id(int row, int col) const { return row * inner_cols + col; }
  Vec3 model_point(int row, int col) const { return {col * square_size, row * square_size, 0.0}; }

  void validate() const {
    if (inner_rows < 3 || inner_cols < 3) throw ConfigError("checkerboard needs at least 3x3 inner corners");
    if (!(square_size > 0.0)) throw ConfigError("checkerboard square size must be positive");
  }
};

struct FeatureMatch {
  int id = 0;
  Vec2 image;
  Vec3 model;
};

/// ID-keyed 2D-3D correspondences from one calibration view.
struct FeatureSet {
  int view_id = 0;
  std::vector<FeatureMatch> matches;

  std::optional<FeatureMatch> find(int id) const {
    for (const auto& m : matches)
      if (m.id == id) return m;
    return std::nullopt;
  }

  bool ids_unique() const {
    std::unordered_set<int> seen;
    for (const auto& m : matches)
      if (!seen.insert(m.id).second) return false;
    return true;
  }
};

/// Projects every board corner; the synthesis half of synthesis-then-recovery checks.
inline FeatureSet synthesize_features(const CheckerboardSpec& spec, const PinholeCamera& cam,
                                      const RigidTransform& board_to_cam, int view_id = 0) {
  FeatureSet set{view_id, {}};
  for (int r = 0; r < spec.inner_rows; ++r)
    for (int c = 0; c < spec.inner_cols; ++c) {
      const Vec3 X = spec.model_point(r, c);
      set.matches.push_back({spec.id(r, c), project(cam, board_to_cam, X), X});
    }
  return set;
}

}  // namespace msfuse::calib
