#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "msfuse/calib/camera.hpp"
#include "msfuse/calib/features.hpp"
#include "msfuse/synth/material.hpp"

namespace msfuse::synth {

using calib::RigidTransform;
using calib::Vec2;
using calib::Vec3;

struct Swatch {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;  ///< patch-local meters
  int material = 0;
  bool contains(double x, double y) const { return x >= x_min && x < x_max && y >= y_min && y < y_max; }
};

enum class TextureKind { uniform, tiles, checkerboard };

/// Material map of a patch. Checkerboards place inner corner (0,0) at the local origin; the outer
/// square diagonal to it uses `material` (dark), its neighbors `material_alt` (bright).
struct Texture {
  TextureKind kind = TextureKind::uniform;
  int material = 0;
  int material_alt = 1;
  std::vector<int> palette;
  double tile_size = 0.001;
  std::uint64_t seed = 1;
  calib::CheckerboardSpec board;
  std::vector<Swatch> swatches;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Planar rectangle; `pose` maps patch-local coordinates (plane z = 0) into the world.
struct Patch {
  std::string name;
  RigidTransform pose;
  double x_min = -0.01, y_min = -0.01, x_max = 0.01, y_max = 0.01;
  Texture texture;

  int material_at(double x, double y) const {
    for (auto it = texture.swatches.rbegin(); it != texture.swatches.rend(); ++it)
      if (it->contains(x, y)) return it->material;
    switch (texture.kind) {
      case TextureKind::uniform:
        return texture.material;
      case TextureKind::tiles: {
        if (texture.palette.empty()) return texture.material;
        const auto ix = static_cast<std::int64_t>(std::floor(x / texture.tile_size));
        const auto iy = static_cast<std::int64_t>(std::floor(y / texture.tile_size));
        const std::uint64_t h = splitmix64(texture.seed ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
                                                                     static_cast<std::uint64_t>(iy)));
        return texture.palette[static_cast<std::size_t>(h % texture.palette.size())];
      }
      case TextureKind::checkerboard: {
        const auto& b = texture.board;
        const double s = b.square_size;
        if (x < -s || y < -s || x >= b.inner_cols * s || y >= b.inner_rows * s) return texture.material_alt;
        const int col = static_cast<int>(std::floor(x / s)) + 1;
        const int row = static_cast<int>(std::floor(y / s)) + 1;
        return (row + col) % 2 == 0 ? texture.material : texture.material_alt;
      }
    }
    return texture.material;
  }

  /// Ray parameter of the intersection with this patch, if any.
  std::optional<double> intersect(const Vec3& origin, const Vec3& dir) const {
    const Vec3 n = pose.R.col(2);
    const double denom = n.dot(dir);
    if (std::abs(denom) < 1e-14) return std::nullopt;
    const double t = n.dot(pose.t - origin) / denom;
    if (!(t > 1e-12)) return std::nullopt;
    const Vec3 local = pose.R.transpose() * (origin + t * dir - pose.t);
    if (local.x() < x_min || local.x() > x_max || local.y() < y_min || local.y() > y_max) return std::nullopt;
    return t;
  }

  Vec3 to_local(const Vec3& world) const { return pose.R.transpose() * (world - pose.t); }
};

struct Hit {
  int patch = -1;
  double t = std::numeric_limits<double>::infinity();
  int material = -1;
};

struct Scene {
  std::vector<Material> materials;
  std::vector<Patch> patches;
  int background_material = -1;  ///< -1: zero reflectance where no patch is hit

  void validate() const {
    for (const auto& m : materials) m.validate();
    auto check = [&](int m) {
      if (m < -1 || m >= static_cast<int>(materials.size())) throw ConfigError("material index out of range");
    };
    check(background_material);
    for (const auto& p : patches) {
      check(p.texture.material);
      if (p.texture.kind == TextureKind::checkerboard) check(p.texture.material_alt);
      for (int m : p.texture.palette) check(m);
      for (const auto& s : p.texture.swatches) check(s.material);
      if (!p.pose.is_rotation(1e-6)) throw ConfigError("patch '" + p.name + "' has a non-rigid pose");
    }
  }

  Hit cast(const Vec3& origin, const Vec3& dir) const {
    Hit h;
    for (int i = 0; i < static_cast<int>(patches.size()); ++i) {
      const auto t = patches[static_cast<std::size_t>(i)].intersect(origin, dir);
      if (t && *t < h.t) {
        h.t = *t;
        h.patch = i;
      }
    }
    if (h.patch >= 0) {
      const auto& p = patches[static_cast<std::size_t>(h.patch)];
      const Vec3 local = p.to_local(origin + h.t * dir);
      h.material = p.material_at(local.x(), local.y());
    } else {
      h.material = background_material;
    }
    return h;
  }
};

/// World->camera poses for a toed-in pair: world origin midway between the cameras, each optical
/// axis rotated by half the convergence angle towards the other camera.
struct RigPoses {
  RigidTransform left;
  RigidTransform right;
  RigidTransform right_to_left() const { return left * right.inverse(); }
};

inline RigPoses converged_rig(double baseline_m, double convergence_deg) {
  auto make = [](double cx, double yaw_rad) {
    const Eigen::Matrix3d cam_to_world = Eigen::AngleAxisd(yaw_rad, Vec3::UnitY()).toRotationMatrix();
    RigidTransform p;
    p.R = cam_to_world.transpose();
    p.t = -p.R * Vec3(cx, 0.0, 0.0);
    return p;
  };
  const double half = 0.5 * convergence_deg * M_PI / 180.0;
  return {make(-0.5 * baseline_m, half), make(0.5 * baseline_m, -half)};
}

}  // namespace msfuse::synth
