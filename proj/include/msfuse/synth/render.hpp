#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "msfuse/calib/camera.hpp"
#include "msfuse/flow/flow_field.hpp"
#include "msfuse/msfa/cube.hpp"
#include "msfuse/msfa/pattern.hpp"
#include "msfuse/synth/scene.hpp"

namespace msfuse::synth {

struct RenderOptions {
  double noise_sigma = 0.0;  ///< additive Gaussian noise on the mosaic, reflectance units
  std::uint64_t seed = 1;
  int supersample = 2;       ///< s x s box-filter samples per pixel
  bool with_cube = true;
  bool with_depth = true;
};

struct RenderedView {
  msfa::MosaicFrame mosaic;
  msfa::SpectralCube cube;  ///< ground truth, all bands at every pixel (empty unless requested)
  flow::DepthMap depth;     ///< camera-frame z at pixel centers (empty unless requested)
};

/// Ray-casts the scene through the distorted camera model. Mosaic pixels take exactly the ground
/// truth cube value of their band before noise is added.
inline RenderedView render_view(const Scene& scene, const calib::PinholeCamera& camera, const RigidTransform& world_to_cam,
                                const msfa::MsfaPattern& pattern, msfa::PatternOffset offset = {},
                                const RenderOptions& opt = {}) {
  scene.validate();
  pattern.validate();
  const int w = camera.width, h = camera.height;
  if (w <= 0 || h <= 0) throw ConfigError("camera has no image size");
  for (const auto& p : scene.patches) {
    bool in_front = false;
    for (double u : {p.x_min, p.x_max})
      for (double v : {p.y_min, p.y_max}) in_front |= world_to_cam.apply(p.pose.apply(Vec3(u, v, 0.0))).z() > 0.0;
    if (!in_front) throw ProjectionError("patch '" + p.name + "' is behind the camera");
  }
  const int nb = pattern.band_count();
  const int ss = std::max(1, opt.supersample);

  // Reflectance table per material and band; the last row is the empty background.
  const int nm = static_cast<int>(scene.materials.size());
  std::vector<double> table(static_cast<std::size_t>((nm + 1) * nb), 0.0);
  for (int m = 0; m < nm; ++m)
    for (int b = 0; b < nb; ++b)
      table[static_cast<std::size_t>(m * nb + b)] =
          scene.materials[static_cast<std::size_t>(m)].reflectance(pattern.band_wavelengths[static_cast<std::size_t>(b)]);
  auto row_of = [&](int material) { return material < 0 ? nm : material; };

  RenderedView out;
  out.mosaic = msfa::MosaicFrame{Image<float>(w, h), pattern, offset, true};
  if (opt.with_cube) {
    out.cube = msfa::SpectralCube(w, h, pattern.band_wavelengths);
    out.cube.set_reflectance(true);
  }
  if (opt.with_depth) out.depth = flow::DepthMap{Image<float>(w, h, 0.0f), Mask(w, h, 0)};

  const Vec3 center = calib::camera_center(world_to_cam);
  const Eigen::Matrix3d cam_to_world = world_to_cam.R.transpose();
  std::vector<int> hits(static_cast<std::size_t>(ss * ss));
  std::vector<double> value(static_cast<std::size_t>(nb));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int j = 0; j < ss; ++j)
        for (int i = 0; i < ss; ++i) {
          const Vec2 px(x + (i + 0.5) / ss - 0.5, y + (j + 0.5) / ss - 0.5);
          const Vec3 dir = cam_to_world * camera.ray(px);
          hits[static_cast<std::size_t>(j * ss + i)] = scene.cast(center, dir).material;
        }
      auto band_value = [&](int b) {
        double acc = 0.0;
        for (int m : hits) acc += table[static_cast<std::size_t>(row_of(m) * nb + b)];
        return static_cast<float>(acc / static_cast<double>(hits.size()));
      };
      const int band = pattern.band_at(x, y, offset);
      if (opt.with_cube) {
        for (int b = 0; b < nb; ++b) out.cube.at(b, x, y) = band_value(b);
        out.mosaic.values(x, y) = out.cube.at(band, x, y);
      } else {
        out.mosaic.values(x, y) = band_value(band);
      }
      if (opt.with_depth) {
        const Vec3 ray = camera.ray(Vec2(x, y));
        const Hit hit = scene.cast(center, cam_to_world * ray);
        if (hit.patch >= 0) {
          out.depth.z(x, y) = static_cast<float>(hit.t);  // ray has unit z in the camera frame
          out.depth.valid(x, y) = 1;
        }
      }
    }
  }

  if (opt.noise_sigma > 0.0) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> noise(0.0, opt.noise_sigma);
    for (float& v : out.mosaic.values.pixels()) v = static_cast<float>(std::max(0.0, v + noise(rng)));
  }
  return out;
}

/// Correspondence of pixel `px` of the `from` view in the `to` view, or nullopt when the ray misses,
/// the point is occluded in `to`, or it leaves the `to` image.
inline std::optional<Vec2> map_pixel(const Scene& scene, const calib::PinholeCamera& from_cam, const RigidTransform& from_pose,
                                     const calib::PinholeCamera& to_cam, const RigidTransform& to_pose, const Vec2& px) {
  const Vec3 c_from = calib::camera_center(from_pose);
  const Hit hit = scene.cast(c_from, from_pose.R.transpose() * from_cam.ray(px));
  if (hit.patch < 0) return std::nullopt;
  const Vec3 X = c_from + hit.t * (from_pose.R.transpose() * from_cam.ray(px));
  const auto q = calib::try_project(to_cam, to_pose, X);
  if (!q) return std::nullopt;
  constexpr double eps = 1e-9;
  if (q->x() < -eps || q->y() < -eps || q->x() > to_cam.width - 1 + eps || q->y() > to_cam.height - 1 + eps)
    return std::nullopt;
  const Vec3 c_to = calib::camera_center(to_pose);
  const Vec3 d = X - c_to;
  const Hit back = scene.cast(c_to, d);
  if (back.patch < 0 || back.t < 1.0 - 1e-7) return std::nullopt;
  return q;
}

/// Ground-truth flow on the reference grid: displacement from each reference pixel to its match
/// in the target view. Occluded or out-of-frame pixels are invalid.
inline flow::FlowField gt_flow(const Scene& scene, const calib::PinholeCamera& ref_cam, const RigidTransform& ref_pose,
                               const calib::PinholeCamera& tgt_cam, const RigidTransform& tgt_pose) {
  flow::FlowField f(ref_cam.width, ref_cam.height);
  for (int y = 0; y < ref_cam.height; ++y)
    for (int x = 0; x < ref_cam.width; ++x) {
      const auto q = map_pixel(scene, ref_cam, ref_pose, tgt_cam, tgt_pose, Vec2(x, y));
      if (!q) {
        f.valid(x, y) = 0;
        continue;
      }
      f.u(x, y) = static_cast<float>(q->x() - x);
      f.v(x, y) = static_cast<float>(q->y() - y);
    }
  return f;
}

}  // namespace msfuse::synth
