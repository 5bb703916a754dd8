#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "msfuse/calib/features.hpp"
#include "msfuse/calib/rig.hpp"
#include "msfuse/msfa/pattern.hpp"
#include "msfuse/msfa/white.hpp"
#include "msfuse/synth/render.hpp"
#include "msfuse/synth/scene.hpp"

namespace msfuse::synth {

/// One mosaic camera of a stereo setup, with its raw-count response.
struct CameraSetup {
  calib::PinholeCamera camera;
  msfa::MsfaPattern pattern;
  msfa::PatternOffset offset;
  std::vector<double> gain;  ///< counts per unit reflectance, per band
  double dark = 0.0;         ///< counts
};

/// Named world point with the material expected there (ROI anchors for spectral checks).
struct Landmark {
  std::string name;
  Vec3 world;
  int material = 0;
  double radius_m = 0.001;
};

struct StereoSetup {
  Scene scene;
  CameraSetup left;
  CameraSetup right;
  RigPoses poses;
  double noise_sigma = 0.005;
  std::uint64_t seed = 1;
  std::vector<Landmark> landmarks;

  calib::StereoRig rig() const { return {left.camera, right.camera, poses.right_to_left()}; }
};

inline std::vector<double> band_gains(const msfa::MsfaPattern& p, double base) {
  std::vector<double> g;
  for (double nm : p.band_wavelengths) g.push_back(base * (0.7 + 0.25 * std::sin(nm / 37.0)));
  return g;
}

/// Materials with nearly flat spectra on distinct levels, so both spectral ranges order them alike.
inline std::vector<Material> default_materials() {
  return {
      {"slate", 0.12, {{0.04, 520.0, 40.0}, {0.03, 880.0, 60.0}}},
      {"clay", 0.24, {{0.05, 610.0, 35.0}, {-0.03, 760.0, 50.0}}},
      {"moss", 0.33, {{0.06, 550.0, 30.0}, {0.04, 940.0, 50.0}}},
      {"sand", 0.45, {{-0.04, 470.0, 30.0}, {0.05, 820.0, 70.0}}},
      {"rose", 0.55, {{0.07, 640.0, 30.0}, {-0.04, 700.0, 40.0}}},
      {"sky", 0.66, {{0.06, 470.0, 25.0}, {-0.05, 900.0, 60.0}}},
      {"chalk", 0.78, {{0.04, 580.0, 50.0}, {0.05, 720.0, 40.0}}},
      {"paper", 0.88, {{-0.04, 430.0, 30.0}, {0.04, 990.0, 40.0}}},
  };
}

/// Square swatch centered on a patch-local point.
inline Swatch centered_swatch(double x, double y, double size, int material) {
  return {x - 0.5 * size, y - 0.5 * size, x + 0.5 * size, y + 0.5 * size, material};
}

inline RigidTransform fronto_parallel(double x, double y, double z) { return {calib::Mat3::Identity(), Vec3(x, y, z)}; }

/// Two-camera apparatus: 4x4 VIS mosaic (436-650 nm) on the left, 5x5 NIR mosaic (675-975 nm) on the
/// right, 6 cm baseline, 10 degree convergence. `scale` shrinks the 2048x1024 sensors and focal
/// lengths together. The scene has a textured back plane and a nearer plane partly occluding it,
/// each carrying uniform swatches of the same material.
inline StereoSetup vis_nir_setup(double scale = 0.25, std::uint64_t seed = 1) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("scale must be in (0, 1]");
  StereoSetup s;
  s.seed = seed;
  const int w = static_cast<int>(std::lround(2048 * scale));
  const int h = static_cast<int>(std::lround(1024 * scale));
  s.left.camera = calib::PinholeCamera::centered(14489.0 * scale, 14489.0 * scale, w, h, -0.08, 0.0, 0.0, 5.5 / scale);
  s.right.camera = calib::PinholeCamera::centered(14276.0 * scale, 14276.0 * scale, w, h, 0.05, 0.0, 0.0, 5.5 / scale);
  s.left.pattern = msfa::MsfaPattern::uniform(4, 4, 436.0, 650.0);
  s.right.pattern = msfa::MsfaPattern::uniform(5, 5, 675.0, 975.0);
  s.left.gain = band_gains(s.left.pattern, 3000.0);
  s.right.gain = band_gains(s.right.pattern, 2500.0);
  s.left.dark = 64.0;
  s.right.dark = 48.0;
  s.poses = converged_rig(0.06, 10.0);

  s.scene.materials = default_materials();
  std::vector<int> palette(s.scene.materials.size());
  for (std::size_t i = 0; i < palette.size(); ++i) palette[i] = static_cast<int>(i);

  const int target = 4;  // "rose"
  const double swatch = 0.003;

  Patch back;
  back.name = "back";
  back.pose = fronto_parallel(0.0, 0.0, 0.35);
  back.x_min = -0.04, back.y_min = -0.02, back.x_max = 0.04, back.y_max = 0.02;
  back.texture.kind = TextureKind::tiles;
  back.texture.palette = palette;
  back.texture.tile_size = 0.00075;
  back.texture.seed = seed;
  back.texture.swatches.push_back(centered_swatch(0.010, 0.004, swatch, target));
  back.texture.swatches.push_back(centered_swatch(0.008, -0.006, swatch, 1));

  Patch front;
  front.name = "front";
  front.pose = fronto_parallel(-0.007, 0.0, 0.33);
  front.x_min = -0.008, front.y_min = -0.008, front.x_max = 0.008, front.y_max = 0.008;
  front.texture.kind = TextureKind::tiles;
  front.texture.palette = palette;
  front.texture.tile_size = 0.00075;
  front.texture.seed = seed + 1;
  front.texture.swatches.push_back(centered_swatch(-0.002, 0.003, swatch, target));
  front.texture.swatches.push_back(centered_swatch(0.0, -0.004, swatch, 6));

  s.scene.patches = {back, front};
  s.landmarks = {
      {"back_target", back.pose.apply(Vec3(0.010, 0.004, 0.0)), target, 0.0006},
      {"back_clay", back.pose.apply(Vec3(0.008, -0.006, 0.0)), 1, 0.0006},
      {"front_target", front.pose.apply(Vec3(-0.002, 0.003, 0.0)), target, 0.0006},
      {"front_chalk", front.pose.apply(Vec3(0.0, -0.004, 0.0)), 6, 0.0006},
  };
  return s;
}

/// Mosaic in counts: dark + gain_b * reflectance.
inline msfa::MosaicFrame to_raw_counts(const msfa::MosaicFrame& reflectance, const CameraSetup& cam) {
  msfa::MosaicFrame out{Image<float>(reflectance.width(), reflectance.height()), reflectance.pattern, reflectance.origin_offset,
                        false};
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      out.values(x, y) = static_cast<float>(cam.dark + cam.gain[static_cast<std::size_t>(out.band_at(x, y))] *
                                                           std::max(0.0f, reflectance.values(x, y)));
  return out;
}

inline msfa::WhiteReference white_reference(const CameraSetup& cam) {
  std::vector<double> white;
  for (double g : cam.gain) white.push_back(cam.dark + g);
  auto ref = msfa::WhiteReference::from_band_levels(cam.pattern, cam.camera.width, cam.camera.height, cam.offset, white,
                                                    cam.dark);
  if (!ref.dark)
    ref.dark = msfa::MosaicFrame{Image<float>(cam.camera.width, cam.camera.height, 0.0f), cam.pattern, cam.offset, false};
  return ref;
}

/// Board poses (board -> world) that keep every corner inside both views with a pixel margin.
/// Tilts are drawn up to `max_tilt_deg` about x and y, distance in [z_min, z_max].
struct BoardViewOptions {
  int views = 10;
  double z_min = 0.30;
  double z_max = 0.36;
  double max_tilt_deg = 25.0;
  double margin_px = 20.0;
  std::uint64_t seed = 7;
};

inline std::vector<RigidTransform> board_views(const calib::CheckerboardSpec& board, const calib::StereoRig& rig,
                                               const RigPoses& poses, const BoardViewOptions& opt = {}) {
  board.validate();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uz(opt.z_min, opt.z_max), ut(-opt.max_tilt_deg, opt.max_tilt_deg),
      uspin(-15.0, 15.0), ushift(-1.0, 1.0);
  const double deg = std::numbers::pi / 180.0;
  const Vec3 half(0.5 * (board.inner_cols - 1) * board.square_size, 0.5 * (board.inner_rows - 1) * board.square_size, 0.0);
  auto fits = [&](const calib::PinholeCamera& cam, const RigidTransform& world_to_cam, const RigidTransform& b2w) {
    for (int r = -1; r <= board.inner_rows; ++r)
      for (int c = -1; c <= board.inner_cols; ++c) {
        const auto px = calib::try_project(cam, world_to_cam * b2w, board.model_point(r, c));
        if (!px || px->x() < opt.margin_px || px->y() < opt.margin_px || px->x() > cam.width - 1 - opt.margin_px ||
            px->y() > cam.height - 1 - opt.margin_px)
          return false;
      }
    return true;
  };
  std::vector<RigidTransform> out;
  for (int attempt = 0; static_cast<int>(out.size()) < opt.views; ++attempt) {
    if (attempt > 100000) throw ConfigError("board_views: could not place the board in both views");
    const double z = uz(rng);
    // Center near the point where both optical axes meet at this depth.
    const double reach = 0.2 * z * rig.left.width / rig.left.fx;
    const Vec3 center(ushift(rng) * reach, ushift(rng) * 0.5 * reach, z);
    const calib::Mat3 R = (Eigen::AngleAxisd(ut(rng) * deg, Vec3::UnitX()) * Eigen::AngleAxisd(ut(rng) * deg, Vec3::UnitY()) *
                           Eigen::AngleAxisd(uspin(rng) * deg, Vec3::UnitZ()))
                              .toRotationMatrix();
    RigidTransform b2w{R, center - R * half};
    if (fits(rig.left, poses.left, b2w) && fits(rig.right, poses.right, b2w)) out.push_back(b2w);
  }
  return out;
}

/// Scene holding only a checkerboard (with a white margin) at the given board -> world pose.
inline Scene checkerboard_scene(const calib::CheckerboardSpec& board, const RigidTransform& board_to_world) {
  Scene sc;
  sc.materials = {{"black", 0.05, {}}, {"white", 0.9, {}}};
  Patch p;
  p.name = "board";
  p.pose = board_to_world;
  const double s = board.square_size;
  p.x_min = -2.0 * s, p.y_min = -2.0 * s;
  p.x_max = (board.inner_cols + 1) * s, p.y_max = (board.inner_rows + 1) * s;
  p.texture.kind = TextureKind::checkerboard;
  p.texture.material = 0;
  p.texture.material_alt = 1;
  p.texture.board = board;
  sc.patches = {p};
  sc.background_material = 0;
  return sc;
}

}  // namespace msfuse::synth
