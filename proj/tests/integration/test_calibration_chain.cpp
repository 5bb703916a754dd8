#include <gtest/gtest.h>

#include "msfuse/pipeline/run.hpp"
#include "support/calib_fixtures.hpp"
#include "support/test_support.hpp"

namespace msfuse {
namespace {

// Wide-angle rig with the apparatus baseline and convergence: distortion is observable over the
// field, so every generated parameter can be checked after detection on rendered images.
struct WideRig {
  calib::StereoRig rig;
  synth::RigPoses poses;
};

WideRig wide_rig() {
  WideRig w;
  w.poses = synth::converged_rig(0.06, 10.0);
  w.rig.left = calib::PinholeCamera::centered(450.0, 450.0, 640, 480, -0.15, 0.05, 0.0);
  w.rig.right = calib::PinholeCamera::centered(440.0, 440.0, 640, 480, 0.08, -0.02, 0.0);
  w.rig.right_to_left = w.poses.right_to_left();
  return w;
}

pipeline::CalibrationInputs render_calibration_set(const WideRig& w, const calib::CheckerboardSpec& board, int views,
                                                   const std::filesystem::path& dir, double noise = 0.0) {
  synth::BoardViewOptions bo;
  bo.views = views;
  bo.seed = 5;
  bo.z_min = 0.28;
  bo.z_max = 0.4;
  const auto placements = synth::board_views(board, w.rig, w.poses, bo);
  synth::RenderOptions ro;
  ro.supersample = 4;
  ro.with_cube = ro.with_depth = false;
  ro.noise_sigma = noise;
  const auto mono = msfa::MsfaPattern::uniform(1, 1, 550, 550);
  pipeline::CalibrationInputs in{board, {}, {}, test::rough_guess(w.rig.left), test::rough_guess(w.rig.right)};
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const auto scene = synth::checkerboard_scene(board, placements[i]);
    for (int side = 0; side < 2; ++side) {
      ro.seed = 100 + 2 * i + static_cast<std::size_t>(side);
      const auto v = synth::render_view(scene, side ? w.rig.right : w.rig.left, side ? w.poses.right : w.poses.left, mono, {}, ro);
      const auto path = dir / ((side ? "r" : "l") + std::to_string(i) + ".pgm");
      io::write_gray_pgm(path, v.mosaic.values);
      (side ? in.right_images : in.left_images).push_back(path);
    }
  }
  return in;
}

TEST(CalibrationChain, NoiselessRendersRecoverEveryParameter) {
  test::TempDir dir("chain");
  const auto w = wide_rig();
  const calib::CheckerboardSpec board{7, 10, 0.02};
  const auto run = pipeline::run_calibration(render_calibration_set(w, board, 10, dir.path()));
  for (const auto* pair : {&run.left, &run.right}) {
    const auto& truth = pair == &run.left ? w.rig.left : w.rig.right;
    const auto& got = pair->camera;
    EXPECT_NEAR(got.fx / truth.fx, 1.0, 1e-3);
    EXPECT_NEAR(got.fy / truth.fy, 1.0, 1e-3);
    EXPECT_NEAR(got.k1, truth.k1, 1e-3);
    EXPECT_LT(pair->rms_px, 0.1);
  }
  EXPECT_NEAR(run.stereo.rig.baseline() / w.rig.baseline(), 1.0, 5e-3);
  EXPECT_NEAR(run.stereo.rig.convergence_deg(), w.rig.convergence_deg(), 0.1);
}

TEST(CalibrationChain, NoisyRendersStayClose) {
  test::TempDir dir("chain_noisy");
  const auto w = wide_rig();
  const auto run = pipeline::run_calibration(render_calibration_set(w, {7, 10, 0.02}, 10, dir.path(), 0.02));
  EXPECT_NEAR(run.stereo.rig.baseline() / w.rig.baseline(), 1.0, 0.02);
  EXPECT_NEAR(run.stereo.rig.convergence_deg(), 10.0, 0.5);
  EXPECT_LE(run.stereo.rms_px, 1.5);
}

TEST(CalibrationChain, SymmetricBoardRefused) {
  test::TempDir dir("chain_sym");
  const auto w = wide_rig();
  pipeline::CalibrationInputs in{{7, 9, 0.02}, {dir / "l.pgm"}, {dir / "r.pgm"}, w.rig.left, w.rig.right};
  EXPECT_THROW(pipeline::run_calibration(in), ConfigError);
}

}  // namespace
}  // namespace msfuse
