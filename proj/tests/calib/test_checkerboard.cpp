#include <gtest/gtest.h>

#include "msfuse/calib/checkerboard.hpp"
#include "msfuse/synth/render.hpp"
#include "support/calib_fixtures.hpp"

using namespace msfuse;
using namespace msfuse::calib;

namespace {

struct BoardShot {
  GrayImage image;
  PinholeCamera camera;
  RigidTransform board_to_cam;
};

BoardShot render_board(const CheckerboardSpec& board, int view, double noise) {
  const auto s = synth::vis_nir_setup(0.25, 1);
  synth::BoardViewOptions bo;
  bo.views = view + 1;
  bo.seed = 21;
  const auto b2w = synth::board_views(board, s.rig(), s.poses, bo)[static_cast<std::size_t>(view)];
  synth::RenderOptions ro;
  ro.noise_sigma = noise;
  ro.seed = 100 + static_cast<std::uint64_t>(view);
  ro.with_cube = ro.with_depth = false;
  ro.supersample = 4;
  const auto v = synth::render_view(synth::checkerboard_scene(board, b2w), s.left.camera, s.poses.left,
                                    msfa::MsfaPattern::uniform(1, 1, 550, 550), {}, ro);
  return {v.mosaic.values, s.left.camera, s.poses.left * b2w};
}

double rms_error(const FeatureSet& f, const BoardShot& shot) {
  double se = 0.0;
  for (const auto& m : f.matches) se += (m.image - project(shot.camera, shot.board_to_cam, m.model)).squaredNorm();
  return std::sqrt(se / static_cast<double>(f.matches.size()));
}

}  // namespace

TEST(Checkerboard, NoiselessCornersWithinTenthPixel) {
  const CheckerboardSpec board{5, 8, 0.002};
  for (int view = 0; view < 4; ++view) {
    const auto shot = render_board(board, view, 0.0);
    const auto f = detect_checkerboard(shot.image, board);
    ASSERT_EQ(f.matches.size(), 40u);
    ASSERT_TRUE(f.ids_unique());
    double worst = 0.0;
    for (const auto& m : f.matches) {
      EXPECT_EQ(m.model, board.model_point(m.id / 8, m.id % 8));
      worst = std::max(worst, (m.image - project(shot.camera, shot.board_to_cam, m.model)).norm());
    }
    EXPECT_LE(worst, 0.1) << "view " << view;
  }
}

TEST(Checkerboard, NoisyImageLocalization) {
  const CheckerboardSpec board{5, 8, 0.002};
  for (int view = 0; view < 3; ++view) {
    const auto shot = render_board(board, view, 0.03);
    EXPECT_LE(rms_error(detect_checkerboard(shot.image, board), shot), 0.5) << "view " << view;
  }
}

TEST(Checkerboard, BlankImageFails) {
  const CheckerboardSpec board{5, 8, 0.002};
  EXPECT_THROW(detect_checkerboard(GrayImage(200, 150, 0.5f), board), DetectionError);
  try {
    detect_checkerboard(GrayImage(200, 150, 0.5f), board);
  } catch (const DetectionError& e) {
    EXPECT_EQ(e.expected, 40u);
    EXPECT_EQ(e.found, 0u);
  }
}

TEST(Checkerboard, WrongSpecFails) {
  const auto shot = render_board({5, 8, 0.002}, 0, 0.0);
  EXPECT_THROW(detect_checkerboard(shot.image, {6, 8, 0.002}), DetectionError);
}
