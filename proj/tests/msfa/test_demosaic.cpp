#include <gtest/gtest.h>

#include <random>

#include "msfuse/msfa/demosaic.hpp"
#include "support/test_support.hpp"

using namespace msfuse;
using namespace msfuse::msfa;

namespace {

MsfaPattern shuffled_pattern(int rows, int cols, std::uint64_t seed) {
  auto p = MsfaPattern::uniform(rows, cols, 450, 650);
  std::mt19937_64 rng(seed);
  std::shuffle(p.cell_band.begin(), p.cell_band.end(), rng);
  return p;
}

}  // namespace

TEST(Demosaic, ConstantMosaicStaysConstant) {
  for (auto [r, c] : {std::pair{1, 1}, {2, 2}, {4, 4}, {5, 5}, {3, 2}}) {
    MosaicFrame f{Image<float>(23, 17, 0.5f), shuffled_pattern(r, c, 3), {}, true};
    for (auto m : {DemosaicMethod::nearest, DemosaicMethod::weighted_bilinear}) {
      auto cube = mosaic_to_cube(f, m);
      ASSERT_EQ(cube.bands(), r * c);
      for (float v : cube.storage()) ASSERT_FLOAT_EQ(v, 0.5f);
    }
  }
}

TEST(Demosaic, SensorSizedFrameGivesSixteenBands) {
  MosaicFrame f{Image<float>(2048, 1024, 0.25f), MsfaPattern::uniform(4, 4, 436, 650), {}, true};
  auto cube = mosaic_to_cube(f, DemosaicMethod::nearest);
  EXPECT_EQ(cube.width(), 2048);
  EXPECT_EQ(cube.height(), 1024);
  EXPECT_EQ(cube.bands(), 16);
}

TEST(Demosaic, SingleCellPatternIsIdentity) {
  MosaicFrame f{Image<float>(20, 9), MsfaPattern::uniform(1, 1, 550, 550), {}, true};
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 20; ++x) f.values(x, y) = static_cast<float>(x) / 20.0f;
  for (auto m : {DemosaicMethod::nearest, DemosaicMethod::weighted_bilinear}) {
    auto cube = mosaic_to_cube(f, m);
    EXPECT_EQ(cube.band_image(0), f.values);
  }
}

TEST(Demosaic, BilinearFillsFromSurroundingCarriers) {
  // Band 0 sits at even (x, y) on a 6x6 frame.
  MosaicFrame f{Image<float>(6, 6), MsfaPattern::uniform(2, 2, 500, 530), {}, true};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : f.values.pixels()) v = u(rng);
  auto cube = mosaic_to_cube(f, DemosaicMethod::weighted_bilinear);
  const auto& m = f.values;
  // Diagonal hole: four carriers with weight 1/4 each.
  const double diag = (m(2, 2) + m(4, 2) + m(2, 4) + m(4, 4)) / 4.0;
  EXPECT_NEAR(cube.at(0, 3, 3), diag, 1e-6);
  // Hole between two carriers on a carrier row.
  EXPECT_NEAR(cube.at(0, 3, 2), (m(2, 2) + m(4, 2)) / 2.0, 1e-6);
  EXPECT_NEAR(cube.at(0, 2, 3), (m(2, 2) + m(2, 4)) / 2.0, 1e-6);
  // Carrier with a checker mosaic of 0 and 1.
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) f.values(x, y) = static_cast<float>((x + y) % 2);
  cube = mosaic_to_cube(f, DemosaicMethod::weighted_bilinear);
  EXPECT_FLOAT_EQ(cube.at(0, 3, 3), 0.0f);
  EXPECT_FLOAT_EQ(cube.at(1, 2, 2), 1.0f);
}

TEST(Demosaic, UniformCubeGivesUniformMosaic) {
  SpectralCube c(12, 10, MsfaPattern::uniform(3, 3, 400, 480).band_wavelengths, BandSource::left, 0.25f);
  auto f = cube_to_mosaic(c, MsfaPattern::uniform(3, 3, 400, 480));
  for (float v : f.values.pixels()) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(Demosaic, DistinctBandConstantsReproducePattern) {
  const auto p = shuffled_pattern(4, 4, 5);
  SpectralCube c(17, 13, p.band_wavelengths);
  for (int b = 0; b < 16; ++b)
    for (float& v : c.band(b)) v = static_cast<float>(b) / 16.0f;
  const PatternOffset off{1, 3};
  auto f = cube_to_mosaic(c, p, off);
  for (int y = 0; y < 13; ++y)
    for (int x = 0; x < 17; ++x)
      EXPECT_FLOAT_EQ(f.values(x, y), p.cell_band[((y + 1) % 4) * 4 + (x + 3) % 4] / 16.0f);
}

TEST(Demosaic, BandCountMismatchThrows) {
  SpectralCube c(8, 8, {500, 600, 700});
  EXPECT_THROW(cube_to_mosaic(c, MsfaPattern::uniform(2, 2, 500, 600)), ConfigError);
}

TEST(Demosaic, InconsistentFrameThrows) {
  MosaicFrame f{Image<float>(3, 3), MsfaPattern::uniform(4, 4, 500, 600), {}, true};
  EXPECT_THROW(mosaic_to_cube(f), ConfigError);
  MosaicFrame g{Image<float>(8, 8), MsfaPattern::uniform(2, 2, 500, 600), {}, true};
  g.pattern.cell_band = {0, 0, 1, 2};
  EXPECT_THROW(mosaic_to_cube(g), ConfigError);
}

TEST(Demosaic, CarrierPixelsRoundTripExactly) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const int dim = static_cast<int>(2 + seed);
    const auto p = shuffled_pattern(dim, dim, seed);
    auto c = test::smooth_cube(41, 29, dim * dim, seed);
    const PatternOffset off{static_cast<int>(seed % dim), static_cast<int>((seed * 3) % dim)};
    auto f = cube_to_mosaic(c, p, off);
    for (auto m : {DemosaicMethod::nearest, DemosaicMethod::weighted_bilinear}) {
      auto back = mosaic_to_cube(f, m);
      for (int y = 0; y < 29; ++y)
        for (int x = 0; x < 41; ++x) {
          const int b = p.band_at(x, y, off);
          ASSERT_EQ(back.at(b, x, y), c.at(b, x, y));
        }
    }
  }
}

TEST(Demosaic, NearestIsIdempotentOnCarriers) {
  const auto p = shuffled_pattern(4, 4, 9);
  auto c = test::smooth_cube(32, 24, 16, 9);
  auto once = mosaic_to_cube(cube_to_mosaic(c, p), DemosaicMethod::nearest);
  auto twice = mosaic_to_cube(cube_to_mosaic(once, p), DemosaicMethod::nearest);
  EXPECT_EQ(once.storage(), twice.storage());
}

TEST(Demosaic, BilinearBeatsNearestOnSmoothCubes) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = shuffled_pattern(4, 4, seed);
    auto c = test::smooth_cube(128, 96, 16, seed);
    auto f = cube_to_mosaic(c, p);
    const double nn = test::psnr(mosaic_to_cube(f, DemosaicMethod::nearest), c);
    const double wb = test::psnr(mosaic_to_cube(f, DemosaicMethod::weighted_bilinear), c);
    EXPECT_GE(wb, nn) << "seed " << seed;
  }
}
