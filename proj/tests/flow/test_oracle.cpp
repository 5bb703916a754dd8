#include <gtest/gtest.h>

#include "msfuse/flow/matcher.hpp"
#include "support/census_oracle.hpp"
#include "support/flow_fixtures.hpp"

using namespace msfuse;

namespace {

double agreement(const GrayImage& a, const GrayImage& b, int radius, const flow::FlowParams& params = {}) {
  const auto res = flow::compute_flow_bidirectional(a, b, std::nullopt, params);
  const auto bf = test::brute_force_census_match(a, b, radius);
  std::size_t n = 0, same = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (!res.forward.valid(x, y) || !res.integer.found(x, y) || !bf.found(x, y)) continue;
      ++n;
      same += res.integer.du(x, y) == bf.du(x, y) && res.integer.dv(x, y) == bf.dv(x, y);
    }
  EXPECT_GT(n, static_cast<std::size_t>(a.width() * a.height() / 2));
  return static_cast<double>(same) / static_cast<double>(n);
}

}  // namespace

TEST(BruteForceOracle, ShiftedTextures) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto img = test::texture_image(64, 64, seed);
    const int dx = static_cast<int>(seed * 3) - 6, dy = static_cast<int>(seed % 3) - 1;
    EXPECT_GE(agreement(img, test::shift_image(img, dx, dy), 8), 0.95) << "seed " << seed;
  }
}

TEST(BruteForceOracle, RenderedPlanes) {
  const auto p = test::rectified_pair(256, 4, 0.002);
  // 64x64 crop of the back plane (upper left), where disparity is about 11 px.
  GrayImage a(64, 64), b(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      a(x, y) = p.left(30 + x, 20 + y);
      b(x, y) = p.right(30 + x, 20 + y);
    }
  // Two pyramid levels at 64 px: radius 8 reaches 24 px.
  flow::FlowParams params;
  params.search_radius = 8;
  EXPECT_GE(agreement(a, b, 14, params), 0.95);
}
