#include <gtest/gtest.h>

#include <algorithm>

#include "msfuse/flow/census.hpp"
#include "msfuse/flow/disparity.hpp"
#include "msfuse/flow/matcher.hpp"
#include "msfuse/msfa/modulation.hpp"
#include "support/flow_fixtures.hpp"

using namespace msfuse;
using namespace msfuse::flow;

namespace {

double fraction_where(const FlowField& f, int margin, auto pred) {
  std::size_t n = 0, ok = 0;
  for (int y = margin; y < f.height() - margin; ++y)
    for (int x = margin; x < f.width() - margin; ++x) {
      ++n;
      ok += f.valid(x, y) && pred(f.u(x, y), f.v(x, y));
    }
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

TEST(Census, BitsAndHamming) {
  GrayImage img(7, 7, 0.5f);
  img(2, 3) = 0.1f;  // left neighbor of the center, darker
  const auto c = census_transform(img, 1);
  // Window order is row-major without the center: bit 3 (from the top) is (-1, 0).
  EXPECT_EQ(c(3, 3), std::uint64_t{1} << (7 - 3));
  EXPECT_EQ(hamming(0b1011, 0b0110), 3);
  EXPECT_THROW(census_transform(img, 4), ConfigError);
}

TEST(Census, InvariantUnderMonotoneMaps) {
  const auto img = test::texture_image(48, 40, 3);
  const auto base = census_transform(img);
  for (auto k : msfa::all_modulations) {
    const auto m = msfa::apply_modulation(img, k).image;
    std::size_t diff = 0;
    const auto c = census_transform(m);
    for (std::size_t i = 0; i < c.size(); ++i) diff += c.pixels()[i] != base.pixels()[i];
    // Only float rounding can merge two neighbors into a tie.
    EXPECT_LT(static_cast<double>(diff) / c.size(), 0.01) << msfa::to_string(k);
  }
}

TEST(Flow, IdenticalImagesGiveZeroFlow) {
  const auto img = test::texture_image(128, 96, 1);
  const auto f = compute_flow(img, img);
  EXPECT_GE(fraction_where(f, 0, [](float u, float v) { return std::abs(u) <= 0.5f && std::abs(v) <= 0.5f; }), 0.99);
}

TEST(Flow, RecoversIntegerShift) {
  const auto img = test::texture_image(128, 96, 2);
  const auto f = compute_flow(img, test::shift_image(img, 5, 0));
  EXPECT_GE(fraction_where(f, 8, [](float u, float v) { return std::abs(u - 5.0f) <= 0.5f && std::abs(v) <= 0.5f; }), 0.95);
}

TEST(Flow, ShiftEquivariance) {
  const auto img = test::texture_image(128, 128, 4);
  for (auto [dx, dy] : {std::pair{-9, 2}, {12, -3}, {0, 7}, {20, 0}}) {
    const auto f = compute_flow(img, test::shift_image(img, dx, dy));
    double eu = 0.0;
    std::size_t n = 0;
    for (int y = 24; y < 104; ++y)
      for (int x = 24; x < 104; ++x)
        if (f.valid(x, y)) {
          eu += std::hypot(f.u(x, y) - dx, f.v(x, y) - dy);
          ++n;
        }
    ASSERT_GT(n, 0u);
    EXPECT_LE(eu / n, 0.5) << dx << "," << dy;
  }
}

TEST(Flow, ModulatedTargetStaysClose) {
  const auto img = test::texture_image(128, 96, 5);
  const auto shifted = test::shift_image(img, 5, 0);
  const FlowField gt = FlowField::constant(128, 96, 5.0f, 0.0f);
  auto interior = [](FlowField f) {
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x)
        if (x < 8 || y < 8 || x >= f.width() - 8 || y >= f.height() - 8) f.valid(x, y) = 0;
    return f;
  };
  const double base = endpoint_error(interior(compute_flow(img, shifted)), gt).mean;
  const double mod = endpoint_error(interior(compute_flow(img, msfa::apply_modulation(shifted, msfa::ModulationKind::sqrt).image)), gt).mean;
  EXPECT_LE(mod, 2.0 * base) << base;
}

TEST(Flow, RenderedPlanesWithinOnePixel) {
  const auto p = test::rectified_pair(256, 1, 0.002);
  const auto f = compute_flow(p.left, p.right);
  const auto e = endpoint_error(f, p.gt);
  EXPECT_LE(e.mean, 1.0);
  EXPECT_GT(f.valid_fraction(), 0.6);
}

TEST(Flow, WarmStartDoesNotHurt) {
  const auto p = test::rectified_pair(256, 2, 0.002);
  const auto cold = compute_flow(p.left, p.right);
  const auto warm = compute_flow(p.left, p.right, p.gt);
  EXPECT_LE(endpoint_error(warm, p.gt).mean, endpoint_error(cold, p.gt).mean);
}

TEST(Flow, ConsistencyCheckKeepsBetterMatches) {
  const auto p = test::rectified_pair(256, 3, 0.002);
  auto res = compute_flow_bidirectional(p.left, p.right);
  // Unchecked forward field: rerun the check-free view by marking everything valid.
  FlowField raw = res.forward;
  std::vector<double> kept, rejected;
  std::fill(raw.valid.pixels().begin(), raw.valid.pixels().end(), 1);
  const auto e = endpoint_error(raw, p.gt);
  for (int y = 0; y < raw.height(); ++y)
    for (int x = 0; x < raw.width(); ++x) {
      if (!p.gt.valid(x, y)) continue;
      (res.forward.valid(x, y) ? kept : rejected).push_back(e.map(x, y));
    }
  ASSERT_FALSE(kept.empty());
  ASSERT_FALSE(rejected.empty());
  std::sort(kept.begin(), kept.end());
  std::sort(rejected.begin(), rejected.end());
  // Kept errors are stochastically smaller: every quantile of the kept set is at most that of the rejected set.
  for (double q : {0.25, 0.5, 0.75, 0.9}) {
    const double a = kept[static_cast<std::size_t>(q * (kept.size() - 1))];
    const double b = rejected[static_cast<std::size_t>(q * (rejected.size() - 1))];
    EXPECT_LE(a, b) << "quantile " << q;
  }
}

TEST(Flow, InvalidInputsThrow) {
  EXPECT_THROW(compute_flow(GrayImage(), GrayImage()), DimensionError);
  EXPECT_THROW(compute_flow(GrayImage(40, 40), GrayImage(41, 40)), DimensionError);
  FlowParams bad;
  bad.search_radius = 0;
  EXPECT_THROW(compute_flow(GrayImage(40, 40), GrayImage(40, 40), std::nullopt, bad), ConfigError);
}

TEST(Pyramid, StopsAtMinimumDimension) {
  EXPECT_EQ(build_pyramid(GrayImage(256, 256)).size(), 4u);
  EXPECT_EQ(build_pyramid(GrayImage(512, 256)).size(), 4u);
  EXPECT_EQ(build_pyramid(GrayImage(100, 40)).size(), 1u);
  const auto lv = build_pyramid(GrayImage(130, 67, 0.25f));
  ASSERT_EQ(lv.size(), 2u);
  EXPECT_EQ(lv[1].width(), 65);
  EXPECT_EQ(lv[1].height(), 34);
  for (float v : lv[1].pixels()) EXPECT_NEAR(v, 0.25f, 1e-6);
}

TEST(Disparity, FromFlow) {
  FlowField f = FlowField::constant(3, 1, -10.0f, 0.0f);
  f.v(1, 0) = 3.0f;
  f.valid(2, 0) = 0;
  const auto d = flow_to_disparity(f, 1.0);
  EXPECT_EQ(d.d(0, 0), 10.0f);
  EXPECT_TRUE(d.valid(0, 0));
  EXPECT_FALSE(d.valid(1, 0));
  EXPECT_FALSE(d.valid(2, 0));
}

TEST(Disparity, RenderedFrontoParallelPlane) {
  // Plane at z = f B / 8 seen by a parallel rig: disparity 8 everywhere.
  const auto cam = calib::PinholeCamera::centered(800, 800, 128, 128);
  synth::Scene sc;
  sc.materials = synth::default_materials();
  synth::Patch q;
  q.pose = synth::fronto_parallel(0, 0, 800 * 0.02 / 8.0);
  q.x_min = q.y_min = -1.0;
  q.x_max = q.y_max = 1.0;
  q.texture.kind = synth::TextureKind::tiles;
  q.texture.palette = {0, 1, 2, 3, 4, 5, 6, 7};
  q.texture.tile_size = 0.004;
  sc.patches = {q};
  const auto mono = msfa::MsfaPattern::uniform(1, 1, 550, 550);
  synth::RenderOptions ro;
  ro.with_cube = ro.with_depth = false;
  const auto l = synth::render_view(sc, cam, {}, mono, {}, ro).mosaic.values;
  const auto r = synth::render_view(sc, cam, {calib::Mat3::Identity(), calib::Vec3(-0.02, 0, 0)}, mono, {}, ro).mosaic.values;
  const auto d = flow_to_disparity(compute_flow(l, r));
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (d.valid(x, y)) sum += d.d(x, y), ++n;
  ASSERT_GT(n, 128u * 64u);
  EXPECT_NEAR(sum / n, 8.0, 0.5);
}

TEST(Depth, FromDisparity) {
  DisparityMap d{Image<float>(4, 1), Mask(4, 1, 1)};
  d.d(0, 0) = 2898.0f;
  d.d(1, 0) = 5796.0f;
  d.d(2, 0) = 0.0f;
  d.d(3, 0) = -3.0f;
  const auto z = disparity_to_depth(d, 14489.0, 0.06);
  EXPECT_NEAR(z.z(0, 0), 0.30, 0.001);
  EXPECT_NEAR(z.z(1, 0), z.z(0, 0) / 2.0, 1e-6);
  EXPECT_FALSE(z.valid(2, 0));
  EXPECT_FALSE(z.valid(3, 0));
  // A principal-point shift between the rectified views enters the denominator.
  EXPECT_NEAR(disparity_to_depth(d, 14489.0, 0.06, 2898.0).z(0, 0), 0.15, 0.001);
  EXPECT_THROW(disparity_to_depth(d, 0.0, 0.06), ConfigError);
}

TEST(EndpointError, Examples) {
  const auto zero = FlowField::constant(5, 4, 0, 0);
  EXPECT_EQ(endpoint_error(zero, zero).mean, 0.0);
  EXPECT_DOUBLE_EQ(endpoint_error(FlowField::constant(5, 4, 1, 0), zero).mean, 1.0);
  EXPECT_DOUBLE_EQ(endpoint_error(FlowField::constant(5, 4, 3, 4), zero).mean, 5.0);
  auto partial = FlowField::constant(5, 4, 3, 4);
  std::fill(partial.valid.pixels().begin(), partial.valid.pixels().end(), 0);
  EXPECT_THROW(endpoint_error(partial, zero), EmptyResultError);
}
