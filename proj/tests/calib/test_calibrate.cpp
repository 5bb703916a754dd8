#include <gtest/gtest.h>

#include <numbers>

#include "support/calib_fixtures.hpp"

using namespace msfuse;
using namespace msfuse::calib;

TEST(CalibrateSingle, NoiselessRecoversFocal) {
  const auto set = test::vis_nir_calibration_set(10, 0.0);
  const auto out = calibrate_single(set.left, test::rough_guess(set.truth.left));
  EXPECT_NEAR(out.camera.fx / set.truth.left.fx, 1.0, 1e-3);
  EXPECT_NEAR(out.camera.fy / set.truth.left.fy, 1.0, 1e-3);
  EXPECT_NEAR(out.camera.k1, set.truth.left.k1, 1e-3);
  EXPECT_EQ(out.camera.cx, set.truth.left.cx);
  EXPECT_EQ(out.camera.cy, set.truth.left.cy);
  EXPECT_LT(out.rms_px, 1e-3);
  ASSERT_EQ(out.poses.size(), 10u);
  for (std::size_t i = 1; i < out.cost_history.size(); ++i) EXPECT_LE(out.cost_history[i], out.cost_history[i - 1]);
}

TEST(CalibrateSingle, NoisyCornersKeepReprojectionSmall) {
  const auto set = test::vis_nir_calibration_set(10, 0.5);
  const auto out = calibrate_single(set.right, test::rough_guess(set.truth.right));
  EXPECT_LE(out.rms_px, 1.5);
  EXPECT_GT(out.rms_px, 0.2);
}

TEST(CalibrateSingle, FrontoParallelViewsAreUnobservable) {
  const CheckerboardSpec board{5, 8, 0.0025};
  auto cam = PinholeCamera::centered(14489, 14489, 2048, 1024);
  std::vector<FeatureSet> sets;
  for (int i = 0; i < 5; ++i)
    sets.push_back(synthesize_features(board, cam, {Mat3::Identity(), Vec3(-0.009 + 0.001 * i, -0.005, 0.3 + 0.01 * i)}, i));
  EXPECT_THROW(calibrate_single(sets, cam), ObservabilityError);
  sets.resize(2);
  EXPECT_THROW(calibrate_single(sets, cam), ObservabilityError);
}

TEST(CalibrateStereo, RecoversBaselineAndConvergence) {
  const auto set = test::vis_nir_calibration_set(10, 0.0);
  const auto l = calibrate_single(set.left, test::rough_guess(set.truth.left));
  const auto r = calibrate_single(set.right, test::rough_guess(set.truth.right));
  const auto st = calibrate_stereo(l, r);
  EXPECT_NEAR(st.rig.baseline() / 0.06, 1.0, 0.01);
  EXPECT_NEAR(st.rig.convergence_deg(), 10.0, 0.1);
  EXPECT_FALSE(st.zero_baseline);
  EXPECT_EQ(st.per_view.size(), 10u);
}

TEST(CalibrateStereo, IdenticalPosesGiveZeroBaseline) {
  SingleCalibration a;
  for (int i = 0; i < 3; ++i)
    a.poses.push_back({i, RigidTransform::from_rotation_vector(Vec3(0.1 * i, 0.2, 0), Vec3(0.01, 0, 0.3))});
  const auto st = calibrate_stereo(a, a);
  EXPECT_TRUE(st.zero_baseline);
  EXPECT_LT(st.rig.right_to_left.t.norm(), 1e-15);
  EXPECT_LT(rotation_angle_between(st.rig.right_to_left.R, Mat3::Identity()), 1e-7);
}

TEST(CalibrateStereo, UnpairedViewsThrow) {
  SingleCalibration a, b;
  a.poses = {{0, {}}, {1, {}}};
  b.poses = {{0, {}}, {2, {}}};
  EXPECT_THROW(calibrate_stereo(a, b), PairingError);
  b.poses.pop_back();
  EXPECT_THROW(calibrate_stereo(a, b), PairingError);
}

TEST(QuaternionAverage, SignInvariant) {
  std::vector<Eigen::Quaterniond> qs;
  for (int i = 0; i < 6; ++i)
    qs.emplace_back(Eigen::AngleAxisd(0.1 + 0.02 * i, Vec3(1, 0.1 * i, 0.3).normalized()));
  const auto base = average_quaternions(qs);
  for (std::size_t k = 0; k < qs.size(); ++k) {
    auto flipped = qs;
    flipped[k].coeffs() *= -1.0;
    const auto q = average_quaternions(flipped);
    EXPECT_LT(rotation_angle_between(q.toRotationMatrix(), base.toRotationMatrix()), 1e-12) << k;
  }
  std::vector<Mat3> Rs;
  for (const auto& q : qs) Rs.push_back(q.toRotationMatrix());
  EXPECT_LT(rotation_angle_between(average_rotations(Rs).toRotationMatrix(), base.toRotationMatrix()), 1e-12);
}
