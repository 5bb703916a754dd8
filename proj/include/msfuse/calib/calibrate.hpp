#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "msfuse/calib/lm.hpp"
#include "msfuse/calib/pose.hpp"
#include "msfuse/calib/rig.hpp"

namespace msfuse::calib {

struct SingleCalibrationOptions {
  LmOptions lm;
  double min_tilt_spread_deg = 10.0;
  int min_views = 3;
};

struct ViewPose {
  int view_id = 0;
  RigidTransform board_to_camera;
};

struct SingleCalibration {
  PinholeCamera camera;
  std::vector<ViewPose> poses;
  double rms_px = 0.0;               ///< root mean squared point reprojection distance
  std::vector<double> cost_history;  ///< 0.5 * sum of squared residuals per accepted iteration
  int iterations = 0;
};

/// Largest angle between board normals over all view pairs, degrees.
inline double tilt_spread_deg(const std::vector<RigidTransform>& poses) {
  double best = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i)
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      const double c = std::clamp(poses[i].R.col(2).dot(poses[j].R.col(2)), -1.0, 1.0);
      best = std::max(best, std::acos(c));
    }
  return best * 180.0 / std::numbers::pi;
}

/// Joint refinement of fx, fy, k1..k3 and every view pose. The principal point stays where `init` puts it.
inline SingleCalibration calibrate_single(const std::vector<FeatureSet>& sets, const PinholeCamera& init,
                                          const SingleCalibrationOptions& opt = {}) {
  if (static_cast<int>(sets.size()) < opt.min_views)
    throw ObservabilityError("need at least " + std::to_string(opt.min_views) + " calibration views, got " +
                             std::to_string(sets.size()));
  if (!(init.fx > 0.0 && init.fy > 0.0)) throw ConfigError("initial focal lengths must be positive");

  // Pre-orientation: one pose per view with the initial intrinsics.
  std::vector<RigidTransform> poses;
  for (const auto& s : sets) poses.push_back(estimate_pose(s, init).pose);
  const double spread = tilt_spread_deg(poses);
  if (spread < opt.min_tilt_spread_deg)
    throw ObservabilityError("board orientations span only " + std::to_string(spread) +
                             " deg; focal length and distortion are not separable");

  constexpr Eigen::Index kIntr = 5;
  const auto nviews = static_cast<Eigen::Index>(sets.size());
  std::vector<Eigen::Index> row_start;
  Eigen::Index rows = 0;
  for (const auto& s : sets) {
    row_start.push_back(rows);
    rows += static_cast<Eigen::Index>(2 * s.matches.size());
  }

  Eigen::VectorXd x(kIntr + 6 * nviews);
  x << init.fx, init.fy, init.k1, init.k2, init.k3, Eigen::VectorXd::Zero(6 * nviews);
  for (Eigen::Index v = 0; v < nviews; ++v) detail::pose_to_params(poses[static_cast<std::size_t>(v)], x, kIntr + 6 * v);

  auto camera_of = [&](const Eigen::VectorXd& p) {
    PinholeCamera c = init;
    c.fx = p[0];
    c.fy = p[1];
    c.k1 = p[2];
    c.k2 = p[3];
    c.k3 = p[4];
    return c;
  };
  auto view_residuals = [&](const Eigen::VectorXd& p, Eigen::Index v, Eigen::Ref<Eigen::VectorXd> out) {
    const auto& s = sets[static_cast<std::size_t>(v)];
    detail::pose_residuals(camera_of(p), s, detail::pose_from_params(p, kIntr + 6 * v), out);
  };
  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r.resize(rows);
    for (Eigen::Index v = 0; v < nviews; ++v)
      view_residuals(p, v, r.segment(row_start[static_cast<std::size_t>(v)],
                                     static_cast<Eigen::Index>(2 * sets[static_cast<std::size_t>(v)].matches.size())));
  };
  // Block-sparse numeric Jacobian: pose columns only touch their own view's rows.
  auto jacobian = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& r0, Eigen::MatrixXd& J) {
    J.setZero(rows, p.size());
    Eigen::VectorXd pp = p, rp, rm;
    const double intr_scale[kIntr] = {init.fx, init.fy, 1.0, 1.0, 1.0};
    for (Eigen::Index i = 0; i < kIntr; ++i) {
      const double h = 1e-6 * std::max(std::abs(p[i]), intr_scale[i]);
      pp[i] = p[i] + h;
      residuals(pp, rp);
      pp[i] = p[i] - h;
      residuals(pp, rm);
      pp[i] = p[i];
      J.col(i) = (rp - rm) / (2.0 * h);
    }
    for (Eigen::Index v = 0; v < nviews; ++v) {
      const auto len = static_cast<Eigen::Index>(2 * sets[static_cast<std::size_t>(v)].matches.size());
      const auto r0v = row_start[static_cast<std::size_t>(v)];
      Eigen::VectorXd a(len), b(len);
      const double depth = std::max(std::abs(p[kIntr + 6 * v + 5]), 1e-3);
      for (Eigen::Index k = 0; k < 6; ++k) {
        const Eigen::Index i = kIntr + 6 * v + k;
        const double h = 1e-6 * std::max(std::abs(p[i]), k < 3 ? 1.0 : depth);
        pp[i] = p[i] + h;
        view_residuals(pp, v, a);
        pp[i] = p[i] - h;
        view_residuals(pp, v, b);
        pp[i] = p[i];
        J.block(r0v, i, len, 1) = (a - b) / (2.0 * h);
      }
    }
    (void)r0;
  };

  const LmResult lm = levenberg_marquardt(residuals, jacobian, x, opt.lm);

  SingleCalibration out;
  out.camera = camera_of(lm.params);
  for (Eigen::Index v = 0; v < nviews; ++v)
    out.poses.push_back({sets[static_cast<std::size_t>(v)].view_id, detail::pose_from_params(lm.params, kIntr + 6 * v)});
  const double npts = static_cast<double>(rows / 2);
  out.rms_px = std::sqrt(2.0 * lm.cost() / npts);
  out.cost_history = lm.cost_history;
  out.iterations = lm.iterations;
  return out;
}

/// Mean of unit quaternions after aligning every sign to the first one.
inline Eigen::Quaterniond average_rotations(const std::vector<Mat3>& rotations) {
  if (rotations.empty()) return Eigen::Quaterniond::Identity();
  const Eigen::Quaterniond ref(rotations.front());
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (const auto& R : rotations) {
    Eigen::Quaterniond q(R);
    Eigen::Vector4d c = q.coeffs();
    if (c.dot(ref.coeffs()) < 0.0) c = -c;
    acc += c;
  }
  acc.normalize();
  return Eigen::Quaterniond(acc[3], acc[0], acc[1], acc[2]);
}

/// Same as above but starting from quaternions (whose sign is arbitrary).
inline Eigen::Quaterniond average_quaternions(const std::vector<Eigen::Quaterniond>& qs) {
  if (qs.empty()) return Eigen::Quaterniond::Identity();
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  const Eigen::Vector4d ref = qs.front().coeffs();
  for (const auto& q : qs) {
    Eigen::Vector4d c = q.coeffs();
    if (c.dot(ref) < 0.0) c = -c;
    acc += c;
  }
  acc.normalize();
  return Eigen::Quaterniond(acc[3], acc[0], acc[1], acc[2]);
}

struct StereoCalibration {
  StereoRig rig;
  std::vector<RigidTransform> per_view;  ///< right_to_left estimate of each paired view
  double translation_spread_m = 0.0;     ///< RMS distance of per-view translations from the mean
  double rotation_spread_deg = 0.0;      ///< largest per-view angle from the mean rotation
  bool zero_baseline = false;
  double rms_px = 0.0;                   ///< combined reprojection RMS of both single calibrations
};

inline StereoCalibration calibrate_stereo(const SingleCalibration& left, const SingleCalibration& right) {
  std::map<int, const RigidTransform*> right_by_view;
  for (const auto& p : right.poses) right_by_view[p.view_id] = &p.board_to_camera;
  if (left.poses.size() != right.poses.size()) throw PairingError("left and right calibrations cover different views");

  StereoCalibration out;
  std::vector<Mat3> rotations;
  Vec3 tsum = Vec3::Zero();
  for (const auto& lp : left.poses) {
    auto it = right_by_view.find(lp.view_id);
    if (it == right_by_view.end()) throw PairingError("view " + std::to_string(lp.view_id) + " has no right-camera pose");
    const RigidTransform T = lp.board_to_camera * it->second->inverse();
    out.per_view.push_back(T);
    rotations.push_back(T.R);
    tsum += T.t;
  }
  if (out.per_view.empty()) throw PairingError("no paired views");

  const double n = static_cast<double>(out.per_view.size());
  out.rig.left = left.camera;
  out.rig.right = right.camera;
  out.rig.right_to_left.R = average_rotations(rotations).toRotationMatrix();
  out.rig.right_to_left.t = tsum / n;

  double tvar = 0.0;
  for (const auto& T : out.per_view) {
    tvar += (T.t - out.rig.right_to_left.t).squaredNorm();
    out.rotation_spread_deg = std::max(out.rotation_spread_deg,
                                       rotation_angle_between(T.R, out.rig.right_to_left.R) * 180.0 / std::numbers::pi);
  }
  out.translation_spread_m = std::sqrt(tvar / n);
  out.zero_baseline = out.rig.baseline() < 1e-9;

  const auto pts = [](const SingleCalibration& c) { return c.rms_px * c.rms_px; };
  out.rms_px = std::sqrt(0.5 * (pts(left) + pts(right)));
  return out;
}

}  // namespace msfuse::calib
