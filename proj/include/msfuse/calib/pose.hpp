#pragma once

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "msfuse/calib/camera.hpp"
#include "msfuse/calib/features.hpp"
#include "msfuse/calib/lm.hpp"

namespace msfuse::calib {

namespace detail {

/// Pixel residuals of a pose; points that fall behind the camera get a large penalty.
inline void pose_residuals(const PinholeCamera& cam, const FeatureSet& f, const RigidTransform& pose,
                           Eigen::Ref<Eigen::VectorXd> out) {
  for (std::size_t i = 0; i < f.matches.size(); ++i) {
    const auto px = try_project(cam, pose, f.matches[i].model);
    if (px) {
      out[2 * i] = px->x() - f.matches[i].image.x();
      out[2 * i + 1] = px->y() - f.matches[i].image.y();
    } else {
      out[2 * i] = out[2 * i + 1] = 1e6;
    }
  }
}

inline RigidTransform pose_from_params(const Eigen::VectorXd& p, Eigen::Index at = 0) {
  return RigidTransform::from_rotation_vector(p.segment<3>(at), p.segment<3>(at + 3));
}

inline void pose_to_params(const RigidTransform& pose, Eigen::VectorXd& p, Eigen::Index at = 0) {
  p.segment<3>(at) = pose.rotation_vector();
  p.segment<3>(at + 3) = pose.t;
}

/// Homography (3x3, up to scale) mapping plane coordinates to normalized image coordinates.
inline Mat3 fit_homography(const std::vector<Vec2>& src, const std::vector<Vec2>& dst) {
  auto normalizer = [](const std::vector<Vec2>& pts) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double d = 0.0;
    for (const auto& p : pts) d += (p - mean).norm();
    d /= static_cast<double>(pts.size());
    const double s = d > 0.0 ? std::sqrt(2.0) / d : 1.0;
    Mat3 T;
    T << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
    return T;
  };
  const Mat3 Ts = normalizer(src);
  const Mat3 Td = normalizer(dst);
  Eigen::MatrixXd A(2 * src.size(), 9);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 s = Ts * src[i].homogeneous();
    const Vec3 d = Td * dst[i].homogeneous();
    A.row(2 * i) << -s.x(), -s.y(), -1, 0, 0, 0, d.x() * s.x(), d.x() * s.y(), d.x();
    A.row(2 * i + 1) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(), d.y() * s.y(), d.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 Hn;
  Hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  return Td.inverse() * Hn * Ts;
}

inline Mat3 nearest_rotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0) {
    Mat3 U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  return R;
}

}  // namespace detail

struct PoseEstimate {
  RigidTransform pose;
  double rms_px = 0.0;
  int iterations = 0;
};

/// Board pose minimizing the summed squared pixel distance between detected features and
/// reprojected model points. Initialized from a planar homography, refined by damped least squares.
inline PoseEstimate estimate_pose(const FeatureSet& features, const PinholeCamera& camera, const LmOptions& opt = {}) {
  const auto n = features.matches.size();
  if (n < 4) throw DegenerateError("pose estimation needs at least 4 correspondences");

  Vec3 centroid = Vec3::Zero();
  for (const auto& m : features.matches) centroid += m.model;
  centroid /= static_cast<double>(n);
  Eigen::MatrixXd centered(n, 3);
  for (std::size_t i = 0; i < n; ++i) centered.row(i) = (features.matches[i].model - centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto sv = svd.singularValues();
  if (!(sv[1] > 1e-9 * sv[0])) throw DegenerateError("model points are collinear (rank-deficient configuration)");

  // Board-aligned frame for z = 0 models, otherwise the plane of the two dominant directions.
  bool on_z0 = true;
  for (const auto& m : features.matches) on_z0 = on_z0 && m.model.z() == 0.0;
  Mat3 B = Mat3::Identity();
  if (!on_z0) {
    B.col(0) = svd.matrixV().col(0);
    B.col(1) = svd.matrixV().col(1);
    B.col(2) = B.col(0).cross(B.col(1));
  }

  std::vector<Vec2> plane(n), img(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 local = B.transpose() * (features.matches[i].model - centroid);
    plane[i] = local.head<2>();
    img[i] = camera.undistort(camera.to_normalized(features.matches[i].image));
  }
  const Mat3 H = detail::fit_homography(plane, img);
  const double scale = 2.0 / (H.col(0).norm() + H.col(1).norm());
  Mat3 M;
  M.col(0) = H.col(0) * scale;
  M.col(1) = H.col(1) * scale;
  Vec3 tp = H.col(2) * scale;
  if (tp.z() < 0) {
    M.col(0) = -M.col(0);
    M.col(1) = -M.col(1);
    tp = -tp;
  }
  M.col(2) = M.col(0).cross(M.col(1));
  const Mat3 Rp = detail::nearest_rotation(M);

  RigidTransform init{Rp * B.transpose(), tp - Rp * B.transpose() * centroid};

  Eigen::VectorXd x(6);
  detail::pose_to_params(init, x);
  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(2 * n));
    detail::pose_residuals(camera, features, detail::pose_from_params(p), r);
  };
  Eigen::VectorXd scale_vec(6);
  const double depth = std::max(std::abs(init.t.z()), 1e-3);
  scale_vec << 1, 1, 1, depth, depth, depth;
  auto jac = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& r0, Eigen::MatrixXd& J) {
    numeric_jacobian(residuals, p, r0, scale_vec, J);
  };
  const LmResult lm = levenberg_marquardt(residuals, jac, x, opt);

  PoseEstimate out;
  out.pose = detail::pose_from_params(lm.params);
  out.rms_px = std::sqrt(2.0 * lm.cost() / static_cast<double>(n));
  out.iterations = lm.iterations;
  return out;
}

}  // namespace msfuse::calib
