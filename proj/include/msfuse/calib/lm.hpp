#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace msfuse::calib {

struct LmOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;  ///< relative to the parameter norm
  double lambda_initial = 1e-3;
  double lambda_factor = 10.0;
};

struct LmResult {
  Eigen::VectorXd params;
  std::vector<double> cost_history;  ///< accepted costs, starting with the initial one
  int iterations = 0;
  bool converged = false;
  double cost() const { return cost_history.back(); }
};

/// Damped Gauss-Newton (Marquardt scaling) on 0.5*|r(x)|^2.
/// `residuals(x, r)` fills r; `jacobian(x, r, J)` fills J. Only improving steps are accepted,
/// so the cost history is non-increasing.
template <class ResidualFn, class JacobianFn>
LmResult levenberg_marquardt(ResidualFn&& residuals, JacobianFn&& jacobian, Eigen::VectorXd x, const LmOptions& opt = {}) {
  LmResult res;
  Eigen::VectorXd r;
  residuals(x, r);
  double cost = 0.5 * r.squaredNorm();
  res.cost_history.push_back(cost);
  double lambda = opt.lambda_initial;
  Eigen::MatrixXd J;

  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    jacobian(x, r, J);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    Eigen::VectorXd diag = JtJ.diagonal();
    const double diag_floor = std::max(diag.maxCoeff(), 1.0) * 1e-15;
    for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = std::max(diag[i], diag_floor);

    bool improved = false;
    Eigen::VectorXd step;
    while (lambda < 1e20) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * diag;
      step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= opt.lambda_factor;
        continue;
      }
      Eigen::VectorXd xn = x + step;
      Eigen::VectorXd rn;
      residuals(xn, rn);
      const double cn = 0.5 * rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        x = std::move(xn);
        r = std::move(rn);
        cost = cn;
        lambda = std::max(lambda / opt.lambda_factor, 1e-12);
        improved = true;
        break;
      }
      lambda *= opt.lambda_factor;
      if (step.norm() <= opt.step_tolerance * (x.norm() + opt.step_tolerance)) break;
    }
    if (!improved) {
      res.converged = true;
      break;
    }
    res.cost_history.push_back(cost);
    if (step.norm() <= opt.step_tolerance * (x.norm() + opt.step_tolerance)) {
      res.converged = true;
      break;
    }
  }
  res.params = std::move(x);
  return res;
}

/// Central-difference Jacobian with per-parameter step scale[i] * rel_step.
template <class ResidualFn>
void numeric_jacobian(ResidualFn&& residuals, const Eigen::VectorXd& x, const Eigen::VectorXd& r0,
                      const Eigen::VectorXd& scale, Eigen::MatrixXd& J, double rel_step = 1e-6) {
  J.resize(r0.size(), x.size());
  Eigen::VectorXd xp = x, rp, rm;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(std::abs(x[i]), scale[i]);
    xp[i] = x[i] + h;
    residuals(xp, rp);
    xp[i] = x[i] - h;
    residuals(xp, rm);
    xp[i] = x[i];
    J.col(i) = (rp - rm) / (2.0 * h);
  }
}

}  // namespace msfuse::calib
