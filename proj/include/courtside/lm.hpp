// Box-constrained Levenberg-Marquardt used by the camera refinement and the
// shot fitter.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace courtside::lm {

struct Options {
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  // Cosine between the residual and any Jacobian column (MINPACK gtol).
  double gradient_tol = 1e-8;
  double step_tol = 1e-10;
  // Mean squared residual below which the fit is exact for practical purposes.
  double cost_tol = 1e-12;
  int max_iterations = 100;
};

struct Result {
  Eigen::VectorXd x;
  double cost = 0.0;  // sum of squared residuals
  double gradient_cos = 0.0;
  int iterations = 0;
  bool converged = false;
};

// True where a small descent move along -g is cancelled by clamp(), i.e.
// the variable sits on a bound with the gradient pointing outward.
template <typename Clamp>
std::vector<bool> pinned(const Eigen::VectorXd& g, const Eigen::VectorXd& x, Clamp&& clamp) {
  std::vector<bool> out(static_cast<std::size_t>(x.size()), false);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (g(j) == 0.0) continue;
    Eigen::VectorXd probe = x;
    probe(j) -= std::copysign(1e-9 * (1.0 + std::abs(x(j))), g(j));
    Eigen::VectorXd clamped = probe;
    clamp(clamped);
    out[static_cast<std::size_t>(j)] = clamped(j) == x(j) && probe(j) != x(j);
  }
  return out;
}

// Largest |J_j . r| / (|J_j| |r|) over columns not pinned at a bound.
template <typename Clamp>
double gradient_cosine(const Eigen::MatrixXd& J, const Eigen::VectorXd& r, const Eigen::VectorXd& x,
                       Clamp&& clamp) {
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  const Eigen::VectorXd g = J.transpose() * r;
  const auto pin = pinned(g, x, clamp);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < J.cols(); ++j) {
    const double cn = J.col(j).norm();
    if (cn == 0.0 || pin[static_cast<std::size_t>(j)]) continue;
    worst = std::max(worst, std::abs(g(j)) / (cn * rn));
  }
  return worst;
}

// residual(x) -> VectorXd, jacobian(x, r) -> MatrixXd, clamp(VectorXd&) keeps
// x inside the feasible box. Never returns a point worse than x0.
template <typename Residual, typename Jacobian, typename Clamp>
Result minimize(Eigen::VectorXd x0, Residual&& residual, Jacobian&& jacobian, Clamp&& clamp,
                const Options& opt = {}) {
  clamp(x0);
  Result res;
  res.x = x0;
  Eigen::VectorXd r = residual(res.x);
  res.cost = r.squaredNorm();
  if (!std::isfinite(res.cost)) {
    res.cost = std::numeric_limits<double>::infinity();
    return res;
  }
  double lambda = opt.lambda0;
  const double tiny_cost = opt.cost_tol * static_cast<double>(std::max<Eigen::Index>(r.size(), 1));

  Eigen::MatrixXd J = jacobian(res.x, r);
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    res.gradient_cos = gradient_cosine(J, r, res.x, clamp);
    if (res.cost <= tiny_cost || res.gradient_cos < opt.gradient_tol) {
      res.converged = true;
      break;
    }
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;
    // Variables held at a bound drop out of the step.
    const auto pin = pinned(g, res.x, clamp);
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if (!pin[static_cast<std::size_t>(j)]) continue;
      JtJ.row(j).setZero();
      JtJ.col(j).setZero();
      JtJ(j, j) = 1.0;
      g(j) = 0.0;
    }

    bool improved = false;
    bool tiny_step = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      for (Eigen::Index i = 0; i < A.rows(); ++i) {
        A(i, i) += lambda * std::max(JtJ(i, i), 1e-12);
      }
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      Eigen::VectorXd trial = res.x + step;
      clamp(trial);
      const double step_norm = (trial - res.x).norm();
      if (step_norm < opt.step_tol * (res.x.norm() + opt.step_tol)) {
        tiny_step = true;
        break;
      }
      const Eigen::VectorXd r_trial = residual(trial);
      const double c_trial = r_trial.squaredNorm();
      if (std::isfinite(c_trial) && c_trial < res.cost) {
        res.x = trial;
        r = r_trial;
        res.cost = c_trial;
        lambda = std::max(lambda / opt.lambda_down, 1e-15);
        improved = true;
        break;
      }
      lambda *= opt.lambda_up;
    }
    if (!improved || tiny_step) {
      res.gradient_cos = gradient_cosine(J, r, res.x, clamp);
      res.converged = res.cost <= tiny_cost || res.gradient_cos < opt.gradient_tol;
      break;
    }
    J = jacobian(res.x, r);
  }
  if (res.iterations == opt.max_iterations) {
    res.gradient_cos = gradient_cosine(J, r, res.x, clamp);
    res.converged = res.cost <= tiny_cost || res.gradient_cos < opt.gradient_tol;
  }
  return res;
}

}  // namespace courtside::lm
