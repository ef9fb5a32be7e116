#pragma once

// Dense BFGS quasi-Newton minimizer with inverse-Hessian updates and a
// backtracking Armijo line search. Non-finite objective values are treated
// as infeasible points and rejected by the line search.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qincome/linalg.hpp"

namespace qincome::bfgs {

struct Options {
  int max_iterations = 500;
  double grad_tolerance = 1e-6;       // max-norm of the gradient
  double objective_tolerance = 1e-10; // successive objective change
  double armijo_c1 = 1e-4;
  int max_backtracks = 60;
};

struct Result {
  std::vector<double> x;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> gradient;
  bool converged = false;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

using Objective = std::function<double(const std::vector<double>&)>;
using Gradient =
    std::function<std::vector<double>(const std::vector<double>&)>;

inline Result minimize(const Objective& f, const Gradient& grad,
                       std::vector<double> x0, const Options& opts = {}) {
  using linalg::Matrix;
  const std::size_t n = x0.size();

  Result res;
  res.x = std::move(x0);
  res.value = f(res.x);
  if (!std::isfinite(res.value)) {
    // infeasible start: nothing sensible to do
    res.gradient.assign(n, std::numeric_limits<double>::quiet_NaN());
    return res;
  }
  res.gradient = grad(res.x);
  res.grad_norm = linalg::max_abs(res.gradient);

  Matrix h = Matrix::identity(n);
  bool reset_done = false;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (res.grad_norm < opts.grad_tolerance) {
      res.converged = true;
      return res;
    }

    std::vector<double> dir = linalg::matvec(h, res.gradient);
    for (double& d : dir) d = -d;
    double slope = linalg::dot(res.gradient, dir);
    if (!(slope < 0.0)) {
      // not a descent direction; restart from steepest descent
      h = Matrix::identity(n);
      dir = res.gradient;
      for (double& d : dir) d = -d;
      slope = linalg::dot(res.gradient, dir);
    }

    double step = 1.0;
    double f_new = res.value;
    std::vector<double> x_new(n);
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * dir[i];
      f_new = f(x_new);
      if (std::isfinite(f_new) &&
          f_new <= res.value + opts.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (!reset_done) {
        // one restart with a fresh Hessian before giving up
        reset_done = true;
        h = Matrix::identity(n);
        continue;
      }
      res.converged = res.grad_norm < opts.grad_tolerance;
      return res;
    }

    const double f_old = res.value;
    std::vector<double> g_new = grad(x_new);

    std::vector<double> s(n), yv(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      yv[i] = g_new[i] - res.gradient[i];
    }

    res.x = std::move(x_new);
    res.value = f_new;
    res.gradient = std::move(g_new);
    res.grad_norm = linalg::max_abs(res.gradient);

    if (std::abs(f_old - f_new) < opts.objective_tolerance) {
      res.iterations = iter + 1;
      res.converged = true;
      return res;
    }

    // BFGS inverse-Hessian update, skipped when curvature is too small
    const double sy = linalg::dot(s, yv);
    double s_norm = 0.0, y_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s_norm += s[i] * s[i];
      y_norm += yv[i] * yv[i];
    }
    if (sy > 1e-12 * std::sqrt(s_norm * y_norm)) {
      const double rho = 1.0 / sy;
      const std::vector<double> hy = linalg::matvec(h, yv);
      const double yhy = linalg::dot(yv, hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h(i, j) += (1.0 + rho * yhy) * rho * s[i] * s[j] -
                     rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
      }
    }
  }

  res.iterations = opts.max_iterations;
  res.converged = res.grad_norm < opts.grad_tolerance;
  return res;
}

}  // namespace qincome::bfgs
