#pragma once

// Parametric quantile regression for the quantile-based Singh-Maddala and
// Dagum families: g(gamma_i) = x_i' beta(tau), with all parameters estimated
// jointly by maximum likelihood. Optimization runs in (beta, log a, log q|p)
// coordinates so the shape positivity constraints are exact; standard errors
// come from the inverse of a finite-difference observed-information matrix
// in the original coordinates.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qincome/bfgs.hpp"
#include "qincome/distributions.hpp"
#include "qincome/linalg.hpp"
#include "qincome/specfun.hpp"
#include "qincome/stats.hpp"

namespace qincome::regression {

enum class Family { SinghMaddala, Dagum };
enum class Link { Log, Identity };

inline const char* family_name(Family f) {
  return f == Family::SinghMaddala ? "sm" : "dagum";
}
inline const char* link_name(Link l) {
  return l == Link::Log ? "log" : "identity";
}
inline const char* shape2_name(Family f) {
  return f == Family::SinghMaddala ? "q" : "p";
}

// g(gamma): positive quantile -> linear-predictor scale.
inline double link_apply(Link link, double gamma) {
  if (!(gamma > 0.0))
    throw std::domain_error("link_apply: gamma must be positive");
  return link == Link::Log ? std::log(gamma) : gamma;
}

// g^{-1}(eta). The identity link is only defined for eta > 0.
inline double link_invert(Link link, double eta) {
  if (link == Link::Log) return std::exp(eta);
  if (!(eta > 0.0))
    throw std::range_error("link_invert: identity link requires eta > 0");
  return eta;
}

struct RegressionSpec {
  Family family = Family::SinghMaddala;
  double tau = 0.5;
  Link link = Link::Log;
  bool intercept = true;
  std::vector<std::string> covariate_names;  // optional, for reports
};

struct DesignData {
  linalg::Matrix X;       // n x (k+1), first column all ones when intercept on
  std::vector<double> y;  // positive responses

  std::size_t n() const { return y.size(); }
  std::size_t n_coef() const { return X.cols(); }
};

inline void validate(const DesignData& data) {
  if (data.X.rows() != data.y.size())
    throw std::invalid_argument("design data: X rows must match y length");
  if (data.y.empty()) throw std::invalid_argument("design data: empty sample");
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    if (!std::isfinite(data.y[i]) || data.y[i] <= 0.0)
      throw std::invalid_argument("design data: response at row " +
                                  std::to_string(i + 1) +
                                  " must be positive and finite");
    for (std::size_t j = 0; j < data.X.cols(); ++j)
      if (!std::isfinite(data.X(i, j)))
        throw std::invalid_argument("design data: non-finite covariate at row " +
                                    std::to_string(i + 1));
  }
  if (linalg::column_rank(data.X) < data.X.cols())
    throw std::invalid_argument("design data: X is rank deficient");
}

struct ParamVector {
  std::vector<double> beta;
  double shape_a = 1.0;  // a
  double shape2 = 1.0;   // q (Singh-Maddala) or p (Dagum)

  std::size_t size() const { return beta.size() + 2; }
};

struct FitResult {
  RegressionSpec spec;
  ParamVector estimates;
  linalg::Matrix covariance;  // empty when unavailable
  bool covariance_valid = false;
  std::vector<double> std_errors;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double aic = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_obs = 0;

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    const std::size_t k1 = estimates.beta.size();
    for (std::size_t j = 0; j < k1; ++j) {
      if (spec.intercept && j == 0) {
        names.push_back("(intercept)");
      } else {
        const std::size_t c = spec.intercept ? j - 1 : j;
        names.push_back(c < spec.covariate_names.size()
                            ? spec.covariate_names[c]
                            : "x" + std::to_string(c + 1));
      }
    }
    names.push_back("a");
    names.push_back(shape2_name(spec.family));
    return names;
  }
};

inline double aic_value(double loglik, std::size_t n_params) {
  return 2.0 * static_cast<double>(n_params) - 2.0 * loglik;
}
inline double bic_value(double loglik, std::size_t n_params,
                        std::size_t n_obs) {
  return static_cast<double>(n_params) * std::log(static_cast<double>(n_obs)) -
         2.0 * loglik;
}

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// conditional quantiles gamma_i = g^{-1}(x_i' beta); empty when infeasible
inline bool linear_gammas(const RegressionSpec& spec, const linalg::Matrix& x,
                          const std::vector<double>& beta,
                          std::vector<double>& out) {
  if (x.cols() != beta.size())
    throw std::invalid_argument("beta length does not match design matrix");
  out.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) eta += x(i, j) * beta[j];
    if (spec.link == Link::Log) {
      out[i] = std::exp(eta);
    } else {
      if (!(eta > 0.0)) return false;  // infeasible point
      out[i] = eta;
    }
    if (!std::isfinite(out[i]) || out[i] <= 0.0) return false;
  }
  return true;
}

struct SigmoidParts {
  double w;            // u/(1+u) with u = exp(m)
  double one_minus_w;  // 1/(1+u)
  double softplus;     // log(1+u)
};

inline SigmoidParts sigmoid_parts(double m) {
  if (m > 36.0) return {1.0, std::exp(-m), m};
  if (m < -36.0) {
    const double em = std::exp(m);
    return {em, 1.0, em};
  }
  const double em = std::exp(m);
  return {em / (1.0 + em), 1.0 / (1.0 + em), std::log1p(em)};
}

}  // namespace detail

// Negative log-likelihood of theta, +inf for infeasible theta. The
// per-observation terms are the quantile-based log-densities from the
// distributions module.
inline double neg_log_likelihood(const RegressionSpec& spec,
                                 const DesignData& data,
                                 const ParamVector& theta) {
  if (!(theta.shape_a > 0.0) || !(theta.shape2 > 0.0)) return detail::kInf;
  std::vector<double> gammas;
  if (!detail::linear_gammas(spec, data.X, theta.beta, gammas))
    return detail::kInf;

  double nll = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double lp;
    if (spec.family == Family::SinghMaddala) {
      lp = distributions::log_pdf(
          distributions::QuantileSM{theta.shape_a, gammas[i], theta.shape2,
                                    spec.tau},
          data.y[i]);
    } else {
      lp = distributions::log_pdf(
          distributions::QuantileDA{theta.shape_a, gammas[i], theta.shape2,
                                    spec.tau},
          data.y[i]);
    }
    nll -= lp;
  }
  return std::isfinite(nll) ? nll : detail::kInf;
}

// Gradient of the negative log-likelihood with respect to
// (beta_0..beta_k, a, q|p) in the original coordinates.
inline std::vector<double> analytic_gradient(const RegressionSpec& spec,
                                             const DesignData& data,
                                             const ParamVector& theta) {
  if (!(theta.shape_a > 0.0) || !(theta.shape2 > 0.0))
    throw std::domain_error("analytic_gradient: shapes must be positive");
  std::vector<double> gammas;
  if (!detail::linear_gammas(spec, data.X, theta.beta, gammas))
    throw std::range_error("analytic_gradient: infeasible linear predictor");

  const std::size_t k1 = theta.beta.size();
  std::vector<double> grad(k1 + 2, 0.0);
  const double a = theta.shape_a;
  const double s2 = theta.shape2;

  if (spec.family == Family::SinghMaddala) {
    const double kappa = -std::log1p(-spec.tau);  // = -log(1-tau) > 0
    const double cq = std::expm1(kappa / s2);
    const double lcq = std::log(cq);
    const double dlog_cq = -kappa * (1.0 + cq) / (s2 * s2 * cq);  // d log c_q / dq
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double t = std::log(data.y[i]) - std::log(gammas[i]);
      const auto sp = detail::sigmoid_parts(lcq + a * t);
      // d log f / d gamma * gamma (log link) or / gamma (identity)
      const double dgam_scaled = a * (s2 * sp.w - sp.one_minus_w);
      const double dgam = spec.link == Link::Log ? dgam_scaled
                                                 : dgam_scaled / gammas[i];
      const double da = 1.0 / a + t * (sp.one_minus_w - s2 * sp.w);
      const double dq = 1.0 / s2 + dlog_cq - sp.softplus -
                        (1.0 + s2) * sp.w * dlog_cq;
      for (std::size_t j = 0; j < k1; ++j) grad[j] -= dgam * data.X(i, j);
      grad[k1] -= da;
      grad[k1 + 1] -= dq;
    }
  } else {
    const double h = -std::log(spec.tau);  // > 0
    const double ep = std::expm1(h / s2);
    const double lep = std::log(ep);
    const double dlog_ep = -h * (1.0 + ep) / (s2 * s2 * ep);  // d log e_p / dp
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double t = std::log(data.y[i]) - std::log(gammas[i]);
      const double m = a * t - lep;
      const auto sp = detail::sigmoid_parts(m);
      const double dgam_scaled = a * (sp.w - s2 * sp.one_minus_w);
      const double dgam = spec.link == Link::Log ? dgam_scaled
                                                 : dgam_scaled / gammas[i];
      const double da = 1.0 / a + t * (s2 * sp.one_minus_w - sp.w);
      // d log f / d p, with a*t - lep - softplus(m) folded to -softplus(-m)
      const double dp = 1.0 / s2 - distributions::detail::softplus(-m) +
                        dlog_ep * (sp.w - s2 * sp.one_minus_w);
      for (std::size_t j = 0; j < k1; ++j) grad[j] -= dgam * data.X(i, j);
      grad[k1] -= da;
      grad[k1 + 1] -= dp;
    }
  }
  return grad;
}

struct FitOptions {
  bfgs::Options optimizer;
  bool compute_covariance = true;
};

namespace detail {

// Observed information: central finite differences of the analytic score at
// theta-hat, in original coordinates, step 1e-5 * max(1, |theta_j|).
inline std::optional<linalg::Matrix> observed_information(
    const RegressionSpec& spec, const DesignData& data,
    const ParamVector& theta) {
  const std::size_t k1 = theta.beta.size();
  const std::size_t np = k1 + 2;

  auto pack = [&](const ParamVector& t) {
    std::vector<double> v(t.beta);
    v.push_back(t.shape_a);
    v.push_back(t.shape2);
    return v;
  };
  auto unpack = [&](const std::vector<double>& v) {
    ParamVector t;
    t.beta.assign(v.begin(), v.begin() + k1);
    t.shape_a = v[k1];
    t.shape2 = v[k1 + 1];
    return t;
  };

  const std::vector<double> center = pack(theta);
  linalg::Matrix hess(np, np);
  for (std::size_t j = 0; j < np; ++j) {
    double step = 1e-5 * std::max(1.0, std::abs(center[j]));
    // keep shape perturbations positive
    if (j >= k1) step = std::min(step, 0.5 * center[j]);
    std::vector<double> hi = center, lo = center;
    hi[j] += step;
    lo[j] -= step;
    std::vector<double> g_hi, g_lo;
    try {
      g_hi = analytic_gradient(spec, data, unpack(hi));
      g_lo = analytic_gradient(spec, data, unpack(lo));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    for (std::size_t i = 0; i < np; ++i)
      hess(i, j) = (g_hi[i] - g_lo[i]) / (2.0 * step);
  }
  // symmetrize
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = i + 1; j < np; ++j) {
      const double m = 0.5 * (hess(i, j) + hess(j, i));
      hess(i, j) = m;
      hess(j, i) = m;
    }
  return hess;
}

}  // namespace detail

inline FitResult fit(const RegressionSpec& spec, const DesignData& data,
                     std::optional<ParamVector> init = std::nullopt,
                     const FitOptions& options = {}) {
  if (!(spec.tau > 0.0 && spec.tau < 1.0))
    throw std::invalid_argument("fit: tau must lie in (0,1)");
  validate(data);
  const std::size_t k1 = data.n_coef();
  if (k1 >= data.n())
    throw std::invalid_argument("fit: need more observations than coefficients");

  ParamVector start;
  if (init) {
    start = *init;
    if (start.beta.size() != k1)
      throw std::invalid_argument("fit: init beta length mismatch");
    if (!(start.shape_a > 0.0) || !(start.shape2 > 0.0))
      throw std::invalid_argument("fit: init shapes must be positive");
  } else {
    // scale-aware deterministic start: intercept at the empirical tau-quantile
    start.beta.assign(k1, 0.0);
    const double yq = stats::empirical_quantile(data.y, spec.tau);
    start.beta[0] = link_apply(spec.link, yq);
    start.shape_a = 2.0;
    start.shape2 = 1.0;
  }

  // optimize over phi = (beta, log a, log shape2)
  auto to_theta = [&](const std::vector<double>& phi) {
    ParamVector t;
    t.beta.assign(phi.begin(), phi.begin() + k1);
    t.shape_a = std::exp(phi[k1]);
    t.shape2 = std::exp(phi[k1 + 1]);
    return t;
  };

  std::vector<double> phi0(start.beta);
  phi0.push_back(std::log(start.shape_a));
  phi0.push_back(std::log(start.shape2));

  auto objective = [&](const std::vector<double>& phi) {
    return neg_log_likelihood(spec, data, to_theta(phi));
  };
  auto gradient = [&](const std::vector<double>& phi) {
    const ParamVector t = to_theta(phi);
    std::vector<double> g = analytic_gradient(spec, data, t);
    g[k1] *= t.shape_a;       // chain rule through log a
    g[k1 + 1] *= t.shape2;    // chain rule through log shape2
    return g;
  };

  const bfgs::Result opt =
      bfgs::minimize(objective, gradient, phi0, options.optimizer);

  FitResult res;
  res.spec = spec;
  res.estimates = to_theta(opt.x);
  res.converged = opt.converged;
  res.iterations = opt.iterations;
  res.grad_norm = opt.grad_norm;
  res.n_obs = data.n();
  res.loglik = -opt.value;
  res.aic = aic_value(res.loglik, k1 + 2);
  res.bic = bic_value(res.loglik, k1 + 2, data.n());

  if (options.compute_covariance && std::isfinite(opt.value)) {
    if (auto info = detail::observed_information(spec, data, res.estimates)) {
      if (auto cov = linalg::invert(*info)) {
        for (std::size_t i = 0; i < cov->rows(); ++i)
          for (std::size_t j = i + 1; j < cov->cols(); ++j) {
            const double m = 0.5 * ((*cov)(i, j) + (*cov)(j, i));
            (*cov)(i, j) = m;
            (*cov)(j, i) = m;
          }
        bool diag_ok = true;
        for (std::size_t j = 0; j < cov->rows(); ++j)
          if (!((*cov)(j, j) >= 0.0)) diag_ok = false;
        if (diag_ok) {
          res.covariance = *cov;
          res.covariance_valid = true;
          res.std_errors.resize(cov->rows());
          for (std::size_t j = 0; j < cov->rows(); ++j)
            res.std_errors[j] = std::sqrt((*cov)(j, j));
        }
      }
    }
  }
  return res;
}

// Wald interval theta_j +/- z_{(1+level)/2} * SE_j.
inline std::pair<double, double> wald_interval(const FitResult& fit,
                                               std::size_t index,
                                               double level) {
  if (!fit.covariance_valid)
    throw std::runtime_error("wald_interval: covariance unavailable");
  if (index >= fit.std_errors.size())
    throw std::out_of_range("wald_interval: parameter index out of range");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("wald_interval: level must lie in (0,1)");
  const double z = specfun::std_normal_quantile(0.5 * (1.0 + level));
  double est;
  if (index < fit.estimates.beta.size()) {
    est = fit.estimates.beta[index];
  } else if (index == fit.estimates.beta.size()) {
    est = fit.estimates.shape_a;
  } else {
    est = fit.estimates.shape2;
  }
  const double half = z * fit.std_errors[index];
  return {est - half, est + half};
}

// Estimated conditional tau-quantiles at new covariate rows.
inline std::vector<double> predict_gamma(const FitResult& fit,
                                         const linalg::Matrix& x_new) {
  if (x_new.cols() != fit.estimates.beta.size())
    throw std::invalid_argument("predict_gamma: column count mismatch");
  std::vector<double> out(x_new.rows());
  for (std::size_t i = 0; i < x_new.rows(); ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < x_new.cols(); ++j)
      eta += x_new(i, j) * fit.estimates.beta[j];
    if (fit.spec.link == Link::Identity && !(eta > 0.0))
      throw std::range_error("predict_gamma: nonpositive prediction at row " +
                             std::to_string(i + 1));
    out[i] = link_invert(fit.spec.link, eta);
  }
  return out;
}

// Fitted conditional distribution helpers (branch on family once).
inline double conditional_cdf(const FitResult& fit, double gamma_i, double y) {
  if (fit.spec.family == Family::SinghMaddala)
    return distributions::cdf(
        distributions::QuantileSM{fit.estimates.shape_a, gamma_i,
                                  fit.estimates.shape2, fit.spec.tau},
        y);
  return distributions::cdf(
      distributions::QuantileDA{fit.estimates.shape_a, gamma_i,
                                fit.estimates.shape2, fit.spec.tau},
      y);
}

inline double conditional_quantile(const FitResult& fit, double gamma_i,
                                   double u) {
  if (fit.spec.family == Family::SinghMaddala)
    return distributions::quantile(
        distributions::QuantileSM{fit.estimates.shape_a, gamma_i,
                                  fit.estimates.shape2, fit.spec.tau},
        u);
  return distributions::quantile(
      distributions::QuantileDA{fit.estimates.shape_a, gamma_i,
                                fit.estimates.shape2, fit.spec.tau},
      u);
}

}  // namespace qincome::regression
