#pragma once

// Residual diagnostics and interval machinery: generalized Cox-Snell and
// quantile residuals, their summary statistics, simulated QQ envelopes, and
// conditional-quantile prediction bands.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qincome/regression.hpp"
#include "qincome/specfun.hpp"
#include "qincome/stats.hpp"

namespace qincome::diagnostics {

enum class ResidualType { GCS, RQ };

inline const char* residual_name(ResidualType t) {
  return t == ResidualType::GCS ? "gcs" : "rq";
}

namespace detail {

// Fitted CDF values clamped away from {0,1} so the residual transforms stay
// finite.
inline constexpr double kProbEps = 1e-15;

inline std::vector<double> fitted_cdf_values(const regression::FitResult& fit,
                                             const regression::DesignData& data) {
  const std::vector<double> gammas = regression::predict_gamma(fit, data.X);
  std::vector<double> out(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    double f = regression::conditional_cdf(fit, gammas[i], data.y[i]);
    f = std::min(std::max(f, kProbEps), 1.0 - kProbEps);
    out[i] = f;
  }
  return out;
}

}  // namespace detail

// Generalized Cox-Snell residuals -log(1 - F(y_i)); standard exponential
// under a correctly specified model.
inline std::vector<double> gcs_residuals(const regression::FitResult& fit,
                                         const regression::DesignData& data) {
  std::vector<double> r = detail::fitted_cdf_values(fit, data);
  for (double& f : r) f = -std::log1p(-f);
  return r;
}

// Quantile residuals Phi^{-1}(F(y_i)); standard normal under a correctly
// specified model. Both families are continuous so no randomization is
// involved.
inline std::vector<double> rq_residuals(const regression::FitResult& fit,
                                        const regression::DesignData& data) {
  std::vector<double> r = detail::fitted_cdf_values(fit, data);
  for (double& f : r) f = specfun::std_normal_quantile(f);
  return r;
}

struct ResidualSummary {
  double mean;
  double median;
  double sd;
  double skewness;
  double excess_kurtosis;
};

// mean / median / sd (n-1) / m3 m2^{-3/2} / m4 m2^{-2} - 3
inline ResidualSummary residual_summary(const std::vector<double>& residuals) {
  if (residuals.size() < 4)
    throw std::invalid_argument("residual_summary: need at least 4 values");
  const double sd = stats::sample_sd(residuals);
  if (sd == 0.0)
    throw std::invalid_argument("residual_summary: degenerate sample (sd = 0)");
  const auto cm = stats::central_moments(residuals);
  return ResidualSummary{stats::mean(residuals), stats::median(residuals), sd,
                         cm.m3 / std::pow(cm.m2, 1.5),
                         cm.m4 / (cm.m2 * cm.m2) - 3.0};
}

struct ResidualReport {
  std::vector<double> gcs;
  std::vector<double> rq;
  ResidualSummary gcs_summary;
  ResidualSummary rq_summary;
};

inline ResidualReport residual_report(const regression::FitResult& fit,
                                      const regression::DesignData& data) {
  ResidualReport rep;
  rep.gcs = gcs_residuals(fit, data);
  rep.rq = rq_residuals(fit, data);
  rep.gcs_summary = residual_summary(rep.gcs);
  rep.rq_summary = residual_summary(rep.rq);
  return rep;
}

struct EnvelopeBand {
  std::vector<double> sorted_residuals;
  std::vector<double> theoretical;  // Exp(1) or N(0,1) plotting positions
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
  int n_sim = 0;
  double level = 0.0;
  int dropped = 0;  // replicates discarded for non-convergence
};

// Simulated envelope: simulate n_sim responses from the fitted model at the
// observed covariates, refit each replicate, and take pointwise quantiles of
// the sorted residuals. Replicates whose refit fails are dropped; more than
// 20% drops is an error.
inline EnvelopeBand simulated_envelope(const regression::FitResult& fit,
                                       const regression::DesignData& data,
                                       ResidualType type, int n_sim,
                                       double level, std::uint64_t seed) {
  if (n_sim < 19)
    throw std::invalid_argument("simulated_envelope: need n_sim >= 19");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("simulated_envelope: level must be in (0,1)");
  if (!fit.converged)
    throw std::invalid_argument("simulated_envelope: fit did not converge");

  const std::size_t n = data.n();
  const std::vector<double> gammas = regression::predict_gamma(fit, data.X);

  std::vector<std::vector<double>> sims;
  sims.reserve(n_sim);
  int dropped = 0;
  for (int rep = 0; rep < n_sim; ++rep) {
    specfun::UniformStream stream(specfun::mix_seed(seed, rep + 1));
    regression::DesignData sim_data;
    sim_data.X = data.X;
    sim_data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      sim_data.y[i] =
          regression::conditional_quantile(fit, gammas[i], stream.next());

    regression::FitOptions opts;
    opts.compute_covariance = false;
    regression::FitResult refit;
    try {
      refit = regression::fit(fit.spec, sim_data, std::nullopt, opts);
    } catch (const std::exception&) {
      ++dropped;
      continue;
    }
    if (!refit.converged) {
      ++dropped;
      continue;
    }
    std::vector<double> r = type == ResidualType::GCS
                                ? gcs_residuals(refit, sim_data)
                                : rq_residuals(refit, sim_data);
    std::sort(r.begin(), r.end());
    sims.push_back(std::move(r));
  }
  if (dropped > n_sim / 5)
    throw std::runtime_error("simulated_envelope: more than 20% of replicates "
                             "failed to refit (" +
                             std::to_string(dropped) + " of " +
                             std::to_string(n_sim) + ")");

  EnvelopeBand band;
  band.n_sim = n_sim;
  band.level = level;
  band.dropped = dropped;
  band.sorted_residuals = type == ResidualType::GCS ? gcs_residuals(fit, data)
                                                    : rq_residuals(fit, data);
  std::sort(band.sorted_residuals.begin(), band.sorted_residuals.end());

  band.theoretical.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    band.theoretical[i] = type == ResidualType::GCS
                              ? -std::log1p(-p)
                              : specfun::std_normal_quantile(p);
  }

  band.lower.resize(n);
  band.median.resize(n);
  band.upper.resize(n);
  std::vector<double> column(sims.size());
  const double lo_p = 0.5 * (1.0 - level);
  const double hi_p = 0.5 * (1.0 + level);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < sims.size(); ++s) column[s] = sims[s][i];
    std::sort(column.begin(), column.end());
    band.lower[i] = stats::sorted_quantile(column, lo_p);
    band.median[i] = stats::sorted_quantile(column, 0.5);
    band.upper[i] = stats::sorted_quantile(column, hi_p);
  }
  return band;
}

// CSV emission for external plotting.
inline std::string envelope_to_csv(const EnvelopeBand& band) {
  std::ostringstream out;
  out << "index,theoretical,observed,lower,median,upper\n";
  char buf[160];
  for (std::size_t i = 0; i < band.sorted_residuals.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6g,%.6g,%.6g,%.6g,%.6g\n", i + 1,
                  band.theoretical[i], band.sorted_residuals[i], band.lower[i],
                  band.median[i], band.upper[i]);
    out << buf;
  }
  return out.str();
}

struct PredictionBand {
  std::vector<double> lower;
  std::vector<double> point;  // estimated conditional tau-quantile
  std::vector<double> upper;
  double level = 0.0;
  std::optional<double> coverage_observed;
};

// Per-row conditional-quantile interval at the point estimates.
inline PredictionBand prediction_interval(
    const regression::FitResult& fit, const linalg::Matrix& x_new, double level,
    const std::vector<double>* y_true = nullptr) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("prediction_interval: level must be in (0,1)");
  PredictionBand band;
  band.level = level;
  band.point = regression::predict_gamma(fit, x_new);
  const std::size_t m = band.point.size();
  band.lower.resize(m);
  band.upper.resize(m);
  const double lo_p = 0.5 * (1.0 - level);
  const double hi_p = 0.5 * (1.0 + level);
  for (std::size_t i = 0; i < m; ++i) {
    band.lower[i] = regression::conditional_quantile(fit, band.point[i], lo_p);
    band.upper[i] = regression::conditional_quantile(fit, band.point[i], hi_p);
  }
  if (y_true != nullptr) {
    if (y_true->size() != m)
      throw std::invalid_argument("prediction_interval: y_true length mismatch");
    std::size_t covered = 0;
    for (std::size_t i = 0; i < m; ++i)
      if ((*y_true)[i] >= band.lower[i] && (*y_true)[i] <= band.upper[i])
        ++covered;
    band.coverage_observed =
        static_cast<double>(covered) / static_cast<double>(m);
  }
  return band;
}

}  // namespace qincome::diagnostics
