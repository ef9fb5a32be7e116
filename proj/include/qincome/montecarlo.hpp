#pragma once

// Monte Carlo study harness: generate data from a quantile regression model,
// refit it across replicas, and aggregate relative bias, RMSE and coverage
// probability per parameter plus residual-summary tables per cell.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qincome/diagnostics.hpp"
#include "qincome/regression.hpp"
#include "qincome/specfun.hpp"

namespace qincome::montecarlo {

struct ScenarioConfig {
  regression::Family family = regression::Family::SinghMaddala;
  regression::Link link = regression::Link::Log;
  std::vector<double> true_beta = {1.0, 0.5, 1.5};  // includes intercept
  double true_shape_a = 5.0;
  double true_shape2 = 1.0;  // q or p
  std::vector<double> tau_grid = {0.10, 0.25, 0.50, 0.75, 0.90};
  std::vector<std::size_t> n_grid = {50, 100, 150, 250, 600};
  int n_replicas = 200;
  double ci_level = 0.95;
  std::uint64_t base_seed = 20240808;
  unsigned threads = 0;  // 0 = hardware concurrency
};

inline void validate(const ScenarioConfig& config) {
  if (config.n_replicas < 1)
    throw std::invalid_argument("scenario: need at least one replica");
  if (config.true_beta.empty())
    throw std::invalid_argument("scenario: true_beta must be nonempty");
  if (!(config.true_shape_a > 0.0) || !(config.true_shape2 > 0.0))
    throw std::invalid_argument("scenario: shapes must be positive");
  for (double tau : config.tau_grid)
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("scenario: tau values must lie in (0,1)");
  for (std::size_t n : config.n_grid)
    if (n <= config.true_beta.size() + 2)
      throw std::invalid_argument("scenario: sample sizes must exceed the "
                                  "parameter count");
}

namespace detail {

inline std::uint64_t replica_seed(const ScenarioConfig& config, std::size_t n,
                                  double tau, int replica_index) {
  const auto tau_key = static_cast<std::uint64_t>(std::llround(tau * 1e6));
  return specfun::mix_seed(config.base_seed, n, tau_key,
                           static_cast<std::uint64_t>(replica_index) + 1);
}

}  // namespace detail

// One simulated dataset: covariates U(0,1), gamma_i through the link, y_i by
// inverse transform. Deterministic in (base_seed, n, tau, replica_index).
inline regression::DesignData generate_replica(const ScenarioConfig& config,
                                               std::size_t n, double tau,
                                               int replica_index) {
  validate(config);
  const std::size_t k1 = config.true_beta.size();
  specfun::UniformStream stream(detail::replica_seed(config, n, tau,
                                                     replica_index));
  regression::DesignData data;
  data.X = linalg::Matrix(n, k1);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.X(i, 0) = 1.0;
    double eta = config.true_beta[0];
    for (std::size_t j = 1; j < k1; ++j) {
      const double x = stream.next();
      data.X(i, j) = x;
      eta += config.true_beta[j] * x;
    }
    const double gamma = regression::link_invert(config.link, eta);
    const double u = stream.next();
    if (config.family == regression::Family::SinghMaddala) {
      data.y[i] = distributions::quantile(
          distributions::QuantileSM{config.true_shape_a, gamma,
                                    config.true_shape2, tau},
          u);
    } else {
      data.y[i] = distributions::quantile(
          distributions::QuantileDA{config.true_shape_a, gamma,
                                    config.true_shape2, tau},
          u);
    }
  }
  return data;
}

struct RbRmseCp {
  std::optional<double> rb;  // absent when the true value is zero
  double rmse = 0.0;
  double cp = 0.0;
};

// RB = |(mean estimate - truth)/truth|, RMSE = sqrt(mean squared error),
// CP = fraction of [L,U] containing the truth.
inline RbRmseCp rb_rmse_cp(std::span<const double> estimates,
                           std::span<const double> lowers,
                           std::span<const double> uppers, double truth) {
  const std::size_t m = estimates.size();
  if (m == 0 || lowers.size() != m || uppers.size() != m)
    throw std::invalid_argument("rb_rmse_cp: vectors must share length m >= 1");
  double sum = 0.0, sq = 0.0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sum += estimates[i];
    sq += (estimates[i] - truth) * (estimates[i] - truth);
    if (truth >= lowers[i] && truth <= uppers[i]) ++covered;
  }
  RbRmseCp out;
  if (truth != 0.0)
    out.rb = std::abs((sum / static_cast<double>(m) - truth) / truth);
  out.rmse = std::sqrt(sq / static_cast<double>(m));
  out.cp = static_cast<double>(covered) / static_cast<double>(m);
  return out;
}

struct ParamCellStats {
  std::string name;
  double truth;
  std::optional<double> rb;
  double rmse;
  double cp;
};

struct CellReport {
  std::size_t n = 0;
  double tau = 0.0;
  std::vector<ParamCellStats> params;
  diagnostics::ResidualSummary gcs{};  // replica averages
  diagnostics::ResidualSummary rq{};
  int n_replicas = 0;
  int failures = 0;
  bool aborted = false;  // more than 10% replica failures
};

struct MonteCarloReport {
  ScenarioConfig config;
  std::vector<CellReport> cells;
};

namespace detail {

struct ReplicaOutcome {
  bool ok = false;
  std::vector<double> estimates;
  std::vector<double> lower;
  std::vector<double> upper;
  diagnostics::ResidualSummary gcs{};
  diagnostics::ResidualSummary rq{};
};

inline ReplicaOutcome run_replica(const ScenarioConfig& config, std::size_t n,
                                  double tau, int replica_index) {
  ReplicaOutcome out;
  try {
    const regression::DesignData data =
        generate_replica(config, n, tau, replica_index);
    regression::RegressionSpec spec;
    spec.family = config.family;
    spec.link = config.link;
    spec.tau = tau;
    const regression::FitResult fit = regression::fit(spec, data);
    if (!fit.converged || !fit.covariance_valid) return out;

    const std::size_t np = fit.estimates.size();
    out.estimates.resize(np);
    for (std::size_t j = 0; j < fit.estimates.beta.size(); ++j)
      out.estimates[j] = fit.estimates.beta[j];
    out.estimates[np - 2] = fit.estimates.shape_a;
    out.estimates[np - 1] = fit.estimates.shape2;
    out.lower.resize(np);
    out.upper.resize(np);
    for (std::size_t j = 0; j < np; ++j) {
      const auto ci = regression::wald_interval(fit, j, config.ci_level);
      out.lower[j] = ci.first;
      out.upper[j] = ci.second;
    }
    out.gcs = diagnostics::residual_summary(diagnostics::gcs_residuals(fit, data));
    out.rq = diagnostics::residual_summary(diagnostics::rq_residuals(fit, data));
    out.ok = true;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

inline void accumulate(diagnostics::ResidualSummary& acc,
                       const diagnostics::ResidualSummary& s) {
  acc.mean += s.mean;
  acc.median += s.median;
  acc.sd += s.sd;
  acc.skewness += s.skewness;
  acc.excess_kurtosis += s.excess_kurtosis;
}

inline void scale(diagnostics::ResidualSummary& acc, double f) {
  acc.mean *= f;
  acc.median *= f;
  acc.sd *= f;
  acc.skewness *= f;
  acc.excess_kurtosis *= f;
}

}  // namespace detail

// Full study over the (n, tau) grid. Replicas within a cell run in parallel;
// aggregation is slot-ordered so the report is bit-identical for any thread
// count.
inline MonteCarloReport run_study(const ScenarioConfig& config) {
  validate(config);
  MonteCarloReport report;
  report.config = config;

  const std::size_t k1 = config.true_beta.size();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < k1; ++j) names.push_back("beta" + std::to_string(j));
  names.push_back("a");
  names.push_back(regression::shape2_name(config.family));
  std::vector<double> truth(config.true_beta);
  truth.push_back(config.true_shape_a);
  truth.push_back(config.true_shape2);

  unsigned n_threads = config.threads != 0
                           ? config.threads
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads,
                                 static_cast<unsigned>(config.n_replicas));

  for (std::size_t n : config.n_grid) {
    for (double tau : config.tau_grid) {
      std::vector<detail::ReplicaOutcome> outcomes(config.n_replicas);
      std::atomic<int> next{0};
      auto worker = [&] {
        for (;;) {
          const int idx = next.fetch_add(1);
          if (idx >= config.n_replicas) break;
          outcomes[idx] = detail::run_replica(config, n, tau, idx);
        }
      };
      if (n_threads <= 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }

      CellReport cell;
      cell.n = n;
      cell.tau = tau;
      cell.n_replicas = config.n_replicas;

      std::vector<std::vector<double>> est(truth.size()), lo(truth.size()),
          hi(truth.size());
      diagnostics::ResidualSummary gcs_acc{}, rq_acc{};
      int ok_count = 0;
      for (const auto& oc : outcomes) {
        if (!oc.ok) {
          ++cell.failures;
          continue;
        }
        ++ok_count;
        for (std::size_t j = 0; j < truth.size(); ++j) {
          est[j].push_back(oc.estimates[j]);
          lo[j].push_back(oc.lower[j]);
          hi[j].push_back(oc.upper[j]);
        }
        detail::accumulate(gcs_acc, oc.gcs);
        detail::accumulate(rq_acc, oc.rq);
      }
      cell.aborted = cell.failures * 10 > config.n_replicas;
      if (ok_count > 0) {
        for (std::size_t j = 0; j < truth.size(); ++j) {
          const auto stats = rb_rmse_cp(est[j], lo[j], hi[j], truth[j]);
          cell.params.push_back(
              {names[j], truth[j], stats.rb, stats.rmse, stats.cp});
        }
        detail::scale(gcs_acc, 1.0 / ok_count);
        detail::scale(rq_acc, 1.0 / ok_count);
        cell.gcs = gcs_acc;
        cell.rq = rq_acc;
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

// Long-format CSV: family,n,tau,statistic,value.
inline std::string to_csv(const MonteCarloReport& report) {
  std::ostringstream out;
  out << "family,n,tau,statistic,value\n";
  char buf[160];
  const char* fam = regression::family_name(report.config.family);
  auto row = [&](const CellReport& cell, const std::string& stat, double v) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.6g,%s,%.6g\n", fam, cell.n,
                  cell.tau, stat.c_str(), v);
    out << buf;
  };
  for (const auto& cell : report.cells) {
    for (const auto& ps : cell.params) {
      if (ps.rb) row(cell, "rb." + ps.name, *ps.rb);
      row(cell, "rmse." + ps.name, ps.rmse);
      row(cell, "cp." + ps.name, ps.cp);
    }
    row(cell, "gcs.mean", cell.gcs.mean);
    row(cell, "gcs.median", cell.gcs.median);
    row(cell, "gcs.sd", cell.gcs.sd);
    row(cell, "gcs.skewness", cell.gcs.skewness);
    row(cell, "gcs.excess_kurtosis", cell.gcs.excess_kurtosis);
    row(cell, "rq.mean", cell.rq.mean);
    row(cell, "rq.median", cell.rq.median);
    row(cell, "rq.sd", cell.rq.sd);
    row(cell, "rq.skewness", cell.rq.skewness);
    row(cell, "rq.excess_kurtosis", cell.rq.excess_kurtosis);
    row(cell, "failures", cell.failures);
    row(cell, "aborted", cell.aborted ? 1.0 : 0.0);
  }
  return out.str();
}

}  // namespace qincome::montecarlo
