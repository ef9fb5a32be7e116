#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qincome/regression.hpp"
#include "support/oracles.hpp"

using namespace qincome;
using namespace qincome::regression;
using specfun::UniformStream;
using specfun::mix_seed;

namespace {

// simulate a dataset from the model gamma_i = g^{-1}(x_i' beta)
DesignData make_data(const RegressionSpec& spec, const std::vector<double>& beta,
                     double a, double s2, std::size_t n, std::uint64_t seed) {
  UniformStream stream(seed);
  DesignData data;
  data.X = linalg::Matrix(n, beta.size());
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.X(i, 0) = 1.0;
    double eta = beta[0];
    for (std::size_t j = 1; j < beta.size(); ++j) {
      data.X(i, j) = stream.next();
      eta += beta[j] * data.X(i, j);
    }
    const double gamma = link_invert(spec.link, eta);
    const double u = stream.next();
    data.y[i] = spec.family == Family::SinghMaddala
                    ? distributions::quantile(
                          distributions::QuantileSM{a, gamma, s2, spec.tau}, u)
                    : distributions::quantile(
                          distributions::QuantileDA{a, gamma, s2, spec.tau}, u);
  }
  return data;
}

std::vector<double> pack(const ParamVector& t) {
  std::vector<double> v(t.beta);
  v.push_back(t.shape_a);
  v.push_back(t.shape2);
  return v;
}

ParamVector unpack(const std::vector<double>& v) {
  ParamVector t;
  t.beta.assign(v.begin(), v.end() - 2);
  t.shape_a = v[v.size() - 2];
  t.shape2 = v[v.size() - 1];
  return t;
}

}  // namespace

TEST_CASE("link functions") {
  CHECK(link_apply(Link::Log, 1.0) == 0.0);
  CHECK(link_invert(Link::Log, 0.0) == 1.0);
  CHECK(link_apply(Link::Identity, 5.0) == 5.0);
  CHECK(link_invert(Link::Identity, 5.0) == 5.0);
  for (double g = 0.05; g < 40.0; g *= 1.7)
    CHECK(link_invert(Link::Log, link_apply(Link::Log, g)) ==
          doctest::Approx(g).epsilon(1e-14));
  CHECK_THROWS_AS(link_apply(Link::Log, 0.0), std::domain_error);
  CHECK_THROWS_AS(link_invert(Link::Identity, -1.0), std::range_error);
}

TEST_CASE("negative log-likelihood single-term reduction") {
  RegressionSpec spec;
  spec.family = Family::SinghMaddala;
  spec.tau = 0.3;

  DesignData data;
  data.X = linalg::Matrix(1, 1, 1.0);
  data.y = {1.7};
  ParamVector theta;
  theta.beta = {0.4};
  theta.shape_a = 2.5;
  theta.shape2 = 1.2;

  const double expected = -distributions::log_pdf(
      distributions::QuantileSM{2.5, std::exp(0.4), 1.2, 0.3}, 1.7);
  CHECK(neg_log_likelihood(spec, data, theta) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("negative log-likelihood equals the direct product form") {
  // direct coding of the likelihood products, no log-space tricks
  auto direct_sm = [](const RegressionSpec& spec, const DesignData& data,
                      const ParamVector& t) {
    const double cq = std::pow(1.0 - spec.tau, -1.0 / t.shape2) - 1.0;
    double nll = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < data.X.cols(); ++j)
        eta += data.X(i, j) * t.beta[j];
      const double g = std::exp(eta);
      const double f =
          t.shape_a * t.shape2 * cq *
          std::pow(data.y[i] / g, t.shape_a - 1.0) /
          (g * std::pow(1.0 + cq * std::pow(data.y[i] / g, t.shape_a),
                        1.0 + t.shape2));
      nll -= std::log(f);
    }
    return nll;
  };
  auto direct_da = [](const RegressionSpec& spec, const DesignData& data,
                      const ParamVector& t) {
    const double ep = std::pow(spec.tau, -1.0 / t.shape2) - 1.0;
    double nll = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < data.X.cols(); ++j)
        eta += data.X(i, j) * t.beta[j];
      const double g = std::exp(eta);
      const double f =
          t.shape_a * t.shape2 *
          std::pow(data.y[i] / g, t.shape_a * t.shape2 - 1.0) /
          (g * std::pow(ep, t.shape2) *
           std::pow(1.0 + std::pow(data.y[i] / g, t.shape_a) / ep,
                    1.0 + t.shape2));
      nll -= std::log(f);
    }
    return nll;
  };

  RegressionSpec sm_spec;
  sm_spec.family = Family::SinghMaddala;
  sm_spec.tau = 0.4;
  const DesignData sm_data = make_data(sm_spec, {1.0, 0.5}, 3.0, 1.2, 60, 11);
  ParamVector t;
  t.beta = {0.9, 0.6};
  t.shape_a = 2.8;
  t.shape2 = 1.1;
  CHECK(neg_log_likelihood(sm_spec, sm_data, t) ==
        doctest::Approx(direct_sm(sm_spec, sm_data, t)).epsilon(1e-10));

  RegressionSpec da_spec;
  da_spec.family = Family::Dagum;
  da_spec.tau = 0.6;
  const DesignData da_data = make_data(da_spec, {1.0, 0.5}, 1.5, 0.8, 60, 12);
  CHECK(neg_log_likelihood(da_spec, da_data, t) ==
        doctest::Approx(direct_da(da_spec, da_data, t)).epsilon(1e-10));
}

TEST_CASE("likelihood is lower at the generating parameters than nearby") {
  RegressionSpec spec;
  spec.family = Family::SinghMaddala;
  spec.tau = 0.5;
  const std::vector<double> beta = {1.0, 0.5, 1.5};
  const DesignData data = make_data(spec, beta, 5.0, 1.0, 600, 77);

  ParamVector truth;
  truth.beta = beta;
  truth.shape_a = 5.0;
  truth.shape2 = 1.0;
  ParamVector shifted = truth;
  for (double& b : shifted.beta) b += 0.5;
  shifted.shape_a += 0.5;
  shifted.shape2 += 0.5;
  CHECK(neg_log_likelihood(spec, data, truth) <
        neg_log_likelihood(spec, data, shifted));
}

TEST_CASE("infeasible points give +inf, mismatches throw") {
  RegressionSpec spec;
  spec.link = Link::Identity;
  DesignData data;
  data.X = linalg::Matrix(2, 1, 1.0);
  data.y = {1.0, 2.0};
  ParamVector t;
  t.beta = {-0.5};  // eta <= 0 under the identity link
  t.shape_a = 1.0;
  t.shape2 = 1.0;
  CHECK(std::isinf(neg_log_likelihood(spec, data, t)));
  t.beta = {0.5};
  t.shape_a = -1.0;
  CHECK(std::isinf(neg_log_likelihood(spec, data, t)));

  ParamVector wrong;
  wrong.beta = {0.5, 0.1};  // two coefficients, one column
  wrong.shape_a = 1.0;
  wrong.shape2 = 1.0;
  CHECK_THROWS_AS(neg_log_likelihood(spec, data, wrong),
                  std::invalid_argument);
}

TEST_CASE("AIC and BIC arithmetic") {
  CHECK(aic_value(-685.2337, 6) == doctest::Approx(1382.467).epsilon(3e-7));
  CHECK(bic_value(-692.8373, 5, 100) ==
        doctest::Approx(1408.701).epsilon(1e-6));

  RegressionSpec spec;
  spec.tau = 0.5;
  const DesignData data = make_data(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 200, 5);
  const FitResult fit_res = fit(spec, data);
  REQUIRE(fit_res.converged);
  CHECK(fit_res.aic ==
        doctest::Approx(2.0 * 5 - 2.0 * fit_res.loglik).epsilon(1e-12));
  CHECK(fit_res.bic ==
        doctest::Approx(5 * std::log(200.0) - 2.0 * fit_res.loglik)
            .epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (Family family : {Family::SinghMaddala, Family::Dagum}) {
    for (Link link : {Link::Log, Link::Identity}) {
      RegressionSpec spec;
      spec.family = family;
      spec.link = link;
      spec.tau = 0.35;
      const double a0 = family == Family::SinghMaddala ? 4.0 : 1.2;
      const double s0 = family == Family::SinghMaddala ? 1.0 : 0.7;
      // identity link needs a positive linear predictor on [0,1]^2
      const std::vector<double> beta = link == Link::Log
                                           ? std::vector<double>{1.0, 0.5, 1.5}
                                           : std::vector<double>{2.0, 1.0, 0.7};
      const DesignData data = make_data(
          spec, beta, a0, s0, 80,
          mix_seed(3, static_cast<int>(family), static_cast<int>(link)));

      UniformStream noise(
          mix_seed(9, static_cast<int>(family), static_cast<int>(link)));
      for (int rep = 0; rep < 10; ++rep) {
        ParamVector theta;
        theta.beta = beta;
        for (double& b : theta.beta) b += 0.6 * (noise.next() - 0.5);
        theta.shape_a = a0 * std::exp(0.4 * (noise.next() - 0.5));
        theta.shape2 = s0 * std::exp(0.4 * (noise.next() - 0.5));

        const std::vector<double> analytic =
            analytic_gradient(spec, data, theta);
        const std::vector<double> numeric = oracles::fd_gradient(
            [&](const std::vector<double>& v) {
              return neg_log_likelihood(spec, data, unpack(v));
            },
            pack(theta), 1e-6);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < analytic.size(); ++j) {
          num = std::max(num, std::abs(analytic[j] - numeric[j]));
          den = std::max(den, std::abs(analytic[j]));
        }
        CHECK(num <= 1e-5 * std::max(1.0, den));
      }
    }
  }
}

TEST_CASE("beta block of the score is the gamma derivative chained through exp") {
  RegressionSpec spec;
  spec.tau = 0.45;
  DesignData data;
  data.X = linalg::Matrix(1, 2);
  data.X(0, 0) = 1.0;
  data.X(0, 1) = 0.7;
  data.y = {2.3};
  ParamVector theta;
  theta.beta = {0.5, 0.4};
  theta.shape_a = 3.0;
  theta.shape2 = 1.3;

  const std::vector<double> g = analytic_gradient(spec, data, theta);
  const double eta = 0.5 + 0.4 * 0.7;
  const double gamma = std::exp(eta);
  // d(-log f)/d gamma by finite differences, then chain through exp
  const double h = 1e-7 * gamma;
  auto nll_at_gamma = [&](double gval) {
    return -distributions::log_pdf(
        distributions::QuantileSM{3.0, gval, 1.3, 0.45}, 2.3);
  };
  const double dgamma =
      (nll_at_gamma(gamma + h) - nll_at_gamma(gamma - h)) / (2.0 * h);
  CHECK(g[0] == doctest::Approx(dgamma * gamma).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(dgamma * gamma * 0.7).epsilon(1e-6));
}

TEST_CASE("fit recovers the generating parameters") {
  struct Scenario {
    Family family;
    double a, s2;
  };
  const Scenario scenarios[] = {{Family::SinghMaddala, 5.0, 1.0},
                                {Family::Dagum, 1.0, 0.5}};
  for (const auto& sc : scenarios) {
    RegressionSpec spec;
    spec.family = sc.family;
    spec.tau = 0.5;
    const std::vector<double> beta = {1.0, 0.5, 1.5};
    const DesignData data = make_data(spec, beta, sc.a, sc.s2, 600,
                                      mix_seed(42, static_cast<int>(sc.family)));
    const FitResult res = fit(spec, data);
    REQUIRE(res.converged);
    REQUIRE(res.covariance_valid);
    for (std::size_t j = 0; j < beta.size(); ++j)
      CHECK(std::abs(res.estimates.beta[j] - beta[j]) <
            3.0 * res.std_errors[j]);

    // first-order condition at the optimum, at a likelihood scale where the
    // objective's rounding floor sits below the tolerance
    const DesignData small = make_data(spec, beta, sc.a, sc.s2, 250,
                                       mix_seed(43, static_cast<int>(sc.family)));
    const FitResult sres = fit(spec, small);
    REQUIRE(sres.converged);
    const std::vector<double> g = analytic_gradient(spec, small, sres.estimates);
    double gmax = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j)
      gmax = std::max(gmax, std::abs(g[j]));
    gmax = std::max(gmax, std::abs(g[beta.size()] * sres.estimates.shape_a));
    gmax = std::max(gmax, std::abs(g[beta.size() + 1] * sres.estimates.shape2));
    CHECK(gmax < 1e-5);

    // refitting from the optimum is a fixed point
    const FitResult again = fit(spec, data, res.estimates);
    CHECK(again.converged);
    for (std::size_t j = 0; j < beta.size(); ++j)
      CHECK(again.estimates.beta[j] ==
            doctest::Approx(res.estimates.beta[j]).epsilon(1e-8));
    CHECK(again.estimates.shape_a ==
          doctest::Approx(res.estimates.shape_a).epsilon(1e-8));
    CHECK(again.estimates.shape2 ==
          doctest::Approx(res.estimates.shape2).epsilon(1e-8));
  }
}

TEST_CASE("identity-link fit") {
  RegressionSpec spec;
  spec.family = Family::SinghMaddala;
  spec.link = Link::Identity;
  spec.tau = 0.5;
  const std::vector<double> beta = {2.0, 1.5};
  const DesignData data = make_data(spec, beta, 4.0, 1.2, 500, 1234);
  const FitResult res = fit(spec, data);
  REQUIRE(res.converged);
  REQUIRE(res.covariance_valid);
  for (std::size_t j = 0; j < beta.size(); ++j)
    CHECK(std::abs(res.estimates.beta[j] - beta[j]) < 3.0 * res.std_errors[j]);
}

TEST_CASE("fitted models are quantile coherent") {
  for (double tau : {0.25, 0.5, 0.75}) {
    RegressionSpec spec;
    spec.family = Family::SinghMaddala;
    spec.tau = tau;
    const DesignData data =
        make_data(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 5000,
                  mix_seed(88, static_cast<std::uint64_t>(tau * 100)));
    const FitResult res = fit(spec, data);
    REQUIRE(res.converged);
    const std::vector<double> gammas = predict_gamma(res, data.X);
    std::size_t below = 0;
    for (std::size_t i = 0; i < data.n(); ++i)
      if (data.y[i] <= gammas[i]) ++below;
    CHECK(std::abs(static_cast<double>(below) / data.n() - tau) <= 0.02);
  }
}

TEST_CASE("rescaling the response shifts only the intercept under the log link") {
  RegressionSpec spec;
  spec.family = Family::Dagum;
  spec.tau = 0.5;
  const DesignData data = make_data(spec, {1.0, 0.5, 1.5}, 1.0, 0.5, 600, 314);
  const FitResult base = fit(spec, data);
  REQUIRE(base.converged);

  const double k = 3.7;
  DesignData scaled = data;
  for (double& y : scaled.y) y *= k;
  const FitResult res = fit(spec, scaled);
  REQUIRE(res.converged);
  CHECK(res.estimates.beta[0] - base.estimates.beta[0] ==
        doctest::Approx(std::log(k)).epsilon(1e-3));
  for (std::size_t j = 1; j < 3; ++j)
    CHECK(std::abs(res.estimates.beta[j] - base.estimates.beta[j]) < 1e-3);
  CHECK(res.estimates.shape_a ==
        doctest::Approx(base.estimates.shape_a).epsilon(1e-3));
  CHECK(res.estimates.shape2 ==
        doctest::Approx(base.estimates.shape2).epsilon(1e-3));
}

TEST_CASE("covariance is positive semidefinite at the optimum") {
  RegressionSpec spec;
  spec.tau = 0.5;
  const DesignData data = make_data(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 300, 2718);
  const FitResult res = fit(spec, data);
  REQUIRE(res.converged);
  REQUIRE(res.covariance_valid);
  const auto eig = oracles::symmetric_eigenvalues(res.covariance);
  for (double e : eig) CHECK(e >= -1e-8);
  // symmetric by construction
  for (std::size_t i = 0; i < res.covariance.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      CHECK(res.covariance(i, j) == res.covariance(j, i));
}

TEST_CASE("wald intervals") {
  RegressionSpec spec;
  FitResult fr;
  fr.spec = spec;
  fr.estimates.beta = {2.0};
  fr.estimates.shape_a = 3.0;
  fr.estimates.shape2 = 1.0;
  fr.converged = true;
  fr.covariance_valid = true;
  fr.covariance = linalg::Matrix(3, 3);
  fr.std_errors = {0.5, 0.0, 2.0};

  const auto ci = wald_interval(fr, 0, 0.95);
  CHECK(ci.first == doctest::Approx(2.0 - 1.959963985 * 0.5).epsilon(1e-8));
  CHECK(ci.second == doctest::Approx(2.0 + 1.959963985 * 0.5).epsilon(1e-8));

  // zero standard error degenerates to a point
  const auto point = wald_interval(fr, 1, 0.95);
  CHECK(point.first == 3.0);
  CHECK(point.second == 3.0);

  // widths scale linearly in the standard error
  const auto wide = wald_interval(fr, 2, 0.95);
  CHECK(wide.second - wide.first ==
        doctest::Approx(4.0 * (ci.second - ci.first)).epsilon(1e-12));

  FitResult no_cov = fr;
  no_cov.covariance_valid = false;
  CHECK_THROWS_AS(wald_interval(no_cov, 0, 0.95), std::runtime_error);
  CHECK_THROWS_AS(wald_interval(fr, 7, 0.95), std::out_of_range);
}

TEST_CASE("predict_gamma") {
  RegressionSpec spec;
  spec.tau = 0.5;
  const DesignData data = make_data(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 200, 99);
  const FitResult res = fit(spec, data);
  REQUIRE(res.converged);

  // in-sample predictions are the fitted gammas
  const std::vector<double> in_sample = predict_gamma(res, data.X);
  for (std::size_t i = 0; i < 5; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < data.X.cols(); ++j)
      eta += data.X(i, j) * res.estimates.beta[j];
    CHECK(in_sample[i] == doctest::Approx(std::exp(eta)).epsilon(1e-12));
  }

  // all-zero coefficients predict 1 under the log link
  FitResult flat = res;
  flat.estimates.beta = {0.0, 0.0, 0.0};
  for (double g : predict_gamma(flat, data.X)) CHECK(g == 1.0);

  // predictions converge toward the true gammas with sample size
  const std::vector<double> truth = {1.0, 0.5, 1.5};
  auto mean_abs_err = [&](std::size_t n, std::uint64_t seed) {
    const DesignData d = make_data(spec, truth, 5.0, 1.0, n, seed);
    const FitResult f = fit(spec, d);
    REQUIRE(f.converged);
    const std::vector<double> pred = predict_gamma(f, d.X);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < d.X.cols(); ++j) eta += d.X(i, j) * truth[j];
      acc += std::abs(pred[i] - std::exp(eta)) / std::exp(eta);
    }
    return acc / static_cast<double>(d.n());
  };
  CHECK(mean_abs_err(600, 21) < mean_abs_err(50, 22));

  // identity link with a nonpositive row errors
  RegressionSpec id_spec;
  id_spec.link = Link::Identity;
  FitResult id_fit;
  id_fit.spec = id_spec;
  id_fit.estimates.beta = {1.0, -2.0};
  linalg::Matrix bad(1, 2);
  bad(0, 0) = 1.0;
  bad(0, 1) = 1.0;  // eta = -1
  CHECK_THROWS_AS(predict_gamma(id_fit, bad), std::range_error);
}

TEST_CASE("fit input validation") {
  RegressionSpec spec;
  DesignData tiny;
  tiny.X = linalg::Matrix(2, 2, 1.0);
  tiny.y = {1.0, 2.0};
  CHECK_THROWS_AS(fit(spec, tiny), std::invalid_argument);

  DesignData bad_y;
  bad_y.X = linalg::Matrix(3, 1, 1.0);
  bad_y.y = {1.0, -2.0, 3.0};
  CHECK_THROWS_AS(fit(spec, bad_y), std::invalid_argument);

  // collinear design
  DesignData collinear;
  collinear.X = linalg::Matrix(10, 2);
  collinear.y.assign(10, 1.0);
  for (std::size_t i = 0; i < 10; ++i) {
    collinear.X(i, 0) = 1.0;
    collinear.X(i, 1) = 2.0;
    collinear.y[i] = 1.0 + 0.1 * static_cast<double>(i);
  }
  CHECK_THROWS_AS(fit(spec, collinear), std::invalid_argument);
}
