#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qincome/diagnostics.hpp"
#include "support/oracles.hpp"
#include "support/testdata.hpp"

using namespace qincome;
using namespace qincome::diagnostics;
using regression::DesignData;
using regression::Family;
using regression::FitResult;
using regression::RegressionSpec;
using specfun::mix_seed;

namespace {

FitResult fitted_model(const RegressionSpec& spec, const DesignData& data) {
  FitResult res = regression::fit(spec, data);
  REQUIRE(res.converged);
  return res;
}

// a converged fit with hand-set parameters, for exact-value checks
FitResult synthetic_fit(Family family, double tau, double beta0, double a,
                        double s2) {
  RegressionSpec spec;
  spec.family = family;
  spec.tau = tau;
  FitResult fr;
  fr.spec = spec;
  fr.estimates.beta = {beta0};
  fr.estimates.shape_a = a;
  fr.estimates.shape2 = s2;
  fr.converged = true;
  return fr;
}

}  // namespace

TEST_CASE("GCS residual exact values") {
  // tau = 0.5 model with y at the fitted conditional median
  const FitResult fr = synthetic_fit(Family::SinghMaddala, 0.5, 0.0, 3.0, 1.2);
  DesignData data;
  data.X = linalg::Matrix(2, 1, 1.0);
  // gamma = exp(0) = 1; second point at the 1 - e^{-1} quantile
  const double y2 =
      regression::conditional_quantile(fr, 1.0, 1.0 - std::exp(-1.0));
  data.y = {1.0, y2};

  const std::vector<double> gcs = gcs_residuals(fr, data);
  CHECK(gcs[0] == doctest::Approx(-std::log(0.5)).epsilon(1e-10));
  CHECK(gcs[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("RQ residual exact values") {
  const FitResult fr = synthetic_fit(Family::Dagum, 0.5, 0.0, 2.0, 1.5);
  DesignData data;
  data.X = linalg::Matrix(2, 1, 1.0);
  const double y975 = regression::conditional_quantile(fr, 1.0, 0.975);
  data.y = {1.0, y975};

  const std::vector<double> rq = rq_residuals(fr, data);
  CHECK(rq[0] == doctest::Approx(0.0).epsilon(1e-9));
  // 1.96 located independently by bisection on Phi
  const double z975 = oracles::bisect(
      [](double z) { return specfun::std_normal_cdf(z) - 0.975; }, 0.0, 4.0,
      1e-13);
  CHECK(rq[1] == doctest::Approx(z975).epsilon(1e-8));
}

TEST_CASE("GCS and RQ are monotone transforms of the same CDF value") {
  RegressionSpec spec;
  spec.family = Family::SinghMaddala;
  spec.tau = 0.4;
  const DesignData data =
      testdata::simulate(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 300, 17);
  const FitResult fr = fitted_model(spec, data);
  const std::vector<double> gcs = gcs_residuals(fr, data);
  const std::vector<double> rq = rq_residuals(fr, data);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double implied = specfun::std_normal_quantile(-std::expm1(-gcs[i]));
    CHECK(std::abs(rq[i] - implied) < 1e-9);
  }
}

TEST_CASE("residual_summary basics") {
  CHECK_THROWS_AS(residual_summary({1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(residual_summary({2.0, 2.0, 2.0, 2.0}),
                  std::invalid_argument);

  const auto s = residual_summary({-1.0, 0.0, 1.0, -1.0, 0.0, 1.0});
  CHECK(s.mean == doctest::Approx(0.0));
  CHECK(s.median == doctest::Approx(0.0));
  CHECK(s.skewness == doctest::Approx(0.0));
}

TEST_CASE("summary of a large Exp(1) sample matches the reference values") {
  specfun::UniformStream stream(314159);
  std::vector<double> draws(1000000);
  for (double& d : draws) d = -std::log1p(-stream.next());
  const auto s = residual_summary(draws);
  CHECK(std::abs(s.mean - 1.0) < 0.05);
  CHECK(std::abs(s.median - std::log(2.0)) < 0.05);
  CHECK(std::abs(s.sd - 1.0) < 0.05);
  CHECK(std::abs(s.skewness - 2.0) < 0.05);
  CHECK(std::abs(s.excess_kurtosis - 6.0) < 0.3);
}

TEST_CASE("well-specified residuals track their reference laws") {
  RegressionSpec spec;
  spec.family = Family::SinghMaddala;
  spec.tau = 0.5;
  const DesignData data =
      testdata::simulate(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 1000, 271828);
  const FitResult fr = fitted_model(spec, data);

  const std::vector<double> gcs = gcs_residuals(fr, data);
  const auto gs = residual_summary(gcs);
  CHECK(std::abs(gs.mean - 1.0) < 0.1);
  CHECK(std::abs(gs.median - 0.69) < 0.08);

  const std::vector<double> rq = rq_residuals(fr, data);
  const auto rs = residual_summary(rq);
  CHECK(std::abs(rs.mean) < 0.1);
  CHECK(std::abs(rs.sd - 1.0) < 0.1);

  // KS against the reference distributions (full seed batch in acceptance)
  const double d_gcs = oracles::ks_statistic(
      gcs, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
  CHECK(d_gcs < oracles::ks_critical_1pct(gcs.size()));
  const double d_rq = oracles::ks_statistic(
      rq, [](double x) { return specfun::std_normal_cdf(x); });
  CHECK(d_rq < oracles::ks_critical_1pct(rq.size()));
}

TEST_CASE("simulated envelope") {
  RegressionSpec spec;
  spec.family = Family::SinghMaddala;
  spec.tau = 0.5;
  const DesignData data =
      testdata::simulate(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 120, 55);
  const FitResult fr = fitted_model(spec, data);

  const EnvelopeBand band =
      simulated_envelope(fr, data, ResidualType::RQ, 60, 0.95, 777);
  CHECK(band.dropped <= 12);
  REQUIRE(band.lower.size() == data.n());

  // band ordering holds pointwise
  for (std::size_t i = 0; i < data.n(); ++i) {
    CHECK(band.lower[i] <= band.median[i]);
    CHECK(band.median[i] <= band.upper[i]);
  }

  // a well-specified fit stays mostly inside its envelope
  std::size_t inside = 0;
  for (std::size_t i = 0; i < data.n(); ++i)
    if (band.sorted_residuals[i] >= band.lower[i] &&
        band.sorted_residuals[i] <= band.upper[i])
      ++inside;
  CHECK(static_cast<double>(inside) / static_cast<double>(data.n()) >= 0.9);

  // deterministic given the seed
  const EnvelopeBand again =
      simulated_envelope(fr, data, ResidualType::RQ, 60, 0.95, 777);
  CHECK(band.lower == again.lower);
  CHECK(band.upper == again.upper);
  CHECK(band.median == again.median);

  CHECK_THROWS_AS(simulated_envelope(fr, data, ResidualType::RQ, 10, 0.95, 1),
                  std::invalid_argument);

  const std::string csv = envelope_to_csv(band);
  CHECK(csv.rfind("index,theoretical,observed,lower,median,upper\n", 0) == 0);
}

TEST_CASE("prediction intervals widen with the level and cover") {
  RegressionSpec spec;
  spec.family = Family::Dagum;
  spec.tau = 0.5;
  const DesignData train =
      testdata::simulate(spec, {1.0, 0.5, 1.5}, 1.0, 0.5, 800, 91);
  const FitResult fr = fitted_model(spec, train);

  const DesignData hold =
      testdata::simulate(spec, {1.0, 0.5, 1.5}, 1.0, 0.5, 2000, 92);
  const PredictionBand b80 = prediction_interval(fr, hold.X, 0.80, &hold.y);
  const PredictionBand b95 = prediction_interval(fr, hold.X, 0.95, &hold.y);
  const PredictionBand b99 = prediction_interval(fr, hold.X, 0.99, &hold.y);
  for (std::size_t i = 0; i < hold.n(); i += 97) {
    CHECK(b80.lower[i] > b95.lower[i]);
    CHECK(b80.upper[i] < b95.upper[i]);
    CHECK(b95.lower[i] > b99.lower[i]);
    CHECK(b95.upper[i] < b99.upper[i]);
    CHECK(b95.lower[i] < b95.point[i]);
    CHECK(b95.point[i] < b95.upper[i]);
  }
  REQUIRE(b95.coverage_observed.has_value());
  CHECK(*b95.coverage_observed == doctest::Approx(0.95).epsilon(0.04));
  CHECK(*b80.coverage_observed < *b95.coverage_observed);
  CHECK(*b95.coverage_observed < *b99.coverage_observed);

  std::vector<double> short_y = {1.0};
  CHECK_THROWS_AS(prediction_interval(fr, hold.X, 0.95, &short_y),
                  std::invalid_argument);
  CHECK_THROWS_AS(prediction_interval(fr, hold.X, 1.5), std::invalid_argument);
}

TEST_CASE("residual report bundles residuals and summaries") {
  RegressionSpec spec;
  spec.tau = 0.5;
  const DesignData data =
      testdata::simulate(spec, {1.0, 0.5, 1.5}, 5.0, 1.0, 200, 4242);
  const FitResult fr = fitted_model(spec, data);
  const ResidualReport rep = residual_report(fr, data);
  CHECK(rep.gcs.size() == data.n());
  CHECK(rep.rq.size() == data.n());
  for (double g : rep.gcs) CHECK(g >= 0.0);
  for (double r : rep.rq) CHECK(std::isfinite(r));
  CHECK(rep.gcs_summary.mean ==
        doctest::Approx(stats::mean(rep.gcs)).epsilon(1e-12));
}
