#pragma once

// Self-contained special functions and deterministic RNG primitives used by
// the distribution and regression code: log-gamma, beta, Gauss hypergeometric
// 2F1 for nonpositive real argument, standard normal CDF/quantile, and a
// counter-based uniform stream.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace qincome::specfun {

struct SpecFunConfig {
  double series_tolerance = 1e-12;
  int max_series_terms = 10000;
};

// Thrown when a series fails to converge within max_series_terms.
class SeriesError : public std::runtime_error {
 public:
  explicit SeriesError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// Lanczos approximation, g = 7, 9 coefficients (Godfrey's set).
inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczos[9] = {
    0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
    771.32342877765313,    -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7};

inline constexpr double kHalfLogTwoPi = 0.91893853320467274178;
inline constexpr double kPi = 3.14159265358979323846;

inline double log_gamma_lanczos(double x) {
  // valid for x >= 0.5
  double acc = kLanczos[0];
  for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (x - 1.0 + i);
  const double t = x + kLanczosG - 0.5;
  return kHalfLogTwoPi + (x - 0.5) * std::log(t) - t + std::log(acc);
}

}  // namespace detail

// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0))
    throw std::domain_error("log_gamma: argument must be positive, got " +
                            std::to_string(x));
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(detail::kPi / std::sin(detail::kPi * x)) -
           detail::log_gamma_lanczos(1.0 - x);
  }
  return detail::log_gamma_lanczos(x);
}

// B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y), via log-gamma.
inline double beta_fn(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::domain_error("beta_fn: arguments must be positive");
  return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

inline double log_beta_fn(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::domain_error("log_beta_fn: arguments must be positive");
  return log_gamma(x) + log_gamma(y) - log_gamma(x + y);
}

namespace detail {

// Defining power series of 2F1, converges for |z| < 1.
inline double hyp2f1_series(double a, double b, double c, double z,
                            const SpecFunConfig& cfg) {
  if (!(cfg.series_tolerance > 0.0) || cfg.max_series_terms < 1)
    throw std::invalid_argument("SpecFunConfig: series_tolerance must be "
                                "positive and max_series_terms >= 1");
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < cfg.max_series_terms; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (std::abs(term) <= cfg.series_tolerance * std::abs(sum)) return sum;
  }
  throw SeriesError("gauss_2f1: series did not converge (z = " +
                    std::to_string(z) + ")");
}

// Pfaff transformation 2F1(a,b;c;z) = (1-z)^{-b} 2F1(c-a, b; c; z/(z-1)).
// The parameter pair is ordered so the transformed series decays fastest.
inline double hyp2f1_pfaff(double a, double b, double c, double z,
                           const SpecFunConfig& cfg) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  const double w = z / (z - 1.0);
  return std::pow(1.0 - z, -lo) * hyp2f1_series(c - hi, lo, c, w, cfg);
}

}  // namespace detail

// Gauss hypergeometric 2F1(a, b; c; z) for real z <= 0.
inline double gauss_2f1(double a, double b, double c, double z,
                        const SpecFunConfig& cfg = {}) {
  if (c <= 0.0 && c == std::floor(c))
    throw std::domain_error("gauss_2f1: c must not be a non-positive integer");
  if (z > 0.0)
    throw std::domain_error("gauss_2f1: only z <= 0 is supported");
  if (z == 0.0) return 1.0;
  if (z > -0.9) return detail::hyp2f1_series(a, b, c, z, cfg);
  return detail::hyp2f1_pfaff(a, b, c, z, cfg);
}

// Standard normal CDF via the complementary error function.
inline double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / 1.41421356237309504880);
}

inline double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / 2.50662827463100050242;
}

// Standard normal quantile: Acklam's rational approximation refined by one
// Newton step on the CDF.
inline double std_normal_quantile(double u) {
  if (!(u > 0.0) || !(u < 1.0))
    throw std::domain_error("std_normal_quantile: argument must be in (0,1)");

  static constexpr double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (u < p_low) {
    const double s = std::sqrt(-2.0 * std::log(u));
    x = (((((C[0] * s + C[1]) * s + C[2]) * s + C[3]) * s + C[4]) * s + C[5]) /
        ((((D[0] * s + D[1]) * s + D[2]) * s + D[3]) * s + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) *
        q /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
  } else {
    const double s = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((C[0] * s + C[1]) * s + C[2]) * s + C[3]) * s + C[4]) * s + C[5]) /
        ((((D[0] * s + D[1]) * s + D[2]) * s + D[3]) * s + 1.0);
  }
  // one Newton refinement
  const double err = std_normal_cdf(x) - u;
  const double dens = std_normal_pdf(x);
  if (dens > 0.0) x -= err / dens;
  return x;
}

// Deterministic uniform stream on (0,1), counter-based splitmix64. Never
// yields exactly 0 or 1. Single consumer; derive independent seeds for
// concurrent streams with mix_seed.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : state_(seed) {}

  double next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= (z >> 31);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Avalanche-mix two 64-bit values into a stream seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                              std::uint64_t d) {
  return mix_seed(mix_seed(a, b, c), d);
}

}  // namespace qincome::specfun
