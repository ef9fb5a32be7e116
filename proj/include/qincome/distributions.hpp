#pragma once

// Classical and quantile-based Singh-Maddala and Dagum distributions.
//
// The quantile-based forms replace the scale parameter b by the tau-th
// quantile gamma:
//   Singh-Maddala:  b = gamma * c_q^{-1/a},  c_q = (1-tau)^{-1/q} - 1
//   Dagum:          b = gamma * e_p^{+1/a},  e_p = tau^{-1/p} - 1
// so that F(gamma) = tau exactly. All densities are evaluated in log space
// and exponentiated last; CDFs and quantiles are built from expm1/log1p so
// the quantile anchoring holds to machine precision.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qincome/specfun.hpp"

namespace qincome::distributions {

// Thrown when a requested moment does not exist for the given parameters.
class MomentError : public std::domain_error {
 public:
  explicit MomentError(const std::string& msg) : std::domain_error(msg) {}
};

struct ClassicalSM {
  double a;  // shape, > 0
  double b;  // scale, > 0
  double q;  // shape, > 0
};

struct ClassicalDA {
  double a;  // shape, > 0
  double b;  // scale, > 0
  double p;  // shape, > 0
};

struct QuantileSM {
  double a;      // shape, > 0
  double gamma;  // tau-th quantile, > 0
  double q;      // shape, > 0
  double tau;    // target probability, in (0,1)

  // c_q = (1-tau)^{-1/q} - 1, strictly positive
  double cq() const { return std::expm1(-std::log1p(-tau) / q); }
  double log_cq() const { return std::log(cq()); }
  // equivalent classical scale
  double scale_b() const { return gamma * std::exp(-log_cq() / a); }
};

struct QuantileDA {
  double a;      // shape, > 0
  double gamma;  // tau-th quantile, > 0
  double p;      // shape, > 0
  double tau;    // target probability, in (0,1)

  // e_p = tau^{-1/p} - 1, strictly positive
  double ep() const { return std::expm1(-std::log(tau) / p); }
  double log_ep() const { return std::log(ep()); }
  double scale_b() const { return gamma * std::exp(log_ep() / a); }
};

namespace detail {

inline double softplus(double m) {
  // log(1 + exp(m)) without overflow
  if (m > 36.0) return m;
  if (m < -36.0) return std::exp(m);
  return std::log1p(std::exp(m));
}

inline void check(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

inline void validate(const ClassicalSM& d) {
  check(d.a > 0.0 && d.b > 0.0 && d.q > 0.0,
        "Singh-Maddala parameters must be positive");
}
inline void validate(const ClassicalDA& d) {
  check(d.a > 0.0 && d.b > 0.0 && d.p > 0.0,
        "Dagum parameters must be positive");
}
inline void validate(const QuantileSM& d) {
  check(d.a > 0.0 && d.gamma > 0.0 && d.q > 0.0,
        "quantile Singh-Maddala parameters must be positive");
  check(d.tau > 0.0 && d.tau < 1.0, "tau must lie in (0,1)");
}
inline void validate(const QuantileDA& d) {
  check(d.a > 0.0 && d.gamma > 0.0 && d.p > 0.0,
        "quantile Dagum parameters must be positive");
  check(d.tau > 0.0 && d.tau < 1.0, "tau must lie in (0,1)");
}

inline void check_prob(double u) {
  check(u > 0.0 && u < 1.0, "probability must lie in (0,1)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// classical Singh-Maddala
// ---------------------------------------------------------------------------

inline double log_pdf(const ClassicalSM& d, double y) {
  detail::validate(d);
  detail::check(y > 0.0, "support is y > 0");
  const double s = std::log(y) - std::log(d.b);
  return std::log(d.a) + std::log(d.q) + (d.a - 1.0) * s - std::log(d.b) -
         (1.0 + d.q) * detail::softplus(d.a * s);
}

inline double pdf(const ClassicalSM& d, double y) {
  return std::exp(log_pdf(d, y));
}

inline double cdf(const ClassicalSM& d, double y) {
  detail::validate(d);
  if (y <= 0.0) return 0.0;
  const double s = std::log(y) - std::log(d.b);
  return -std::expm1(-d.q * detail::softplus(d.a * s));
}

inline double quantile(const ClassicalSM& d, double tau) {
  detail::validate(d);
  detail::check_prob(tau);
  const double c = std::expm1(-std::log1p(-tau) / d.q);
  return d.b * std::exp(std::log(c) / d.a);
}

// ---------------------------------------------------------------------------
// classical Dagum
// ---------------------------------------------------------------------------

inline double log_pdf(const ClassicalDA& d, double y) {
  detail::validate(d);
  detail::check(y > 0.0, "support is y > 0");
  const double s = std::log(y) - std::log(d.b);
  return std::log(d.a) + std::log(d.p) + (d.a * d.p - 1.0) * s -
         std::log(d.b) - (1.0 + d.p) * detail::softplus(d.a * s);
}

inline double pdf(const ClassicalDA& d, double y) {
  return std::exp(log_pdf(d, y));
}

inline double cdf(const ClassicalDA& d, double y) {
  detail::validate(d);
  if (y <= 0.0) return 0.0;
  const double s = std::log(y) - std::log(d.b);
  return std::exp(-d.p * detail::softplus(-d.a * s));
}

inline double quantile(const ClassicalDA& d, double tau) {
  detail::validate(d);
  detail::check_prob(tau);
  const double e = std::expm1(-std::log(tau) / d.p);
  return d.b * std::exp(-std::log(e) / d.a);
}

// ---------------------------------------------------------------------------
// quantile-based Singh-Maddala
// ---------------------------------------------------------------------------

inline double log_pdf(const QuantileSM& d, double y) {
  detail::validate(d);
  detail::check(y > 0.0, "support is y > 0");
  const double lcq = d.log_cq();
  const double t = std::log(y) - std::log(d.gamma);
  return std::log(d.a) + std::log(d.q) + lcq + (d.a - 1.0) * t -
         std::log(d.gamma) - (1.0 + d.q) * detail::softplus(lcq + d.a * t);
}

inline double pdf(const QuantileSM& d, double y) {
  return std::exp(log_pdf(d, y));
}

inline double cdf(const QuantileSM& d, double y) {
  detail::validate(d);
  if (y <= 0.0) return 0.0;
  const double t = std::log(y) - std::log(d.gamma);
  return -std::expm1(-d.q * detail::softplus(d.log_cq() + d.a * t));
}

inline double quantile(const QuantileSM& d, double u) {
  detail::validate(d);
  detail::check_prob(u);
  const double log_cu = std::log(std::expm1(-std::log1p(-u) / d.q));
  return d.gamma * std::exp((log_cu - d.log_cq()) / d.a);
}

// ---------------------------------------------------------------------------
// quantile-based Dagum
// ---------------------------------------------------------------------------

inline double log_pdf(const QuantileDA& d, double y) {
  detail::validate(d);
  detail::check(y > 0.0, "support is y > 0");
  const double lep = d.log_ep();
  const double t = std::log(y) - std::log(d.gamma);
  const double m = d.a * t - lep;
  if (m > 0.0) {
    // softplus(m) = m + log1p(exp(-m)); written so the p-scale terms
    // -p log e_p and -(1+p) softplus cancel exactly, not in floating point
    return std::log(d.a) + std::log(d.p) + lep - (d.a + 1.0) * t -
           std::log(d.gamma) - (1.0 + d.p) * std::log1p(std::exp(-m));
  }
  return std::log(d.a) + std::log(d.p) + (d.a * d.p - 1.0) * t -
         std::log(d.gamma) - d.p * lep - (1.0 + d.p) * detail::softplus(m);
}

inline double pdf(const QuantileDA& d, double y) {
  return std::exp(log_pdf(d, y));
}

inline double cdf(const QuantileDA& d, double y) {
  detail::validate(d);
  if (y <= 0.0) return 0.0;
  const double t = std::log(y) - std::log(d.gamma);
  return std::exp(-d.p * detail::softplus(d.log_ep() - d.a * t));
}

inline double quantile(const QuantileDA& d, double u) {
  detail::validate(d);
  detail::check_prob(u);
  const double log_eu = std::log(std::expm1(-std::log(u) / d.p));
  return d.gamma * std::exp((d.log_ep() - log_eu) / d.a);
}

// ---------------------------------------------------------------------------
// sampling (inverse transform, deterministic in the seed)
// ---------------------------------------------------------------------------

template <class Dist>
inline std::vector<double> sample(const Dist& d, std::size_t n,
                                  std::uint64_t seed) {
  specfun::UniformStream stream(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quantile(d, stream.next());
  return out;
}

// ---------------------------------------------------------------------------
// modes
// ---------------------------------------------------------------------------

// argmax of the quantile Singh-Maddala density:
//   b * ((a-1)/(a q + 1))^{1/a} for a > 1, else 0, with b = gamma c_q^{-1/a}
inline double mode(const QuantileSM& d) {
  detail::validate(d);
  if (d.a <= 1.0) return 0.0;
  return d.scale_b() *
         std::exp(std::log((d.a - 1.0) / (d.a * d.q + 1.0)) / d.a);
}

// argmax of the quantile Dagum density:
//   b * ((a p - 1)/(a + 1))^{1/a} for a p > 1, else 0, with b = gamma e_p^{1/a}
inline double mode(const QuantileDA& d) {
  detail::validate(d);
  if (d.a * d.p <= 1.0) return 0.0;
  return d.scale_b() *
         std::exp(std::log((d.a * d.p - 1.0) / (d.a + 1.0)) / d.a);
}

// ---------------------------------------------------------------------------
// raw moments E(Y^r)
// ---------------------------------------------------------------------------

// E(Y^r) = q gamma^r c_q^{-r/a} B(1 + r/a, q - r/a), exists for -a < r < a q.
inline double moment(const QuantileSM& d, double r) {
  detail::validate(d);
  if (!(r > -d.a && r < d.a * d.q))
    throw MomentError("Singh-Maddala moment of order " + std::to_string(r) +
                      " does not exist (requires -a < r < a q)");
  const double log_val = std::log(d.q) + r * std::log(d.gamma) -
                         (r / d.a) * d.log_cq() +
                         specfun::log_beta_fn(1.0 + r / d.a, d.q - r / d.a);
  return std::exp(log_val);
}

// E(Y^r) = p b^r B(p + r/a, 1 - r/a) with b = gamma e_p^{1/a}, exists for
// -a p < r < a.
inline double moment(const QuantileDA& d, double r) {
  detail::validate(d);
  if (!(r > -d.a * d.p && r < d.a))
    throw MomentError("Dagum moment of order " + std::to_string(r) +
                      " does not exist (requires -a p < r < a)");
  const double log_val = std::log(d.p) + r * std::log(d.gamma) +
                         (r / d.a) * d.log_ep() +
                         specfun::log_beta_fn(d.p + r / d.a, 1.0 - r / d.a);
  return std::exp(log_val);
}

// ---------------------------------------------------------------------------
// upper truncated moments E(Y^r 1{Y > x})
// ---------------------------------------------------------------------------

namespace detail {

// |z| above which the upper form is evaluated through the complementary
// lower-tail integral, whose hypergeometric argument is -1/z
inline constexpr double kTruncSwitch = 50.0;

// int_0^u t^{alpha-1} (1+t)^{-nu} dt = u^alpha / alpha
//                                      * 2F1(nu, alpha; alpha+1; -u)
inline double lower_tail_integral_log(double nu, double alpha, double log_u,
                                      const specfun::SpecFunConfig& cfg) {
  const double hyp =
      specfun::gauss_2f1(nu, alpha, alpha + 1.0, -std::exp(log_u), cfg);
  return alpha * log_u - std::log(alpha) + std::log(hyp);
}

}  // namespace detail

// E(Y^r 1{Y>x}) = a q gamma^r (gamma/x)^{aq-r} / ((aq-r) c_q^q)
//                 * 2F1(1+q, q-r/a; q-r/a+1; -(gamma/x)^a / c_q),
// exists for r < a q.
inline double truncated_moment(const QuantileSM& d, double r, double x,
                               const specfun::SpecFunConfig& cfg = {}) {
  detail::validate(d);
  detail::check(x > 0.0, "truncation point must be positive");
  if (!(r < d.a * d.q))
    throw MomentError("Singh-Maddala truncated moment of order " +
                      std::to_string(r) + " does not exist (requires r < a q)");
  const double lcq = d.log_cq();
  const double lgx = std::log(d.gamma) - std::log(x);
  const double log_abs_z = d.a * lgx - lcq;

  if (log_abs_z > std::log(detail::kTruncSwitch) && r > -d.a) {
    // E(Y^r) - E(Y^r 1{Y<=x}), with u = c_q (x/gamma)^a = -1/z
    const double log_b = std::log(d.gamma) - lcq / d.a;
    const double lower = std::exp(
        std::log(d.q) + r * log_b +
        detail::lower_tail_integral_log(1.0 + d.q, 1.0 + r / d.a, -log_abs_z,
                                        cfg));
    return moment(d, r) - lower;
  }

  const double z = -std::exp(log_abs_z);
  const double hyp =
      specfun::gauss_2f1(1.0 + d.q, d.q - r / d.a, d.q - r / d.a + 1.0, z, cfg);
  const double log_pre = std::log(d.a) + std::log(d.q) +
                         r * std::log(d.gamma) + (d.a * d.q - r) * lgx -
                         std::log(d.a * d.q - r) - d.q * lcq;
  return std::exp(log_pre + std::log(hyp));
}

// E(Y^r 1{Y>x}) = p gamma^r e_p (gamma/x)^{a-r} / (1 - r/a)
//                 * 2F1(1+p, 1-r/a; 2-r/a; -e_p (gamma/x)^a),
// exists for r < a.
inline double truncated_moment(const QuantileDA& d, double r, double x,
                               const specfun::SpecFunConfig& cfg = {}) {
  detail::validate(d);
  detail::check(x > 0.0, "truncation point must be positive");
  if (!(r < d.a))
    throw MomentError("Dagum truncated moment of order " + std::to_string(r) +
                      " does not exist (requires r < a)");
  const double lep = d.log_ep();
  const double lgx = std::log(d.gamma) - std::log(x);
  const double log_abs_z = lep + d.a * lgx;

  if (log_abs_z > std::log(detail::kTruncSwitch) && r > -d.a * d.p) {
    // E(Y^r) - E(Y^r 1{Y<=x}), with u = (x/gamma)^a / e_p = -1/z
    const double log_b = std::log(d.gamma) + lep / d.a;
    const double lower = std::exp(
        std::log(d.p) + r * log_b +
        detail::lower_tail_integral_log(1.0 + d.p, d.p + r / d.a, -log_abs_z,
                                        cfg));
    return moment(d, r) - lower;
  }

  const double z = -std::exp(log_abs_z);
  const double hyp =
      specfun::gauss_2f1(1.0 + d.p, 1.0 - r / d.a, 2.0 - r / d.a, z, cfg);
  const double log_pre = std::log(d.p) + r * std::log(d.gamma) + lep +
                         (d.a - r) * lgx - std::log(1.0 - r / d.a);
  return std::exp(log_pre + std::log(hyp));
}

}  // namespace qincome::distributions
