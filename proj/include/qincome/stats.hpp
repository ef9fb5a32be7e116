#pragma once

// Small sample-statistics helpers shared across modules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qincome::stats {

inline double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Linear-interpolation empirical quantile (R type 7) of an unsorted sample.
inline double empirical_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("empirical_quantile: p must be in [0,1]");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  const double w = h - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[lo + 1] * w;
}

// Same but for a pre-sorted sample (used in hot loops).
inline double sorted_quantile(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  const double w = h - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[lo + 1] * w;
}

inline double median(std::vector<double> v) {
  return empirical_quantile(std::move(v), 0.5);
}

// Sample standard deviation with n-1 denominator.
inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_sd: need n >= 2");
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

struct CentralMoments {
  double m2, m3, m4;  // 1/n central moments
};

inline CentralMoments central_moments(const std::vector<double>& v) {
  const double m = mean(v);
  CentralMoments cm{0.0, 0.0, 0.0};
  for (double x : v) {
    const double d = x - m;
    const double d2 = d * d;
    cm.m2 += d2;
    cm.m3 += d2 * d;
    cm.m4 += d2 * d2;
  }
  const double n = static_cast<double>(v.size());
  cm.m2 /= n;
  cm.m3 /= n;
  cm.m4 /= n;
  return cm;
}

}  // namespace qincome::stats
