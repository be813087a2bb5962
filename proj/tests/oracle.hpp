#pragma once
// Test-side reference computations. Kept independent of the library code
// paths they check: long double sums, plain bisection, direct quadrature.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

struct Line {
  long double slope = 0, intercept = 0;
};

// Normal equations on raw sums.
inline Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += (long double)x[i] * x[i];
    sxy += (long double)x[i] * y[i];
  }
  Line l;
  l.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  l.intercept = (sy - l.slope * sx) / n;
  return l;
}

// Smallest x with S(x) <= u, found by bisection on a decreasing survival.
inline double survival_quantile(const std::function<double(double)>& S, double u, double lo = 1e-12,
                                double hi = 1e3) {
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (S(mid) > u) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// The slope the log-log estimator would return with an infinite sample: the
// same log-spaced grid between the true quantiles, exact survival values.
inline double noise_free_slope(const std::function<double(double)>& S, double q_lo, double q_hi,
                               int grid = 200) {
  const double a = std::log(survival_quantile(S, 1.0 - q_lo));
  const double b = std::log(survival_quantile(S, 1.0 - q_hi));
  std::vector<double> lx, ly;
  for (int i = 0; i < grid; ++i) {
    const double t = a + (b - a) * i / (grid - 1);
    lx.push_back(t);
    ly.push_back(std::log(-std::log(S(std::exp(t)))));
  }
  return static_cast<double>(ols(lx, ly).slope);
}

// Two-sided DKW band half-width at confidence 1 - alpha.
inline double dkw_epsilon(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

// P(|XY| > t) for independent standard normals: density of XY is K0(|z|)/pi.
inline double gaussian_product_abs_survival(double t) {
  auto f = [](double z) { return boost::math::cyl_bessel_k(0, z) / M_PI; };
  if (t <= 0) return 1.0;
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, t, std::numeric_limits<double>::infinity(), 15, 1e-13);
  return 2.0 * tail;
}

inline double empirical_ge(const std::vector<double>& xs, double x) {
  std::size_t c = 0;
  for (double v : xs) c += v >= x;
  return static_cast<double>(c) / xs.size();
}

// Small deterministic generator for property-test inputs.
struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t s) : eng(s) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng);
  }
  std::uint64_t u64() { return eng(); }
};

}  // namespace oracle
