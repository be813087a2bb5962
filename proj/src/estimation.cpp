#include "gwt/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gwt/errors.hpp"

namespace gwt {

namespace {

struct SurvivalGrid {
  std::vector<double> x;
  std::vector<double> survival;
};

// Log-spaced grid between the window quantiles, keeping 0 < S < 1.
SurvivalGrid survival_grid(const EmpiricalTail& tail, const FitWindow& window) {
  window.validate();
  if (tail.empty()) throw InsufficientDataError("tail fit on an empty sample");
  const double x_lo = tail.quantile(window.q_lo);
  const double x_hi = tail.quantile(window.q_hi);
  if (!(x_lo > 0.0))
    throw DomainError("tail fit window starts at a non-positive quantile (" +
                      std::to_string(x_lo) + ")");
  const auto sorted = tail.sorted();
  const auto first = std::lower_bound(sorted.begin(), sorted.end(), x_lo);
  const auto last = std::upper_bound(sorted.begin(), sorted.end(), x_hi);
  const auto inside = static_cast<std::size_t>(last - first);
  if (!(x_hi > x_lo) || inside < window.min_points)
    throw InsufficientDataError("only " + std::to_string(inside) +
                                " samples inside the tail window, need " +
                                std::to_string(window.min_points));

  SurvivalGrid grid;
  grid.x.reserve(window.grid_size);
  grid.survival.reserve(window.grid_size);
  const double log_lo = std::log(x_lo);
  const double step = (std::log(x_hi) - log_lo) / static_cast<double>(window.grid_size - 1);
  for (std::size_t k = 0; k < window.grid_size; ++k) {
    const double x = k + 1 == window.grid_size ? x_hi : std::exp(log_lo + step * k);
    const double s = empirical_survival(tail, x);
    if (s <= 0.0 || s >= 1.0) continue;
    grid.x.push_back(x);
    grid.survival.push_back(s);
  }
  if (grid.x.size() < window.min_points)
    throw InsufficientDataError("only " + std::to_string(grid.x.size()) +
                                " usable grid points, need " +
                                std::to_string(window.min_points));
  return grid;
}

double binomial_sd(double p, std::size_t n) {
  p = std::clamp(p, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

std::string_view to_string(Side s) noexcept {
  switch (s) {
    case Side::right: return "right";
    case Side::left: return "left";
    case Side::absolute: return "absolute";
  }
  return "unknown";
}

std::optional<Side> parse_side(std::string_view name) noexcept {
  if (name == "right") return Side::right;
  if (name == "left") return Side::left;
  if (name == "absolute") return Side::absolute;
  return std::nullopt;
}

EmpiricalTail::EmpiricalTail(std::span<const double> samples, Side side)
    : sorted_(samples.begin(), samples.end()), side_(side) {
  for (double& x : sorted_) {
    if (!std::isfinite(x)) throw DomainError("EmpiricalTail: non-finite sample");
    if (side == Side::left) x = -x;
    if (side == Side::absolute) x = std::abs(x);
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalTail::quantile(double q) const {
  if (sorted_.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile level outside [0, 1]");
  const double pos = q * static_cast<double>(sorted_.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted_.size()) return sorted_.back();
  const double frac = pos - static_cast<double>(i);
  return sorted_[i] + frac * (sorted_[i + 1] - sorted_[i]);
}

void FitWindow::validate() const {
  if (!(q_lo > 0.0 && q_lo < q_hi && q_hi < 1.0))
    throw ParameterError("fit window needs 0 < q_lo < q_hi < 1");
  if (min_points < 3) throw ParameterError("fit window needs min_points >= 3");
  if (grid_size < min_points) throw ParameterError("fit window needs grid_size >= min_points");
}

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m != y.size()) throw ParameterError("ordinary_least_squares: size mismatch");
  if (m < 3) throw InsufficientDataError("ordinary_least_squares needs at least 3 points");
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = x[i] - mean_x;
    sxx += dx * dx;
    sxy += dx * (y[i] - mean_y);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("ordinary_least_squares: constant regressor");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
  }
  fit.stderr_slope = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  return fit;
}

double empirical_survival(const EmpiricalTail& tail, double x) {
  if (tail.empty()) throw InsufficientDataError("empirical_survival of an empty sample");
  const auto sorted = tail.sorted();
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

std::vector<LogLogPoint> loglog_points(const EmpiricalTail& tail, const FitWindow& window) {
  const SurvivalGrid grid = survival_grid(tail, window);
  std::vector<LogLogPoint> points(grid.x.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    points[i] = {std::log(grid.x[i]), std::log(-std::log(grid.survival[i]))};
  return points;
}

TailEstimate fit_loglog(std::span<const LogLogPoint> points, std::size_t min_points) {
  if (points.size() < std::max<std::size_t>(min_points, 3))
    throw InsufficientDataError("only " + std::to_string(points.size()) +
                                " log-log points to fit");
  std::vector<double> lx(points.size()), ly(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    lx[i] = points[i].log_x;
    ly[i] = points[i].log_neg_log_survival;
  }
  const LinearFit fit = ordinary_least_squares(lx, ly);
  if (!(fit.slope > 0.0))
    throw DegenerateTailError("non-positive log-log slope; tail looks bounded or irregular",
                              fit.slope);
  TailEstimate est;
  est.beta_hat = fit.slope;
  est.intercept = fit.intercept;
  est.stderr_slope = fit.stderr_slope;
  est.fit_points = points.size();
  est.x_lo = std::exp(lx.front());
  est.x_hi = std::exp(lx.back());
  return est;
}

TailEstimate estimate_tail_index(const EmpiricalTail& tail, const FitWindow& window) {
  const auto points = loglog_points(tail, window);
  return fit_loglog(points, window.min_points);
}

SubWeibullCheck check_subweibull_envelope(const EmpiricalTail& tail, double theta,
                                          const FitWindow& window) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ParameterError("sub-Weibull check needs theta > 0");
  const SurvivalGrid grid = survival_grid(tail, window);
  const std::size_t m = grid.x.size();
  const std::size_t half = m / 2;

  std::vector<double> u(m), log_s(m);
  for (std::size_t i = 0; i < m; ++i) {
    u[i] = std::pow(grid.x[i], 1.0 / theta);
    log_s[i] = std::log(grid.survival[i]);
  }

  SubWeibullCheck out;
  const LinearFit calib = ordinary_least_squares(std::span(u).first(half),
                                                 std::span(log_s).first(half));
  out.b = -calib.slope;
  double log_a = -INFINITY;
  for (std::size_t i = 0; i < half; ++i) log_a = std::max(log_a, log_s[i] + out.b * u[i]);
  log_a += std::log(kEnvelopeSlack);
  out.a = std::exp(log_a);
  out.checked_points = m - half;
  if (!(out.b > 0.0)) return out;

  bool holds = true;
  for (std::size_t i = half; i < m; ++i) {
    const double envelope = std::exp(log_a - out.b * u[i]);
    const double allowed = envelope + kEnvelopeNoiseSigmas * binomial_sd(envelope, tail.size());
    out.worst_ratio = std::max(out.worst_ratio, grid.survival[i] / envelope);
    if (grid.survival[i] > allowed) holds = false;
  }
  out.holds = holds;
  return out;
}

GwtEnvelopeCheck check_gwt_envelope(const EmpiricalTail& tail, double beta, double l_lo,
                                    double l_hi, const FitWindow& window) {
  if (!(beta > 0.0) || !(l_hi > 0.0) || !(l_lo >= l_hi))
    throw ParameterError("GWT envelope check needs beta > 0 and l_lo >= l_hi > 0");
  const SurvivalGrid grid = survival_grid(tail, window);
  GwtEnvelopeCheck out;
  out.checked_points = grid.x.size();
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const double xb = std::pow(grid.x[i], beta);
    const double lower = std::exp(-xb * l_lo);
    const double upper = std::exp(-xb * l_hi);
    const double s = grid.survival[i];
    if (s < lower / kEnvelopeSlack - kEnvelopeNoiseSigmas * binomial_sd(lower, tail.size()))
      ++out.lower_violations;
    if (s > upper * kEnvelopeSlack + kEnvelopeNoiseSigmas * binomial_sd(upper, tail.size()))
      ++out.upper_violations;
  }
  out.holds = out.lower_violations == 0 && out.upper_violations == 0;
  return out;
}

}  // namespace gwt
