#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

namespace gwt {

/// Which tail of the sample is analyzed. Left tails are read as right tails
/// of -X, absolute tails as right tails of |X|.
enum class Side { right, left, absolute };

std::string_view to_string(Side s) noexcept;
std::optional<Side> parse_side(std::string_view name) noexcept;

/// Side-folded, ascending-sorted sample.
class EmpiricalTail {
 public:
  /// Throws DomainError on non-finite samples. An empty sample is allowed
  /// but every query on it throws.
  explicit EmpiricalTail(std::span<const double> samples, Side side = Side::right);

  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  bool empty() const noexcept { return sorted_.empty(); }
  Side side() const noexcept { return side_; }

  /// Linearly interpolated sample quantile (order statistic at q*(n-1)).
  double quantile(double q) const;

 private:
  std::vector<double> sorted_;
  Side side_;
};

/// Quantile window and grid for log-log tail fits.
struct FitWindow {
  double q_lo = 0.99;
  double q_hi = 0.9999;
  std::size_t min_points = 50;
  std::size_t grid_size = 200;

  /// Throws ParameterError unless 0 < q_lo < q_hi < 1, min_points >= 3 and
  /// min_points <= grid_size.
  void validate() const;
};

struct LogLogPoint {
  double log_x = 0.0;
  double log_neg_log_survival = 0.0;
};

struct TailEstimate {
  double beta_hat = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t fit_points = 0;
  double x_lo = 0.0;
  double x_hi = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Ordinary least squares of y on x; needs at least three points.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

/// (1/n) #{i : X_i >= x}.
double empirical_survival(const EmpiricalTail& tail, double x);

/// Points (log x, log(-log S(x))) on a log-spaced grid between the q_lo and
/// q_hi sample quantiles, dropping grid points where S is 0 or 1.
///
/// Throws InsufficientDataError when fewer than `min_points` grid points
/// survive or fewer than `min_points` samples fall inside the window, and
/// DomainError when the lower quantile is not positive.
std::vector<LogLogPoint> loglog_points(const EmpiricalTail& tail, const FitWindow& window);

/// OLS through recorded log-log points. Throws InsufficientDataError below
/// `min_points` and DegenerateTailError on a non-positive slope.
TailEstimate fit_loglog(std::span<const LogLogPoint> points, std::size_t min_points = 3);

TailEstimate estimate_tail_index(const EmpiricalTail& tail, const FitWindow& window);

/// Outcome of fitting a sub-Weibull envelope a*exp(-b x^(1/theta)).
///
/// The envelope is calibrated on the shallower half of the grid (b by OLS
/// of log S on x^(1/theta), a as the tightest constant times the slack
/// factor) and must then dominate the deeper half, up to binomial noise.
struct SubWeibullCheck {
  bool holds = false;
  double a = 0.0;
  double b = 0.0;
  std::size_t checked_points = 0;
  /// max S / envelope over the verified points.
  double worst_ratio = 0.0;
};

SubWeibullCheck check_subweibull_envelope(const EmpiricalTail& tail, double theta,
                                          const FitWindow& window);

struct GwtEnvelopeCheck {
  bool holds = false;
  std::size_t checked_points = 0;
  std::size_t lower_violations = 0;
  std::size_t upper_violations = 0;
};

/// exp(-x^beta l_lo) <= S(x) <= exp(-x^beta l_hi) on the grid, with the
/// slack factor and binomial noise allowance. Requires l_lo >= l_hi > 0.
GwtEnvelopeCheck check_gwt_envelope(const EmpiricalTail& tail, double beta, double l_lo,
                                    double l_hi, const FitWindow& window);

/// Multiplicative slack on envelope checks.
inline constexpr double kEnvelopeSlack = 1.05;
/// Binomial standard deviations tolerated on top of the slack.
inline constexpr double kEnvelopeNoiseSigmas = 3.0;

}  // namespace gwt
