#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwt/distributions.hpp"
#include "gwt/estimation.hpp"
#include "gwt/joint.hpp"
#include "gwt/rng.hpp"

namespace gwt {

inline const std::vector<double> kDefaultPdQuantiles = {0.5, 0.9, 0.99, 0.999, 0.9999};
inline constexpr std::size_t kDefaultPdMinCellCount = 100;

// A credible Weibull fit has beta_hat in [0.1, 10] and a stderr below this.
// Lack of fit on a bounded tail keeps the stderr near 0.05 at any n, while
// genuine Weibull tails sit below 0.007 from n = 1e5 on.
inline constexpr double kCredibleFitStderr = 0.02;
inline bool credible_weibull_fit(const TailEstimate& e) {
  return e.beta_hat >= 0.1 && e.beta_hat <= 10.0 && e.stderr_slope < kCredibleFitStderr;
}

/// Empirical positive-dependence constant: the minimum over z of
/// P(X_i >= 0 for all i != k | X_k >= z) (right) or the mirrored event
/// (left), with z at quantiles of the conditioning coordinate.
struct PDEstimate {
  double c_hat = 0.0;
  Side side = Side::right;
  std::vector<double> z_grid;
  std::vector<double> per_z_conditional;
  std::vector<std::size_t> cell_counts;
  std::size_t min_cell_count = kDefaultPdMinCellCount;
};

/// Needs at least 1e5 rows and quantiles in [0.5, 0.9999]. For side left,
/// z is taken at the (1 - q) quantile and the events are X_k <= z and
/// X_i <= 0. Throws InsufficientDataError when a cell holds fewer than
/// `min_cell_count` conditioning events.
PDEstimate estimate_pd_constant(const JointSamples& joint, std::size_t conditioning_index,
                                Side side,
                                std::span<const double> z_quantiles = kDefaultPdQuantiles,
                                std::size_t min_cell_count = kDefaultPdMinCellCount);

enum class ClosureRule { sum_min, product_harmonic, power };
std::string_view to_string(ClosureRule r) noexcept;

/// |beta_hat - predicted| <= max(relative * predicted, stderr_multiple * stderr).
struct ClosureTolerance {
  double relative = 0.15;
  double stderr_multiple = 2.0;
  double band(double predicted, double stderr_slope) const noexcept;
};

struct ClosureReport {
  ClosureRule rule = ClosureRule::sum_min;
  std::vector<TailClass> inputs;
  std::vector<std::string> input_labels;
  double predicted_beta = 0.0;
  Side side = Side::right;
  TailEstimate estimated;
  double tolerance = 0.0;
  bool pass = false;
  /// Log-log points behind `estimated`.
  std::vector<LogLogPoint> points;
};

/// Sum of independent draws, right tail, against min of the input betas.
/// Each addend's stream is keyed by its spec (and repeat count), and
/// addends are accumulated in a canonical order, so the report depends only
/// on the multiset of specs. Bounded inputs act as identity elements.
ClosureReport check_sum_rule(std::span<const DistributionSpec> specs, std::size_t n,
                             const FitWindow& window, const RngStream& rng,
                             const ClosureTolerance& tol = {});

/// |XY| for independent symmetric X, Y against 1/(1/beta_x + 1/beta_y).
/// A non-zero point mass acts as the identity.
ClosureReport check_product_rule(const DistributionSpec& spec_x, const DistributionSpec& spec_y,
                                 std::size_t n, const FitWindow& window, const RngStream& rng,
                                 const ClosureTolerance& tol = {});

/// a|X|^b for symmetric X against beta / b.
ClosureReport check_power_rule(const DistributionSpec& spec, double a, double b, std::size_t n,
                               const FitWindow& window, const RngStream& rng,
                               const ClosureTolerance& tol = {});

/// Row sums of user-supplied joint draws against the min rule over
/// `inputs`. No dependence condition is checked here.
ClosureReport check_sum_of_joint(const JointSamples& joint, std::vector<TailClass> inputs,
                                 const FitWindow& window, const ClosureTolerance& tol = {});

/// Y = X 1{|X| <= m} - X 1{|X| > m}; X + Y = 2X 1{|X| <= m}.
struct TruncationReport {
  double m = 0.0;
  double max_abs_sum = 0.0;
  bool within_bounds = false;
  /// Fraction of |X + Y| strictly above 2m; zero by construction.
  double survival_beyond_bound = 0.0;
  bool degenerate_beyond_bound = false;
  /// PD estimate for (X, Y), conditioning on Y, right side.
  PDEstimate pd;
  /// Fit of |X + Y| on the default window, which lies below 2m.
  std::optional<TailEstimate> estimate_below_bound;
  std::string estimate_error;
};

TruncationReport negative_control_truncation(const DistributionSpec& spec, double m,
                                             std::size_t n, const RngStream& rng,
                                             const FitWindow& window = {});

/// Joint (X, -X) draws.
JointSamples counter_monotone_pair(const DistributionSpec& spec, std::size_t n,
                                   const RngStream& rng);

/// n x N independent draws of `spec`, column c from rng.substream(c).
JointSamples independent_columns(const DistributionSpec& spec, std::size_t n, std::size_t cols,
                                 const RngStream& rng);

}  // namespace gwt
