#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gwt/distributions.hpp"
#include "gwt/joint.hpp"
#include "gwt/rng.hpp"

namespace gwt {

enum class PriorFamily { gaussian, laplace, generalized_gaussian };
enum class ScalePolicy { unit, inv_sqrt_fan_in };
enum class Activation { relu, identity, tanh };

std::string_view to_string(PriorFamily f) noexcept;
std::string_view to_string(ScalePolicy p) noexcept;
std::string_view to_string(Activation a) noexcept;
std::optional<PriorFamily> parse_prior_family(std::string_view s) noexcept;
std::optional<ScalePolicy> parse_scale_policy(std::string_view s) noexcept;
std::optional<Activation> parse_activation(std::string_view s) noexcept;

/// Symmetric weight prior of one layer.
struct LayerPrior {
  PriorFamily family = PriorFamily::gaussian;
  /// Tail parameter of the weights; 2 for gaussian, 1 for laplace, the
  /// shape for generalized_gaussian.
  double beta_w = 2.0;
  ScalePolicy scale_policy = ScalePolicy::inv_sqrt_fan_in;
  /// Extra factor on the weight scale.
  double scale_multiplier = 1.0;

  static LayerPrior gaussian(ScalePolicy policy = ScalePolicy::inv_sqrt_fan_in);
  static LayerPrior laplace(ScalePolicy policy = ScalePolicy::inv_sqrt_fan_in);
  static LayerPrior generalized_gaussian(double beta_w,
                                         ScalePolicy policy = ScalePolicy::inv_sqrt_fan_in);

  void validate() const;
  double scale(std::size_t fan_in) const noexcept;
  DistributionSpec weight_distribution(std::size_t fan_in) const;
};

struct NetworkConfig {
  std::size_t input_dim = 1;
  /// Hidden widths H_1..H_L.
  std::vector<std::size_t> widths;
  std::vector<LayerPrior> layer_priors;
  Activation activation = Activation::relu;
  std::size_t n_samples = 1;
  std::uint64_t seed = 0;
  std::uint64_t input_seed = 0;
  /// 0-based unit recorded in every layer.
  std::size_t tracked_unit = 0;
  /// Record every unit of each layer instead of the tracked one. Units of a
  /// layer are dependent, so pooled samples are not iid.
  bool pool_units = false;
  /// Replaces make_input() when set.
  std::optional<std::vector<double>> input_override;

  std::size_t depth() const noexcept { return widths.size(); }
  void validate() const;
};

/// One replicate: every unit of every layer. pre[l][j] = g_j^(l+1).
struct ForwardDraw {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  /// Terms w_ij h_i of unit `capture_unit` in layer `capture_layer`, if
  /// requested.
  std::vector<double> summands;
};

/// Layer (1-based) and unit whose weighted summands forward_sample records.
struct SummandCapture {
  std::size_t layer = 1;
  std::size_t unit = 0;
};

/// Tracked-unit pre- and post-activation samples, one vector per layer.
struct UnitTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  bool pooled = false;
  bool degenerate_input = false;
  std::size_t dropped_overflow = 0;

  std::size_t depth() const noexcept { return pre.size(); }
};

/// Fixed standard-Gaussian input vector h^(0).
std::vector<double> make_input(std::size_t input_dim, std::uint64_t input_seed);

bool is_degenerate_input(std::span<const double> input) noexcept;

/// Draws fresh weights and runs the full-width forward pass once.
/// Throws OverflowError if a pre-activation is not finite.
ForwardDraw forward_sample(const NetworkConfig& config, std::span<const double> input,
                           const RngStream& rng,
                           std::optional<SummandCapture> capture = std::nullopt);

/// `requested` or the hardware concurrency, capped by GWT_LAB_THREADS.
std::size_t resolve_worker_count(std::optional<std::size_t> requested = std::nullopt);

/// n_samples replicates; replicate i uses stream (seed, i), so the result
/// does not depend on `workers`. Replicates that overflow are dropped;
/// more than 0.01% of them aborts with OverflowError.
UnitTrace run_prior_monte_carlo(const NetworkConfig& config,
                                std::optional<std::size_t> workers = std::nullopt);

/// n_samples x H_{layer-1} matrix of the products w_ij h_i^(layer-1) feeding
/// unit `unit` of `layer`.
JointSamples sample_layer_summands(const NetworkConfig& config, std::size_t layer,
                                   std::size_t unit,
                                   std::optional<std::size_t> workers = std::nullopt);

/// 1 / sum_{k <= layer} 1/beta_w^(k), for 1-based `layer`.
double predicted_tail_parameter(std::span<const LayerPrior> layer_priors, std::size_t layer);

}  // namespace gwt
