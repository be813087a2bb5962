#include "gwt/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "gwt/errors.hpp"

namespace gwt {

namespace {

// Static block partition; exceptions escaping `body` are rethrown for the
// lowest failing block.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double activate(Activation a, double g) noexcept {
  switch (a) {
    case Activation::relu: return g > 0.0 ? g : 0.0;
    case Activation::identity: return g;
    case Activation::tanh: return std::tanh(g);
  }
  return g;
}

// Computes one layer: pre[j] = sum_i w_ij * h[i], weights drawn unit by
// unit, input index fastest.
template <class Draw>
void dense_layer(std::span<const double> h, std::span<double> pre, Draw&& draw,
                 std::vector<double>* summands, std::size_t capture_unit) {
  for (std::size_t j = 0; j < pre.size(); ++j) {
    double acc = 0.0;
    if (summands != nullptr && j == capture_unit) {
      summands->resize(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) {
        const double term = draw() * h[i];
        (*summands)[i] = term;
        acc += term;
      }
    } else {
      for (std::size_t i = 0; i < h.size(); ++i) acc += draw() * h[i];
    }
    pre[j] = acc;
  }
}

}  // namespace

std::string_view to_string(PriorFamily f) noexcept {
  switch (f) {
    case PriorFamily::gaussian: return "gaussian";
    case PriorFamily::laplace: return "laplace";
    case PriorFamily::generalized_gaussian: return "generalized_gaussian";
  }
  return "unknown";
}

std::string_view to_string(ScalePolicy p) noexcept {
  return p == ScalePolicy::unit ? "unit" : "inv_sqrt_fan_in";
}

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

std::optional<PriorFamily> parse_prior_family(std::string_view s) noexcept {
  if (s == "gaussian") return PriorFamily::gaussian;
  if (s == "laplace") return PriorFamily::laplace;
  if (s == "generalized_gaussian") return PriorFamily::generalized_gaussian;
  return std::nullopt;
}

std::optional<ScalePolicy> parse_scale_policy(std::string_view s) noexcept {
  if (s == "unit") return ScalePolicy::unit;
  if (s == "inv_sqrt_fan_in") return ScalePolicy::inv_sqrt_fan_in;
  return std::nullopt;
}

std::optional<Activation> parse_activation(std::string_view s) noexcept {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  return std::nullopt;
}

LayerPrior LayerPrior::gaussian(ScalePolicy policy) {
  return {PriorFamily::gaussian, 2.0, policy, 1.0};
}
LayerPrior LayerPrior::laplace(ScalePolicy policy) {
  return {PriorFamily::laplace, 1.0, policy, 1.0};
}
LayerPrior LayerPrior::generalized_gaussian(double beta_w, ScalePolicy policy) {
  return {PriorFamily::generalized_gaussian, beta_w, policy, 1.0};
}

void LayerPrior::validate() const {
  if (!(beta_w > 0.0) || !std::isfinite(beta_w))
    throw ParameterError("layer prior: beta_w must be finite and > 0");
  if (!(scale_multiplier > 0.0) || !std::isfinite(scale_multiplier))
    throw ParameterError("layer prior: scale multiplier must be finite and > 0");
  if (family == PriorFamily::gaussian && beta_w != 2.0)
    throw ParameterError("layer prior: gaussian weights have beta_w = 2");
  if (family == PriorFamily::laplace && beta_w != 1.0)
    throw ParameterError("layer prior: laplace weights have beta_w = 1");
}

double LayerPrior::scale(std::size_t fan_in) const noexcept {
  const double base =
      scale_policy == ScalePolicy::unit ? 1.0 : 1.0 / std::sqrt(static_cast<double>(fan_in));
  return base * scale_multiplier;
}

DistributionSpec LayerPrior::weight_distribution(std::size_t fan_in) const {
  const double s = scale(fan_in);
  switch (family) {
    case PriorFamily::gaussian: return DistributionSpec::gaussian(s);
    case PriorFamily::laplace: return DistributionSpec::laplace(s);
    case PriorFamily::generalized_gaussian:
      return DistributionSpec::generalized_gaussian(beta_w, s);
  }
  throw ParameterError("layer prior: unknown family");
}

void NetworkConfig::validate() const {
  if (input_dim == 0) throw ParameterError("network: input_dim must be >= 1");
  if (widths.empty()) throw ParameterError("network: at least one hidden layer required");
  for (std::size_t w : widths)
    if (w == 0) throw ParameterError("network: widths must be >= 1");
  if (layer_priors.size() != widths.size())
    throw ParameterError("network: need one prior per layer (" + std::to_string(widths.size()) +
                         "), got " + std::to_string(layer_priors.size()));
  for (const auto& p : layer_priors) p.validate();
  if (n_samples == 0) throw ParameterError("network: n_samples must be >= 1");
  if (!pool_units)
    for (std::size_t w : widths)
      if (tracked_unit >= w) throw ParameterError("network: tracked unit outside layer width");
  if (input_override && input_override->size() != input_dim)
    throw ParameterError("network: input override length differs from input_dim");
}

std::vector<double> make_input(std::size_t input_dim, std::uint64_t input_seed) {
  if (input_dim == 0) throw ParameterError("make_input: input_dim must be >= 1");
  // Stream id reserved for the input, disjoint from replicate ids.
  auto eng = RngStream{input_seed, ~std::uint64_t{0}}.engine();
  boost::random::normal_distribution<double> normal;
  std::vector<double> x(input_dim);
  for (auto& v : x) v = normal(eng);
  return x;
}

bool is_degenerate_input(std::span<const double> input) noexcept {
  return std::all_of(input.begin(), input.end(), [](double v) { return v == 0.0; });
}

ForwardDraw forward_sample(const NetworkConfig& config, std::span<const double> input,
                           const RngStream& rng, std::optional<SummandCapture> capture) {
  if (input.size() != config.input_dim)
    throw ParameterError("forward_sample: input length differs from input_dim");
  if (capture && (capture->layer == 0 || capture->layer > config.depth() ||
                  capture->unit >= config.widths[capture->layer - 1]))
    throw ParameterError("forward_sample: summand capture outside the network");

  ForwardDraw draw;
  draw.pre.resize(config.depth());
  draw.post.resize(config.depth());
  auto eng = rng.engine();
  std::span<const double> h = input;

  for (std::size_t l = 0; l < config.depth(); ++l) {
    const LayerPrior& prior = config.layer_priors[l];
    const double s = prior.scale(h.size());
    auto& pre = draw.pre[l];
    pre.assign(config.widths[l], 0.0);
    std::vector<double>* summands =
        capture && capture->layer == l + 1 ? &draw.summands : nullptr;
    const std::size_t unit = capture ? capture->unit : 0;

    switch (prior.family) {
      case PriorFamily::gaussian: {
        boost::random::normal_distribution<double> dist(0.0, s);
        dense_layer(h, pre, [&] { return dist(eng); }, summands, unit);
        break;
      }
      case PriorFamily::laplace: {
        boost::random::laplace_distribution<double> dist(0.0, s);
        dense_layer(h, pre, [&] { return dist(eng); }, summands, unit);
        break;
      }
      case PriorFamily::generalized_gaussian: {
        const double inv_beta = 1.0 / prior.beta_w;
        boost::random::gamma_distribution<double> gamma(inv_beta, 1.0);
        dense_layer(
            h, pre,
            [&] {
              const double mag = s * std::pow(gamma(eng), inv_beta);
              return (eng() >> 63) != 0 ? -mag : mag;
            },
            summands, unit);
        break;
      }
    }

    auto& post = draw.post[l];
    post.resize(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j) {
      if (!std::isfinite(pre[j]))
        throw OverflowError("non-finite pre-activation in layer " + std::to_string(l + 1),
                            l + 1, rng.stream_id);
      post[j] = activate(config.activation, pre[j]);
    }
    h = post;
  }
  return draw;
}

std::size_t resolve_worker_count(std::optional<std::size_t> requested) {
  std::size_t workers = requested && *requested > 0
                            ? *requested
                            : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GWT_LAB_THREADS")) {
    char* end = nullptr;
    const unsigned long long cap = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) workers = std::min<std::size_t>(workers, cap);
  }
  return workers;
}

UnitTrace run_prior_monte_carlo(const NetworkConfig& config, std::optional<std::size_t> workers) {
  config.validate();
  const std::vector<double> input =
      config.input_override ? *config.input_override : make_input(config.input_dim, config.input_seed);

  const std::size_t n = config.n_samples;
  const std::size_t depth = config.depth();
  std::vector<std::size_t> per_replicate(depth, 1);
  if (config.pool_units) per_replicate = config.widths;

  UnitTrace trace;
  trace.pooled = config.pool_units;
  trace.degenerate_input = is_degenerate_input(input);
  trace.pre.resize(depth);
  trace.post.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    trace.pre[l].resize(n * per_replicate[l]);
    trace.post[l].resize(n * per_replicate[l]);
  }
  std::vector<unsigned char> overflowed(n, 0);
  std::vector<std::size_t> overflow_layer(n, 0);

  parallel_for(n, resolve_worker_count(workers), [&](std::size_t i) {
    ForwardDraw d;
    try {
      d = forward_sample(config, input, RngStream{config.seed, i});
    } catch (const OverflowError& e) {
      overflowed[i] = 1;
      overflow_layer[i] = e.layer();
      return;
    }
    for (std::size_t l = 0; l < depth; ++l) {
      if (config.pool_units) {
        std::copy(d.pre[l].begin(), d.pre[l].end(), trace.pre[l].begin() + i * per_replicate[l]);
        std::copy(d.post[l].begin(), d.post[l].end(), trace.post[l].begin() + i * per_replicate[l]);
      } else {
        trace.pre[l][i] = d.pre[l][config.tracked_unit];
        trace.post[l][i] = d.post[l][config.tracked_unit];
      }
    }
  });

  const auto bad = static_cast<std::size_t>(std::count(overflowed.begin(), overflowed.end(), 1));
  if (bad == 0) return trace;
  const auto first = static_cast<std::size_t>(
      std::find(overflowed.begin(), overflowed.end(), 1) - overflowed.begin());
  if (static_cast<double>(bad) > 1e-4 * static_cast<double>(n))
    throw OverflowError(std::to_string(bad) + " of " + std::to_string(n) +
                            " replicates overflowed (first: replicate " + std::to_string(first) +
                            ", layer " + std::to_string(overflow_layer[first]) + ")",
                        overflow_layer[first], first);

  // Compact in replicate order so the trace stays worker-independent.
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t k = per_replicate[l];
    std::size_t out = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (overflowed[i]) continue;
      for (std::size_t c = 0; c < k; ++c) {
        trace.pre[l][out * k + c] = trace.pre[l][i * k + c];
        trace.post[l][out * k + c] = trace.post[l][i * k + c];
      }
      ++out;
    }
    trace.pre[l].resize(out * k);
    trace.post[l].resize(out * k);
  }
  trace.dropped_overflow = bad;
  return trace;
}

JointSamples sample_layer_summands(const NetworkConfig& config, std::size_t layer,
                                   std::size_t unit, std::optional<std::size_t> workers) {
  config.validate();
  if (layer == 0 || layer > config.depth())
    throw ParameterError("sample_layer_summands: layer outside the network");
  const std::vector<double> input =
      config.input_override ? *config.input_override : make_input(config.input_dim, config.input_seed);
  const std::size_t fan_in = layer == 1 ? config.input_dim : config.widths[layer - 2];
  JointSamples out(config.n_samples, fan_in);
  parallel_for(config.n_samples, resolve_worker_count(workers), [&](std::size_t i) {
    const ForwardDraw d =
        forward_sample(config, input, RngStream{config.seed, i}, SummandCapture{layer, unit});
    std::copy(d.summands.begin(), d.summands.end(), out.row(i).begin());
  });
  return out;
}

double predicted_tail_parameter(std::span<const LayerPrior> layer_priors, std::size_t layer) {
  if (layer == 0 || layer > layer_priors.size())
    throw ParameterError("predicted_tail_parameter: layer outside 1..depth");
  double inv = 0.0;
  for (std::size_t k = 0; k < layer; ++k) inv += 1.0 / layer_priors[k].beta_w;
  return 1.0 / inv;
}

}  // namespace gwt
