#include <fstream>
#include <set>
#include <sstream>

#include "gwt/cli.hpp"
#include "gwt/errors.hpp"

namespace gwt::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

std::uint64_t get_u64(const json& v, const std::string& where) {
  // Parsed documents store non-negative literals as unsigned; built ones may not.
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(where + ": expected a non-negative integer");
}

std::size_t get_count(const json& v, const std::string& where) {
  const auto n = get_u64(v, where);
  if (n == 0) throw ConfigError(where + ": must be positive");
  return static_cast<std::size_t>(n);
}

double get_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

LayerPrior parse_prior(const json& p, const std::string& where) {
  reject_unknown_keys(p, {"family", "beta_w", "scale_policy", "scale_multiplier"}, where);
  if (!p.contains("family")) throw ConfigError(where + ": missing 'family'");
  const auto fam = parse_prior_family(get_string(p["family"], where + ".family"));
  if (!fam) throw ConfigError(where + ".family: expected gaussian, laplace or generalized_gaussian");
  LayerPrior prior;
  prior.family = *fam;
  prior.beta_w = *fam == PriorFamily::gaussian ? 2.0 : *fam == PriorFamily::laplace ? 1.0 : 0.0;
  if (p.contains("beta_w")) prior.beta_w = get_real(p["beta_w"], where + ".beta_w");
  if (*fam == PriorFamily::generalized_gaussian && !p.contains("beta_w"))
    throw ConfigError(where + ": generalized_gaussian needs 'beta_w'");
  if (p.contains("scale_policy")) {
    const auto pol = parse_scale_policy(get_string(p["scale_policy"], where + ".scale_policy"));
    if (!pol) throw ConfigError(where + ".scale_policy: expected unit or inv_sqrt_fan_in");
    prior.scale_policy = *pol;
  }
  if (p.contains("scale_multiplier"))
    prior.scale_multiplier = get_real(p["scale_multiplier"], where + ".scale_multiplier");
  try {
    prior.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return prior;
}

NetworkSection parse_network(const json& n) {
  reject_unknown_keys(n,
                      {"input_dim", "widths", "activation", "priors", "input_seed",
                       "tracked_unit", "pool_units"},
                      "network");
  for (const char* key : {"input_dim", "widths", "priors"})
    if (!n.contains(key)) throw ConfigError(std::string("network: missing '") + key + "'");
  NetworkSection net;
  net.input_dim = get_count(n["input_dim"], "network.input_dim");
  if (!n["widths"].is_array() || n["widths"].empty())
    throw ConfigError("network.widths: expected a non-empty array");
  for (std::size_t i = 0; i < n["widths"].size(); ++i)
    net.widths.push_back(get_count(n["widths"][i], "network.widths[" + std::to_string(i) + "]"));
  if (n.contains("activation")) {
    const auto act = parse_activation(get_string(n["activation"], "network.activation"));
    if (!act) throw ConfigError("network.activation: expected relu, identity or tanh");
    net.activation = *act;
  }
  if (!n["priors"].is_array()) throw ConfigError("network.priors: expected an array");
  for (std::size_t i = 0; i < n["priors"].size(); ++i)
    net.priors.push_back(parse_prior(n["priors"][i], "network.priors[" + std::to_string(i) + "]"));
  if (net.priors.size() != net.widths.size())
    throw ConfigError("network.priors: need one prior per layer");
  if (n.contains("input_seed")) net.input_seed = get_u64(n["input_seed"], "network.input_seed");
  if (n.contains("tracked_unit"))
    net.tracked_unit = get_count(n["tracked_unit"], "network.tracked_unit");
  if (n.contains("pool_units")) {
    if (!n["pool_units"].is_boolean()) throw ConfigError("network.pool_units: expected a boolean");
    net.pool_units = n["pool_units"].get<bool>();
  }
  for (std::size_t w : net.widths)
    if (!net.pool_units && net.tracked_unit > w)
      throw ConfigError("network.tracked_unit: outside a layer width");
  return net;
}

FitWindow parse_window(const json& w) {
  reject_unknown_keys(w, {"q_lo", "q_hi", "grid_size", "min_points"}, "fit_window");
  FitWindow win;
  if (w.contains("q_lo")) win.q_lo = get_real(w["q_lo"], "fit_window.q_lo");
  if (w.contains("q_hi")) win.q_hi = get_real(w["q_hi"], "fit_window.q_hi");
  if (w.contains("grid_size")) win.grid_size = get_count(w["grid_size"], "fit_window.grid_size");
  if (w.contains("min_points"))
    win.min_points = get_count(w["min_points"], "fit_window.min_points");
  try {
    win.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("fit_window: ") + e.what());
  }
  return win;
}

DistributionSpec parse_distribution(const json& d) {
  reject_unknown_keys(d, {"family", "params"}, "distribution");
  if (!d.contains("family")) throw ConfigError("distribution: missing 'family'");
  const auto fam = parse_family(get_string(d["family"], "distribution.family"));
  if (!fam) throw ConfigError("distribution.family: unknown family");
  std::map<std::string, double> params;
  if (d.contains("params")) {
    if (!d["params"].is_object()) throw ConfigError("distribution.params: expected an object");
    for (const auto& [k, v] : d["params"].items())
      params[k] = get_real(v, "distribution.params." + k);
  }
  try {
    return DistributionSpec::make(*fam, params);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  reject_unknown_keys(doc,
                      {"command", "seed", "n_samples", "network", "fit_window", "suite",
                       "out_dir", "distribution", "side"},
                      "config");
  ExperimentConfig cfg;
  if (doc.contains("command")) {
    cfg.command = get_string(doc["command"], "command");
    if (*cfg.command != "bnn" && *cfg.command != "estimate" && *cfg.command != "closure")
      throw ConfigError("command: expected bnn, estimate or closure");
  }
  if (doc.contains("seed")) cfg.seed = get_u64(doc["seed"], "seed");
  if (doc.contains("n_samples")) cfg.n_samples = get_count(doc["n_samples"], "n_samples");
  if (doc.contains("network")) cfg.network = parse_network(doc["network"]);
  if (doc.contains("fit_window")) cfg.fit_window = parse_window(doc["fit_window"]);
  if (doc.contains("suite")) cfg.suite = get_string(doc["suite"], "suite");
  if (doc.contains("out_dir")) cfg.out_dir = get_string(doc["out_dir"], "out_dir");
  if (doc.contains("distribution")) cfg.distribution = parse_distribution(doc["distribution"]);
  if (doc.contains("side")) {
    const auto side = parse_side(get_string(doc["side"], "side"));
    if (!side) throw ConfigError("side: expected right, left or absolute");
    cfg.side = *side;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

NetworkConfig to_network_config(const NetworkSection& net, std::uint64_t seed,
                                std::size_t n_samples) {
  NetworkConfig cfg;
  cfg.input_dim = net.input_dim;
  cfg.widths = net.widths;
  cfg.layer_priors = net.priors;
  cfg.activation = net.activation;
  cfg.n_samples = n_samples;
  cfg.seed = seed;
  cfg.input_seed = net.input_seed.value_or(seed);
  cfg.tracked_unit = net.tracked_unit - 1;
  cfg.pool_units = net.pool_units;
  return cfg;
}

}  // namespace gwt::cli
