#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gwt/closure.hpp"
#include "gwt/cli.hpp"
#include "gwt/errors.hpp"

namespace gwt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t name_key(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return mix64(h);
}

std::uint64_t require_seed(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.seed) return *opts.seed;
  if (cfg.seed) return *cfg.seed;
  throw ConfigError("a seed is required (config 'seed' or --seed)");
}

std::size_t sample_count(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.full) return kFullSamples;
  return cfg.n_samples.value_or(kDeskSamples);
}

fs::path output_dir(const ExperimentConfig* cfg, const RunOptions& opts) {
  if (opts.out_dir) return *opts.out_dir;
  if (cfg && cfg->out_dir) return *cfg->out_dir;
  return "gwt-lab-out";
}

json window_json(const FitWindow& w) {
  return {{"q_lo", w.q_lo}, {"q_hi", w.q_hi}, {"grid_size", w.grid_size},
          {"min_points", w.min_points}};
}

json estimate_json(const TailEstimate& e) {
  return {{"beta_hat", e.beta_hat},         {"intercept", e.intercept},
          {"stderr_slope", e.stderr_slope}, {"fit_points", e.fit_points},
          {"x_range", {e.x_lo, e.x_hi}}};
}

json tail_class_json(const TailClass& tc) {
  json j = {{"kind", std::string(to_string(tc.kind))}, {"symmetric", tc.symmetric}};
  j["beta"] = tc.beta ? json(*tc.beta) : json(nullptr);
  return j;
}

json pd_json(const PDEstimate& pd) {
  return {{"c_hat", pd.c_hat},
          {"side", std::string(to_string(pd.side))},
          {"z_grid", pd.z_grid},
          {"per_z_conditional", pd.per_z_conditional},
          {"cell_counts", pd.cell_counts},
          {"min_cell_count", pd.min_cell_count}};
}

json network_json(const NetworkConfig& net) {
  json priors = json::array();
  for (const auto& p : net.layer_priors)
    priors.push_back({{"family", std::string(to_string(p.family))},
                      {"beta_w", p.beta_w},
                      {"scale_policy", std::string(to_string(p.scale_policy))},
                      {"scale_multiplier", p.scale_multiplier}});
  return {{"input_dim", net.input_dim},
          {"widths", net.widths},
          {"activation", std::string(to_string(net.activation))},
          {"priors", priors},
          {"input_seed", net.input_seed},
          {"tracked_unit", net.tracked_unit + 1},
          {"pool_units", net.pool_units}};
}

void append_curve(std::vector<CurveRow>& curves, const std::string& label,
                  const std::vector<LogLogPoint>& pts) {
  for (const auto& p : pts) curves.push_back({label, p.log_x, p.log_neg_log_survival});
}

json run_info(double seconds, std::size_t workers) {
  return {{"runtime_seconds", seconds}, {"workers", workers}};
}

// Maps library errors onto the exit-status contract.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const OverflowError& e) {
    err << "overflow: " << e.what() << '\n';
    return kOverflow;
  } catch (const InsufficientDataError& e) {
    err << "insufficient data: " << e.what() << '\n';
    return kInsufficientData;
  } catch (const DegenerateTailError& e) {
    err << "degenerate tail: " << e.what() << '\n';
    return kInsufficientData;
  } catch (const DomainError& e) {
    err << "insufficient data: " << e.what() << '\n';
    return kInsufficientData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

// ---------------------------------------------------------------------------
// closure suite

struct SuiteContext {
  std::uint64_t seed;
  std::size_t n;
  FitWindow window;
  std::size_t workers;
  json items = json::array();
  std::vector<CurveRow> curves;

  RngStream stream(std::string_view name) const { return {seed, name_key(name)}; }
  // Checks whose cells or tails need at least 1e6 draws to resolve.
  std::size_t pd_n() const { return std::max(n, kFullSamples); }

  void add(const std::string& name, const std::string& suite, bool pass, json details) {
    details["name"] = name;
    details["suite"] = suite;
    details["verdict"] = pass ? "pass" : "fail";
    items.push_back(std::move(details));
  }
};

json report_json(const ClosureReport& r) {
  json inputs = json::array();
  for (std::size_t i = 0; i < r.inputs.size(); ++i) {
    json tc = tail_class_json(r.inputs[i]);
    if (i < r.input_labels.size()) tc["label"] = r.input_labels[i];
    inputs.push_back(tc);
  }
  return {{"rule", std::string(to_string(r.rule))},
          {"inputs", inputs},
          {"side", std::string(to_string(r.side))},
          {"predicted_beta", r.predicted_beta},
          {"estimate", estimate_json(r.estimated)},
          {"tolerance", r.tolerance},
          {"rule_verdict", r.pass ? "pass" : "fail"}};
}

double joint_stderr(const TailEstimate& a, const TailEstimate& b) {
  return std::hypot(a.stderr_slope, b.stderr_slope);
}

void rule_item(SuiteContext& ctx, const std::string& name, const std::string& suite,
               const ClosureReport& r) {
  append_curve(ctx.curves, name, r.points);
  ctx.add(name, suite, r.pass, report_json(r));
}

void run_sum_suite(SuiteContext& ctx) {
  const auto g = DistributionSpec::gaussian();
  const auto l = DistributionSpec::laplace();
  const RngStream rs = ctx.stream("sum");

  const std::vector<DistributionSpec> gl = {g, l}, lg = {l, g};
  const auto r1 = check_sum_rule(gl, ctx.n, ctx.window, rs);
  rule_item(ctx, "sum_gaussian_laplace", "sum", r1);
  const auto r2 = check_sum_rule(lg, ctx.n, ctx.window, rs);
  const double diff = std::abs(r1.estimated.beta_hat - r2.estimated.beta_hat);
  json d = report_json(r2);
  d["beta_hat_difference"] = diff;
  d["joint_stderr"] = joint_stderr(r1.estimated, r2.estimated);
  ctx.add("sum_permuted_laplace_gaussian", "sum",
          r2.pass == r1.pass && diff <= 2.0 * joint_stderr(r1.estimated, r2.estimated), d);

  // Point mass at 0 is the identity: the estimate must match X alone.
  const std::vector<DistributionSpec> g0 = {g, DistributionSpec::point_mass(0.0)}, g_only = {g};
  const auto with_zero = check_sum_rule(g0, ctx.n, ctx.window, rs);
  const auto alone = check_sum_rule(g_only, ctx.n, ctx.window, rs);
  json dz = report_json(with_zero);
  dz["beta_hat_without_identity"] = alone.estimated.beta_hat;
  ctx.add("sum_identity_point_mass_zero", "sum",
          std::abs(with_zero.estimated.beta_hat - alone.estimated.beta_hat) <= with_zero.tolerance,
          dz);

  const std::vector<DistributionSpec> three = {DistributionSpec::generalized_gaussian(2.0),
                                               DistributionSpec::generalized_gaussian(1.5),
                                               DistributionSpec::generalized_gaussian(3.0)};
  const auto r3 = check_sum_rule(three, ctx.n, ctx.window, rs);
  rule_item(ctx, "sum_three_generalized_gaussians", "sum", r3);
  const std::vector<DistributionSpec> three_perm = {three[2], three[0], three[1]};
  const auto r4 = check_sum_rule(three_perm, ctx.n, ctx.window, rs);
  json dp = report_json(r4);
  dp["beta_hat_difference"] = std::abs(r3.estimated.beta_hat - r4.estimated.beta_hat);
  ctx.add("sum_three_generalized_gaussians_permuted", "sum", r4.pass == r3.pass, dp);
}

void run_product_suite(SuiteContext& ctx) {
  const auto g = DistributionSpec::gaussian();
  const auto l = DistributionSpec::laplace();
  const RngStream rs = ctx.stream("product");

  rule_item(ctx, "product_gaussian_gaussian", "product",
            check_product_rule(g, g, ctx.n, ctx.window, rs));
  const auto gl = check_product_rule(g, l, ctx.n, ctx.window, rs);
  rule_item(ctx, "product_gaussian_laplace", "product", gl);
  const auto lg = check_product_rule(l, g, ctx.n, ctx.window, rs);
  json d = report_json(lg);
  const double diff = std::abs(gl.estimated.beta_hat - lg.estimated.beta_hat);
  d["beta_hat_difference"] = diff;
  d["joint_stderr"] = joint_stderr(gl.estimated, lg.estimated);
  ctx.add("product_commuted_laplace_gaussian", "product",
          lg.predicted_beta == gl.predicted_beta &&
              diff <= 2.0 * joint_stderr(gl.estimated, lg.estimated),
          d);

  // X * 1 on the absolute side is |X|.
  const auto unit = check_product_rule(g, DistributionSpec::point_mass(1.0), ctx.n, ctx.window, rs);
  const auto x = sample_iid(g, ctx.n, rs.substream(g.digest()).substream(0));
  const auto alone = estimate_tail_index(EmpiricalTail(x, Side::absolute), ctx.window);
  json du = report_json(unit);
  du["beta_hat_without_identity"] = alone.beta_hat;
  ctx.add("product_identity_point_mass_one", "product",
          std::abs(unit.estimated.beta_hat - alone.beta_hat) <= unit.tolerance, du);
}

void run_power_suite(SuiteContext& ctx) {
  const auto g = DistributionSpec::gaussian();
  const RngStream rs = ctx.stream("power");
  rule_item(ctx, "power_gaussian_squared", "power", check_power_rule(g, 1.0, 2.0, ctx.n, ctx.window, rs));

  const auto base = check_power_rule(g, 1.0, 1.0, ctx.n, ctx.window, rs);
  const auto scaled = check_power_rule(g, 3.0, 1.0, ctx.n, ctx.window, rs);
  json d = report_json(scaled);
  const double diff = std::abs(base.estimated.beta_hat - scaled.estimated.beta_hat);
  d["beta_hat_unscaled"] = base.estimated.beta_hat;
  d["beta_hat_difference"] = diff;
  append_curve(ctx.curves, "power_gaussian_scaled_by_3", scaled.points);
  ctx.add("power_gaussian_scaled_by_3", "power",
          diff < 2.0 * joint_stderr(base.estimated, scaled.estimated) || diff == 0.0, d);

  rule_item(ctx, "power_laplace_sqrt", "power",
            check_power_rule(DistributionSpec::laplace(), 1.0, 0.5, ctx.n, ctx.window, rs));
}

NetworkConfig pd_network(std::size_t width, std::size_t n, std::uint64_t seed) {
  NetworkConfig net;
  net.input_dim = 10;
  net.widths = {width, 1};
  net.layer_priors = {LayerPrior::gaussian(), LayerPrior::gaussian()};
  net.activation = Activation::relu;
  net.n_samples = n;
  net.seed = seed;
  net.input_seed = seed;
  return net;
}

void run_pd_suite(SuiteContext& ctx) {
  const auto g = DistributionSpec::gaussian();
  const std::size_t n = ctx.pd_n();
  for (std::size_t cols : {2u, 3u}) {
    const auto joint = independent_columns(g, n, cols, ctx.stream("pd_independent"));
    const double target = std::pow(0.5, static_cast<double>(cols - 1));
    const auto right = estimate_pd_constant(joint, cols - 1, Side::right);
    const auto left = estimate_pd_constant(joint, cols - 1, Side::left);
    ctx.add("pd_independent_N" + std::to_string(cols), "pd",
            std::abs(right.c_hat - target) <= 0.05 && std::abs(left.c_hat - target) <= 0.05,
            {{"expected_c", target}, {"right", pd_json(right)}, {"left", pd_json(left)}});
  }
  {
    const auto joint = counter_monotone_pair(g, n, ctx.stream("pd_counter_monotone"));
    const auto pd = estimate_pd_constant(joint, 1, Side::right);
    ctx.add("pd_counter_monotone", "pd", pd.c_hat <= 0.05,
            {{"control", "expected-fail-of-PD"}, {"right", pd_json(pd)}});
  }
  for (std::size_t width : {2u, 3u, 4u}) {
    const auto net = pd_network(width, n, ctx.stream("pd_bnn").substream(width).stream_id);
    const auto joint = sample_layer_summands(net, 2, 0, ctx.workers);
    const double bound = std::pow(0.5, static_cast<double>(width - 1)) - 0.05;
    const auto right = estimate_pd_constant(joint, width - 1, Side::right);
    const auto left = estimate_pd_constant(joint, width - 1, Side::left);
    ctx.add("pd_bnn_weight_unit_products_N" + std::to_string(width), "pd",
            right.c_hat >= bound && left.c_hat >= bound,
            {{"lower_bound", bound}, {"right", pd_json(right)}, {"left", pd_json(left)}});
  }
}

void run_negatives_suite(SuiteContext& ctx) {
  const auto g = DistributionSpec::gaussian();
  {
    const auto rep = negative_control_truncation(g, 1.0, ctx.pd_n(), ctx.stream("truncation"), ctx.window);
    ctx.add("truncation_m1", "negatives",
            rep.within_bounds && rep.degenerate_beyond_bound && rep.pd.c_hat <= 0.05,
            {{"m", rep.m},
             {"max_abs_sum", rep.max_abs_sum},
             {"survival_beyond_2m", rep.survival_beyond_bound},
             {"pd", pd_json(rep.pd)}});
  }
  {
    const RngStream rs = ctx.stream("truncation_wide");
    const auto x = sample_iid(g, ctx.n, rs);
    std::vector<double> sum(x.size());
    double max_abs_x = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      max_abs_x = std::max(max_abs_x, std::abs(x[i]));
      sum[i] = x[i] + (std::abs(x[i]) <= 10.0 ? x[i] : -x[i]);
    }
    const auto est_sum = estimate_tail_index(EmpiricalTail(sum), ctx.window);
    const auto est_x = estimate_tail_index(EmpiricalTail(x), ctx.window);
    const double band = ClosureTolerance{}.band(est_x.beta_hat, est_x.stderr_slope);
    ctx.add("truncation_m10_inactive_on_window", "negatives",
            std::abs(est_sum.beta_hat - est_x.beta_hat) <= band,
            {{"m", 10.0},
             {"max_abs_x", max_abs_x},
             {"estimate_sum", estimate_json(est_sum)},
             {"estimate_x", estimate_json(est_x)}});
  }
  {
    const auto t = sample_iid(DistributionSpec::student_t(3.0), ctx.pd_n(), ctx.stream("student_t"));
    const EmpiricalTail tail(t);
    json tried = json::array();
    bool all_fail = true;
    for (double beta : {0.5, 1.0, 2.0}) {
      const auto chk = check_subweibull_envelope(tail, 1.0 / beta, ctx.window);
      all_fail = all_fail && !chk.holds;
      tried.push_back({{"beta", beta}, {"holds", chk.holds}, {"a", chk.a}, {"b", chk.b},
                       {"worst_ratio", chk.worst_ratio}});
    }
    ctx.add("student_t_rejects_weibull_envelopes", "negatives", all_fail,
            {{"dof", 3.0}, {"envelopes", tried}});
  }
  {
    NetworkConfig net;
    net.input_dim = 100;
    net.widths = {4, 4, 4};
    net.layer_priors.assign(3, LayerPrior::gaussian());
    net.activation = Activation::tanh;
    net.n_samples = ctx.n;
    net.seed = ctx.stream("tanh").stream_id;
    net.input_seed = net.seed;
    const auto trace = run_prior_monte_carlo(net, ctx.workers);
    json layers = json::array();
    bool ok = true;
    for (std::size_t l = 1; l < trace.depth(); ++l) {
      json entry = {{"layer", l + 1}};
      try {
        const auto est = estimate_tail_index(EmpiricalTail(trace.post[l]), ctx.window);
        const bool credible = credible_weibull_fit(est);
        ok = ok && !credible;
        entry["estimate"] = estimate_json(est);
        entry["credible_weibull_fit"] = credible;
      } catch (const DegenerateTailError& e) {
        entry["error"] = e.what();
      } catch (const InsufficientDataError& e) {
        entry["error"] = e.what();
      }
      layers.push_back(entry);
    }
    ctx.add("tanh_post_activations_bounded", "negatives", ok,
            {{"stderr_threshold", kCredibleFitStderr}, {"layers", layers}});
  }
  {
    const auto x = sample_oscillating_gwt(2.0, ctx.n, ctx.stream("oscillating"));
    const EmpiricalTail tail(x);
    const auto at2 = check_gwt_envelope(tail, 2.0, 2.0, 1.0, ctx.window);
    const auto at15 = check_gwt_envelope(tail, 1.5, 2.0, 1.0, ctx.window);
    const auto at25 = check_gwt_envelope(tail, 2.5, 2.0, 1.0, ctx.window);
    auto env_json = [](const GwtEnvelopeCheck& c) {
      return json{{"holds", c.holds},
                  {"lower_violations", c.lower_violations},
                  {"upper_violations", c.upper_violations},
                  {"checked_points", c.checked_points}};
    };
    ctx.add("oscillating_gwt_envelopes", "negatives", at2.holds && !at15.holds && !at25.holds,
            {{"beta_2", env_json(at2)}, {"beta_1.5", env_json(at15)}, {"beta_2.5", env_json(at25)}});
  }
}

}  // namespace

int cmd_bnn_experiment(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out,
                       std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    if (!config.network) throw ConfigError("bnn: config needs a 'network' section");
    const std::uint64_t seed = require_seed(config, opts);
    const NetworkConfig net = to_network_config(*config.network, seed, sample_count(config, opts));
    const std::size_t workers = resolve_worker_count(opts.workers);
    const UnitTrace trace = run_prior_monte_carlo(net, workers);

    json layers = json::array();
    std::vector<CurveRow> curves;
    const bool predictable = net.activation != Activation::tanh;
    std::ostringstream table;
    table << "layer  predicted  beta_hat   stderr     within\n";
    for (std::size_t l = 0; l < trace.depth(); ++l) {
      const std::string label = "layer_" + std::to_string(l + 1);
      const auto pts = loglog_points(EmpiricalTail(trace.pre[l], Side::right), config.fit_window);
      const auto est = fit_loglog(pts, config.fit_window.min_points);
      append_curve(curves, label, pts);
      json entry = {{"layer", l + 1}, {"label", label}, {"estimate", estimate_json(est)}};
      table << std::setw(5) << l + 1 << "  ";
      if (predictable) {
        const double pred = predicted_tail_parameter(net.layer_priors, l + 1);
        const double band = ClosureTolerance{}.band(pred, est.stderr_slope);
        const bool within = std::abs(est.beta_hat - pred) <= band;
        entry["predicted_beta"] = pred;
        entry["tolerance"] = band;
        entry["within_tolerance"] = within;
        table << std::setw(9) << std::fixed << std::setprecision(4) << pred << "  ";
      } else {
        entry["predicted_beta"] = nullptr;
        table << std::setw(9) << "-" << "  ";
      }
      table << std::setw(9) << std::fixed << std::setprecision(4) << est.beta_hat << "  "
            << std::setw(9) << std::setprecision(5) << est.stderr_slope << "  "
            << (predictable ? (entry["within_tolerance"].get<bool>() ? "yes" : "no") : "-")
            << '\n';
      layers.push_back(entry);
    }

    json summary = {{"command", "bnn"},
                    {"seed", seed},
                    {"n_samples", net.n_samples},
                    {"network", network_json(net)},
                    {"fit_window", window_json(config.fit_window)},
                    {"side", "right"},
                    {"analyzed", "pre_activation"},
                    {"degenerate_input", trace.degenerate_input},
                    {"dropped_overflow", trace.dropped_overflow},
                    {"samples_dependent", trace.pooled},
                    {"layers", layers}};
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    write_bundle(output_dir(&config, opts), summary, curves, run_info(secs, workers));
    out << table.str();
    return kOk;
  });
}

int cmd_estimate_tail(const std::optional<ExperimentConfig>& config, std::istream* samples,
                      const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    const FitWindow window = config ? config->fit_window : FitWindow{};
    const Side side = config ? config->side : Side::right;
    std::vector<double> data;
    json source;
    if (config && config->distribution) {
      const std::uint64_t seed = require_seed(*config, opts);
      const std::size_t n = sample_count(*config, opts);
      data = sample_iid(*config->distribution, n, RngStream{seed, 0});
      source = {{"type", "distribution"},
                {"distribution", config->distribution->label()},
                {"seed", seed}};
    } else {
      if (samples == nullptr) throw ConfigError("estimate: no samples and no distribution");
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(*samples, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string_view field(line.data() + first, last - first + 1);
        double v = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v))
          throw ConfigError("line " + std::to_string(line_no) + ": cannot parse sample '" +
                            std::string(field) + "'");
        data.push_back(v);
      }
      if (data.empty()) throw InsufficientDataError("no samples on input");
      source = {{"type", "samples"}};
    }
    const auto pts = loglog_points(EmpiricalTail(data, side), window);
    const auto est = fit_loglog(pts, window.min_points);
    std::vector<CurveRow> curves;
    append_curve(curves, "estimate", pts);
    json summary = {{"command", "estimate"},
                    {"source", source},
                    {"n_samples", data.size()},
                    {"side", std::string(to_string(side))},
                    {"fit_window", window_json(window)},
                    {"estimate", estimate_json(est)}};
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    write_bundle(output_dir(config ? &*config : nullptr, opts), summary, curves, run_info(secs, 1));
    out << "beta_hat " << std::setprecision(6) << est.beta_hat << " stderr "
        << est.stderr_slope << " points " << est.fit_points << '\n';
    return kOk;
  });
}

int cmd_closure_suite(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out,
                      std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    if (!config.suite) throw ConfigError("closure: config needs 'suite'");
    const std::string suite = *config.suite;
    static const std::vector<std::string> known = {"sum", "product", "power", "pd", "negatives", "all"};
    if (std::find(known.begin(), known.end(), suite) == known.end())
      throw ConfigError("closure: unknown suite '" + suite + "'");
    SuiteContext ctx;
    ctx.seed = require_seed(config, opts);
    ctx.n = sample_count(config, opts);
    ctx.window = config.fit_window;
    ctx.workers = resolve_worker_count(opts.workers);
    const bool all = suite == "all";
    if (all || suite == "sum") run_sum_suite(ctx);
    if (all || suite == "product") run_product_suite(ctx);
    if (all || suite == "power") run_power_suite(ctx);
    if (all || suite == "pd") run_pd_suite(ctx);
    if (all || suite == "negatives") run_negatives_suite(ctx);

    bool all_pass = true;
    for (const auto& item : ctx.items) {
      const bool pass = item["verdict"] == "pass";
      all_pass = all_pass && pass;
      out << (pass ? "PASS " : "FAIL ") << item["name"].get<std::string>() << '\n';
    }
    json summary = {{"command", "closure"},
                    {"suite", suite},
                    {"seed", ctx.seed},
                    {"n_samples", ctx.n},
                    {"fit_window", window_json(ctx.window)},
                    {"all_pass", all_pass},
                    {"checks", ctx.items}};
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    write_bundle(output_dir(&config, opts), summary, ctx.curves, run_info(secs, ctx.workers));
    return all_pass ? kOk : kCheckFailed;
  });
}

int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"gwt-lab: Weibull-tail analysis of Bayesian neural network priors"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::string input_path;
  bool full = false;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON experiment config");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--full", full, "use 1e6 samples");
    sub->add_option("--seed", seed, "override the config seed");
  };
  auto* bnn = app.add_subcommand("bnn", "network prior Monte Carlo and per-layer tail fits");
  add_common(bnn, true);
  auto* estimate = app.add_subcommand("estimate", "tail index of samples or a distribution");
  add_common(estimate, false);
  estimate->add_option("--input", input_path, "newline-delimited samples ('-' for stdin)");
  auto* closure = app.add_subcommand("closure", "closure-rule property suites");
  add_common(closure, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kConfigError;
  }

  RunOptions opts;
  opts.full = full;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  CLI::App* active = app.get_subcommands().front();
  if (active->count("--seed") > 0) opts.seed = seed;

  std::optional<ExperimentConfig> cfg;
  if (!config_path.empty()) {
    try {
      cfg = load_config(config_path);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kConfigError;
    }
    if (cfg->command && *cfg->command != active->get_name()) {
      err << "config error: config is for '" << *cfg->command << "', not '"
          << active->get_name() << "'\n";
      return kConfigError;
    }
  }

  if (active == bnn) return cmd_bnn_experiment(*cfg, opts, out, err);
  if (active == closure) return cmd_closure_suite(*cfg, opts, out, err);

  if (!input_path.empty() && input_path != "-") {
    std::ifstream file(input_path);
    if (!file) {
      err << "config error: cannot open " << input_path << '\n';
      return kConfigError;
    }
    return cmd_estimate_tail(cfg, &file, opts, out, err);
  }
  return cmd_estimate_tail(cfg, &in, opts, out, err);
}

}  // namespace gwt::cli
