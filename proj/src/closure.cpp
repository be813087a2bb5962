#include "gwt/closure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gwt/errors.hpp"

namespace gwt {

namespace {

// Stream per spec occurrence: the k-th repeat of an identical spec in a
// list gets sub-key k.
std::vector<RngStream> spec_streams(std::span<const DistributionSpec> specs,
                                    const RngStream& rng) {
  std::vector<RngStream> streams;
  streams.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto repeat = static_cast<std::uint64_t>(
        std::count(specs.begin(), specs.begin() + static_cast<std::ptrdiff_t>(i), specs[i]));
    streams.push_back(rng.substream(specs[i].digest()).substream(repeat));
  }
  return streams;
}

ClosureReport finish_report(ClosureReport report, const std::vector<double>& samples,
                            const FitWindow& window, const ClosureTolerance& tol) {
  const EmpiricalTail tail(samples, report.side);
  report.points = loglog_points(tail, window);
  report.estimated = fit_loglog(report.points, window.min_points);
  report.tolerance = tol.band(report.predicted_beta, report.estimated.stderr_slope);
  report.pass = std::abs(report.estimated.beta_hat - report.predicted_beta) <= report.tolerance;
  return report;
}

void require_symmetric_gwt(const DistributionSpec& s, const char* what) {
  const TailClass tc = s.tail_class();
  if (!tc.has_weibull_tail() || !tc.symmetric)
    throw ParameterError(std::string(what) + ": " + s.label() +
                         " is not a symmetric generalized Weibull-tail family");
}

}  // namespace

std::string_view to_string(ClosureRule r) noexcept {
  switch (r) {
    case ClosureRule::sum_min: return "sum_min";
    case ClosureRule::product_harmonic: return "product_harmonic";
    case ClosureRule::power: return "power";
  }
  return "unknown";
}

double ClosureTolerance::band(double predicted, double stderr_slope) const noexcept {
  return std::max(relative * predicted, stderr_multiple * stderr_slope);
}

PDEstimate estimate_pd_constant(const JointSamples& joint, std::size_t conditioning_index,
                                Side side, std::span<const double> z_quantiles,
                                std::size_t min_cell_count) {
  if (side == Side::absolute) throw ParameterError("PD condition is defined for right or left");
  if (joint.rows() < 100000) throw InsufficientDataError("PD estimate needs at least 1e5 joint draws");
  if (joint.cols() < 2) throw ParameterError("PD estimate needs at least two coordinates");
  if (conditioning_index >= joint.cols()) throw ParameterError("conditioning index out of range");
  if (z_quantiles.empty()) throw ParameterError("PD estimate needs a z grid");
  for (double q : z_quantiles)
    if (!(q >= 0.5 && q <= 0.9999)) throw ParameterError("PD quantiles must lie in [0.5, 0.9999]");

  const bool right = side == Side::right;
  const EmpiricalTail cond(joint.column(conditioning_index), Side::right);

  PDEstimate est;
  est.side = side;
  est.min_cell_count = min_cell_count;
  est.c_hat = 1.0;
  for (double q : z_quantiles) {
    const double z = cond.quantile(right ? q : 1.0 - q);
    std::size_t events = 0, hits = 0;
    for (std::size_t r = 0; r < joint.rows(); ++r) {
      const auto row = joint.row(r);
      const double xk = row[conditioning_index];
      if (right ? !(xk >= z) : !(xk <= z)) continue;
      ++events;
      bool all = true;
      for (std::size_t c = 0; c < row.size() && all; ++c) {
        if (c == conditioning_index) continue;
        all = right ? row[c] >= 0.0 : row[c] <= 0.0;
      }
      hits += all ? 1 : 0;
    }
    if (events < min_cell_count)
      throw InsufficientDataError("PD cell at quantile " + std::to_string(q) + " holds " +
                                  std::to_string(events) + " events, need " +
                                  std::to_string(min_cell_count));
    const double p = static_cast<double>(hits) / static_cast<double>(events);
    est.z_grid.push_back(z);
    est.per_z_conditional.push_back(p);
    est.cell_counts.push_back(events);
    est.c_hat = std::min(est.c_hat, p);
  }
  return est;
}

ClosureReport check_sum_rule(std::span<const DistributionSpec> specs, std::size_t n,
                             const FitWindow& window, const RngStream& rng,
                             const ClosureTolerance& tol) {
  if (specs.empty()) throw ParameterError("sum rule needs at least one addend");
  ClosureReport report;
  report.rule = ClosureRule::sum_min;
  report.side = Side::right;
  std::optional<double> min_beta;
  for (const auto& s : specs) {
    const TailClass tc = s.tail_class();
    if (tc.kind == TailKind::power_tail)
      throw ParameterError("sum rule: " + s.label() + " is not generalized Weibull-tail");
    if (tc.beta) min_beta = std::min(min_beta.value_or(*tc.beta), *tc.beta);
    report.inputs.push_back(tc);
    report.input_labels.push_back(s.label());
  }
  if (!min_beta) throw ParameterError("sum rule: no addend has a Weibull-type tail");
  report.predicted_beta = *min_beta;

  const auto streams = spec_streams(specs, rng);
  std::vector<std::size_t> order(specs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return streams[a].stream_id < streams[b].stream_id;
  });

  std::vector<double> total(n, 0.0);
  for (std::size_t k : order) {
    const auto draws = sample_iid(specs[k], n, streams[k]);
    for (std::size_t i = 0; i < n; ++i) total[i] += draws[i];
  }
  return finish_report(std::move(report), total, window, tol);
}

ClosureReport check_product_rule(const DistributionSpec& spec_x, const DistributionSpec& spec_y,
                                 std::size_t n, const FitWindow& window, const RngStream& rng,
                                 const ClosureTolerance& tol) {
  ClosureReport report;
  report.rule = ClosureRule::product_harmonic;
  report.side = Side::absolute;
  double inv_beta = 0.0;
  for (const DistributionSpec* s : {&spec_x, &spec_y}) {
    if (s->family() == Family::point_mass) {
      if (s->param("value") == 0.0)
        throw ParameterError("product rule: point mass at 0 annihilates the product");
    } else {
      require_symmetric_gwt(*s, "product rule");
      inv_beta += 1.0 / *s->tail_class().beta;
    }
    report.inputs.push_back(s->tail_class());
    report.input_labels.push_back(s->label());
  }
  if (inv_beta == 0.0) throw ParameterError("product rule: both factors are point masses");
  report.predicted_beta = 1.0 / inv_beta;

  const std::vector<DistributionSpec> pair = {spec_x, spec_y};
  const auto streams = spec_streams(pair, rng);
  const auto x = sample_iid(spec_x, n, streams[0]);
  const auto y = sample_iid(spec_y, n, streams[1]);
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = x[i] * y[i];
  return finish_report(std::move(report), prod, window, tol);
}

ClosureReport check_power_rule(const DistributionSpec& spec, double a, double b, std::size_t n,
                               const FitWindow& window, const RngStream& rng,
                               const ClosureTolerance& tol) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw ParameterError("power rule needs a > 0 and b > 0");
  require_symmetric_gwt(spec, "power rule");
  ClosureReport report;
  report.rule = ClosureRule::power;
  report.side = Side::right;
  report.inputs.push_back(spec.tail_class());
  report.input_labels.push_back(spec.label());
  report.predicted_beta = *spec.tail_class().beta / b;

  auto samples = sample_iid(spec, n, rng.substream(spec.digest()));
  for (double& v : samples) v = a * std::pow(std::abs(v), b);
  return finish_report(std::move(report), samples, window, tol);
}

ClosureReport check_sum_of_joint(const JointSamples& joint, std::vector<TailClass> inputs,
                                 const FitWindow& window, const ClosureTolerance& tol) {
  if (inputs.size() != joint.cols())
    throw ParameterError("joint sum: one tail class per column required");
  ClosureReport report;
  report.rule = ClosureRule::sum_min;
  report.side = Side::right;
  std::optional<double> min_beta;
  for (const auto& tc : inputs)
    if (tc.beta) min_beta = std::min(min_beta.value_or(*tc.beta), *tc.beta);
  if (!min_beta) throw ParameterError("joint sum: no column has a Weibull-type tail");
  report.predicted_beta = *min_beta;
  report.inputs = std::move(inputs);
  std::vector<double> total(joint.rows(), 0.0);
  for (std::size_t r = 0; r < joint.rows(); ++r)
    for (double v : joint.row(r)) total[r] += v;
  return finish_report(std::move(report), total, window, tol);
}

TruncationReport negative_control_truncation(const DistributionSpec& spec, double m,
                                             std::size_t n, const RngStream& rng,
                                             const FitWindow& window) {
  if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("truncation level m must be > 0");
  const auto x = sample_iid(spec, n, rng.substream(spec.digest()));
  JointSamples xy(n, 2);
  std::vector<double> abs_sum(n);
  TruncationReport rep;
  rep.m = m;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::abs(x[i]) <= m ? x[i] : -x[i];
    xy(i, 0) = x[i];
    xy(i, 1) = y;
    abs_sum[i] = std::abs(x[i] + y);
    rep.max_abs_sum = std::max(rep.max_abs_sum, abs_sum[i]);
  }
  rep.within_bounds = rep.max_abs_sum <= 2.0 * m;
  const auto beyond = std::count_if(abs_sum.begin(), abs_sum.end(),
                                    [m](double v) { return v > 2.0 * m; });
  rep.survival_beyond_bound = n == 0 ? 0.0 : static_cast<double>(beyond) / static_cast<double>(n);
  rep.degenerate_beyond_bound = beyond == 0;
  rep.pd = estimate_pd_constant(xy, 1, Side::right);
  try {
    rep.estimate_below_bound = estimate_tail_index(EmpiricalTail(abs_sum, Side::right), window);
  } catch (const std::exception& e) {
    rep.estimate_error = e.what();
  }
  return rep;
}

JointSamples counter_monotone_pair(const DistributionSpec& spec, std::size_t n,
                                   const RngStream& rng) {
  const auto x = sample_iid(spec, n, rng);
  JointSamples out(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, 0) = x[i];
    out(i, 1) = -x[i];
  }
  return out;
}

JointSamples independent_columns(const DistributionSpec& spec, std::size_t n, std::size_t cols,
                                 const RngStream& rng) {
  JointSamples out(n, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto col = sample_iid(spec, n, rng.substream(c));
    for (std::size_t r = 0; r < n; ++r) out(r, c) = col[r];
  }
  return out;
}

}  // namespace gwt
