#include "gwt/distributions.hpp"

#include <bit>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "gwt/errors.hpp"

namespace gwt {

namespace {

struct FamilyInfo {
  Family family;
  std::string_view name;
  // parameter name -> default (NaN means required)
  std::map<std::string, double> defaults;
};

const std::vector<FamilyInfo>& family_table() {
  static const std::vector<FamilyInfo> table = {
      {Family::gaussian, "gaussian", {{"sigma", 1.0}}},
      {Family::laplace, "laplace", {{"scale", 1.0}}},
      {Family::weibull, "weibull", {{"shape", NAN}, {"scale", 1.0}}},
      {Family::generalized_gaussian, "generalized_gaussian", {{"shape", NAN}, {"scale", 1.0}}},
      {Family::oscillating_gwt, "oscillating_gwt", {{"shape", NAN}}},
      {Family::student_t, "student_t", {{"dof", NAN}}},
      {Family::point_mass, "point_mass", {{"value", 0.0}}},
  };
  return table;
}

const FamilyInfo& info(Family f) {
  for (const auto& i : family_table())
    if (i.family == f) return i;
  throw ParameterError("unknown family");
}

void require_positive(const std::map<std::string, double>& p, const char* key,
                      std::string_view family) {
  const double v = p.at(key);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(family) + ": parameter '" + key +
                         "' must be finite and > 0");
  }
}

template <class Engine>
double random_sign(Engine& eng) {
  return (eng() >> 63) != 0 ? -1.0 : 1.0;
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  for (const auto& i : family_table())
    if (i.family == f) return i.name;
  return "unknown";
}

std::string_view to_string(TailKind k) noexcept {
  switch (k) {
    case TailKind::WT_real: return "WT_real";
    case TailKind::GWT_real: return "GWT_real";
    case TailKind::GWT_nonneg: return "GWT_nonneg";
    case TailKind::power_tail: return "power_tail";
    case TailKind::bounded: return "bounded";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  for (const auto& i : family_table())
    if (i.name == name) return i.family;
  return std::nullopt;
}

DistributionSpec DistributionSpec::make(Family family,
                                        const std::map<std::string, double>& params) {
  const FamilyInfo& fi = info(family);
  std::map<std::string, double> full = fi.defaults;
  for (const auto& [key, value] : params) {
    if (!fi.defaults.contains(key))
      throw ParameterError(std::string(fi.name) + ": unknown parameter '" + key + "'");
    full[key] = value;
  }
  for (const auto& [key, value] : full) {
    if (std::isnan(value))
      throw ParameterError(std::string(fi.name) + ": missing parameter '" + key + "'");
  }
  switch (family) {
    case Family::gaussian: require_positive(full, "sigma", fi.name); break;
    case Family::laplace: require_positive(full, "scale", fi.name); break;
    case Family::weibull:
    case Family::generalized_gaussian:
      require_positive(full, "shape", fi.name);
      require_positive(full, "scale", fi.name);
      break;
    case Family::oscillating_gwt:
      require_positive(full, "shape", fi.name);
      if (full.at("shape") < 2.0)
        throw ParameterError("oscillating_gwt: shape must be >= 2 for a valid survival function");
      break;
    case Family::student_t: require_positive(full, "dof", fi.name); break;
    case Family::point_mass:
      if (!std::isfinite(full.at("value")))
        throw ParameterError("point_mass: value must be finite");
      break;
  }
  return DistributionSpec(family, std::move(full));
}

DistributionSpec DistributionSpec::gaussian(double sigma) {
  return make(Family::gaussian, {{"sigma", sigma}});
}
DistributionSpec DistributionSpec::laplace(double scale) {
  return make(Family::laplace, {{"scale", scale}});
}
DistributionSpec DistributionSpec::weibull(double shape, double scale) {
  return make(Family::weibull, {{"shape", shape}, {"scale", scale}});
}
DistributionSpec DistributionSpec::generalized_gaussian(double shape, double scale) {
  return make(Family::generalized_gaussian, {{"shape", shape}, {"scale", scale}});
}
DistributionSpec DistributionSpec::oscillating_gwt(double shape) {
  return make(Family::oscillating_gwt, {{"shape", shape}});
}
DistributionSpec DistributionSpec::student_t(double dof) {
  return make(Family::student_t, {{"dof", dof}});
}
DistributionSpec DistributionSpec::point_mass(double value) {
  return make(Family::point_mass, {{"value", value}});
}

Support DistributionSpec::support() const noexcept {
  switch (family_) {
    case Family::weibull:
    case Family::oscillating_gwt: return Support::nonneg;
    case Family::point_mass: return params_.at("value") >= 0.0 ? Support::nonneg : Support::real_line;
    default: return Support::real_line;
  }
}

double DistributionSpec::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw ParameterError(std::string(to_string(family_)) + ": no parameter '" + name + "'");
  return it->second;
}

bool DistributionSpec::symmetric() const noexcept {
  switch (family_) {
    case Family::gaussian:
    case Family::laplace:
    case Family::generalized_gaussian:
    case Family::student_t: return true;
    case Family::point_mass: return params_.at("value") == 0.0;
    default: return false;
  }
}

TailClass DistributionSpec::tail_class() const {
  switch (family_) {
    case Family::gaussian: return {TailKind::WT_real, 2.0, true};
    case Family::laplace: return {TailKind::WT_real, 1.0, true};
    case Family::generalized_gaussian: return {TailKind::WT_real, params_.at("shape"), true};
    case Family::weibull: return {TailKind::GWT_nonneg, params_.at("shape"), false};
    case Family::oscillating_gwt: return {TailKind::GWT_nonneg, params_.at("shape"), false};
    case Family::student_t: return {TailKind::power_tail, std::nullopt, true};
    case Family::point_mass: return {TailKind::bounded, std::nullopt, symmetric()};
  }
  return {};
}

std::string DistributionSpec::label() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(family_) << '(';
  bool first = true;
  for (const auto& [k, v] : params_) {
    if (!first) os << ',';
    os << k << '=' << v;
    first = false;
  }
  os << ')';
  return os.str();
}

std::uint64_t DistributionSpec::digest() const noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(family_) + 1);
  for (const auto& [k, v] : params_) {
    for (char c : k) h = mix64(h ^ static_cast<unsigned char>(c));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

std::vector<double> sample_iid(const DistributionSpec& spec, std::size_t n, const RngStream& rng) {
  std::vector<double> out(n);
  auto eng = rng.engine();
  const auto& p = spec.params();
  switch (spec.family()) {
    case Family::gaussian: {
      boost::random::normal_distribution<double> dist(0.0, p.at("sigma"));
      for (auto& x : out) x = dist(eng);
      break;
    }
    case Family::laplace: {
      boost::random::laplace_distribution<double> dist(0.0, p.at("scale"));
      for (auto& x : out) x = dist(eng);
      break;
    }
    case Family::weibull: {
      const double inv_shape = 1.0 / p.at("shape");
      const double scale = p.at("scale");
      for (auto& x : out) x = scale * std::pow(-std::log(uniform_open01(eng)), inv_shape);
      break;
    }
    case Family::generalized_gaussian: {
      // |X/s|^beta ~ Gamma(1/beta, 1)
      const double inv_shape = 1.0 / p.at("shape");
      const double scale = p.at("scale");
      boost::random::gamma_distribution<double> gamma(inv_shape, 1.0);
      for (auto& x : out) {
        const double g = gamma(eng);
        x = random_sign(eng) * scale * std::pow(g, inv_shape);
      }
      break;
    }
    case Family::oscillating_gwt: {
      const double beta = p.at("shape");
      for (auto& x : out) x = oscillating_quantile(beta, uniform_open01(eng));
      break;
    }
    case Family::student_t: {
      boost::random::student_t_distribution<double> dist(p.at("dof"));
      for (auto& x : out) x = dist(eng);
      break;
    }
    case Family::point_mass: {
      std::fill(out.begin(), out.end(), p.at("value"));
      break;
    }
  }
  return out;
}

double exact_survival(const DistributionSpec& spec, double x) {
  const auto& p = spec.params();
  switch (spec.family()) {
    case Family::gaussian:
      return 0.5 * std::erfc(x / (p.at("sigma") * std::sqrt(2.0)));
    case Family::laplace: {
      const double b = p.at("scale");
      return x >= 0.0 ? 0.5 * std::exp(-x / b) : 1.0 - 0.5 * std::exp(x / b);
    }
    case Family::weibull:
      if (x <= 0.0) return 1.0;
      return std::exp(-std::pow(x / p.at("scale"), p.at("shape")));
    case Family::generalized_gaussian: {
      const double beta = p.at("shape");
      const double s = p.at("scale");
      const double half_tail =
          0.5 * boost::math::gamma_q(1.0 / beta, std::pow(std::abs(x) / s, beta));
      return x >= 0.0 ? half_tail : 1.0 - half_tail;
    }
    case Family::oscillating_gwt:
      return oscillating_survival(p.at("shape"), x);
    case Family::student_t: {
      boost::math::students_t_distribution<double> dist(p.at("dof"));
      return boost::math::cdf(boost::math::complement(dist, x));
    }
    case Family::point_mass:
      return x <= p.at("value") ? 1.0 : 0.0;
  }
  return 0.0;
}

double oscillating_survival(double beta, double x) {
  if (x <= 0.0) return 1.0;
  const double c = std::cos(std::log(x));
  return std::exp(-std::pow(x, beta) * (1.0 + c * c));
}

double oscillating_quantile(double beta, double u) {
  if (!(beta >= 2.0)) throw ParameterError("oscillating_gwt: shape must be >= 2");
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("oscillating_quantile: u must lie in (0, 1]");
  if (u == 1.0) return 0.0;
  // x^beta * l(x) = t with 1 <= l <= 2 brackets the root.
  const double t = -std::log(u);
  double lo = std::pow(t / 2.0, 1.0 / beta);
  double hi = std::pow(t, 1.0 / beta);
  auto exponent = [beta](double x) {
    const double c = std::cos(std::log(x));
    return std::pow(x, beta) * (1.0 + c * c);
  };
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (exponent(mid) < t)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> sample_oscillating_gwt(double beta, std::size_t n, const RngStream& rng) {
  return sample_iid(DistributionSpec::oscillating_gwt(beta), n, rng);
}

std::vector<double> symmetrize(std::span<const double> samples, const RngStream& rng) {
  std::vector<double> out(samples.size());
  auto eng = rng.engine();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] >= 0.0)) throw DomainError("symmetrize: inputs must be non-negative");
    out[i] = random_sign(eng) * samples[i];
  }
  return out;
}

}  // namespace gwt
