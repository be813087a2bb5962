#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwt/rng.hpp"

namespace gwt {

enum class Family {
  gaussian,
  laplace,
  weibull,
  generalized_gaussian,
  oscillating_gwt,
  student_t,
  point_mass,
};

enum class Support { real_line, nonneg };

enum class TailKind { WT_real, GWT_real, GWT_nonneg, power_tail, bounded };

/// Theoretical tail descriptor. `beta` is set exactly for the three
/// Weibull-type kinds.
struct TailClass {
  TailKind kind = TailKind::bounded;
  std::optional<double> beta;
  bool symmetric = false;

  bool has_weibull_tail() const noexcept { return beta.has_value(); }
  friend bool operator==(const TailClass&, const TailClass&) = default;
};

std::string_view to_string(Family f) noexcept;
std::string_view to_string(TailKind k) noexcept;
std::optional<Family> parse_family(std::string_view name) noexcept;

/// A named family with validated parameters.
///
/// Parameter names per family:
///   gaussian              sigma (default 1)
///   laplace               scale (default 1)
///   weibull               shape (required), scale (default 1)
///   generalized_gaussian  shape (required), scale (default 1); density
///                         proportional to exp(-|x/scale|^shape)
///   oscillating_gwt       shape (required, >= 2); survival
///                         exp(-x^shape (1 + cos^2(ln x)))
///   student_t             dof (required)
///   point_mass            value (default 0)
class DistributionSpec {
 public:
  /// Validating constructor used by config parsing. Throws ParameterError
  /// on unknown, missing or out-of-range parameters.
  static DistributionSpec make(Family family, const std::map<std::string, double>& params);

  static DistributionSpec gaussian(double sigma = 1.0);
  static DistributionSpec laplace(double scale = 1.0);
  static DistributionSpec weibull(double shape, double scale = 1.0);
  static DistributionSpec generalized_gaussian(double shape, double scale = 1.0);
  static DistributionSpec oscillating_gwt(double shape);
  static DistributionSpec student_t(double dof);
  static DistributionSpec point_mass(double value);

  Family family() const noexcept { return family_; }
  Support support() const noexcept;
  const std::map<std::string, double>& params() const noexcept { return params_; }
  double param(const std::string& name) const;

  TailClass tail_class() const;
  bool symmetric() const noexcept;
  /// e.g. "generalized_gaussian(scale=1,shape=3)".
  std::string label() const;
  /// Stable 64-bit digest of family and parameters.
  std::uint64_t digest() const noexcept;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

 private:
  DistributionSpec(Family f, std::map<std::string, double> p)
      : family_(f), params_(std::move(p)) {}
  Family family_;
  std::map<std::string, double> params_;
};

std::vector<double> sample_iid(const DistributionSpec& spec, std::size_t n, const RngStream& rng);

/// P(X >= x).
double exact_survival(const DistributionSpec& spec, double x);

/// exp(-x^beta (1 + cos^2(ln x))) for x > 0, 1 otherwise.
double oscillating_survival(double beta, double x);

/// Solves oscillating_survival(beta, x) == u for u in (0, 1] by bisection
/// to an absolute tolerance of 1e-12 in x.
double oscillating_quantile(double beta, double u);

std::vector<double> sample_oscillating_gwt(double beta, std::size_t n, const RngStream& rng);

/// Attaches an independent fair sign to each non-negative sample.
std::vector<double> symmetrize(std::span<const double> samples, const RngStream& rng);

}  // namespace gwt
