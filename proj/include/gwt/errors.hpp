#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gwt {

/// Invalid distribution, network or window parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (negative value
/// where a non-negative one is required, empty sample, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Not enough usable points for a tail fit or a conditioning cell.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The log-log fit produced a non-positive slope: the tail is bounded or
/// too irregular for a Weibull-tail reading.
class DegenerateTailError : public std::runtime_error {
 public:
  explicit DegenerateTailError(const std::string& what, double slope)
      : std::runtime_error(what), slope_(slope) {}
  double slope() const noexcept { return slope_; }

 private:
  double slope_;
};

/// A non-finite value appeared during a forward pass.
class OverflowError : public std::overflow_error {
 public:
  OverflowError(const std::string& what, std::size_t layer, std::size_t replicate)
      : std::overflow_error(what), layer_(layer), replicate_(replicate) {}
  /// 1-based layer index.
  std::size_t layer() const noexcept { return layer_; }
  std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t layer_;
  std::size_t replicate_;
};

}  // namespace gwt
