#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gwt/distributions.hpp"
#include "gwt/errors.hpp"
#include "oracle.hpp"

using namespace gwt;

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DistributionSpec::gaussian(0.0), ParameterError);
  CHECK_THROWS_AS(DistributionSpec::gaussian(-1.0), ParameterError);
  CHECK_THROWS_AS(DistributionSpec::laplace(std::nan("")), ParameterError);
  CHECK_THROWS_AS(DistributionSpec::weibull(0.0), ParameterError);
  CHECK_THROWS_AS(DistributionSpec::student_t(0.0), ParameterError);
  CHECK_THROWS_AS(DistributionSpec::oscillating_gwt(1.5), ParameterError);
  CHECK_THROWS_AS(DistributionSpec::make(Family::gaussian, {{"sgima", 1.0}}), ParameterError);
  CHECK_NOTHROW(DistributionSpec::point_mass(-3.0));
  CHECK(DistributionSpec::make(Family::gaussian, {}) == DistributionSpec::gaussian());
}

TEST_CASE("tail classes") {
  auto wt = [](const DistributionSpec& s, double beta) {
    const auto tc = s.tail_class();
    CHECK(tc.kind == TailKind::WT_real);
    REQUIRE(tc.beta);
    CHECK(*tc.beta == beta);
    CHECK(tc.symmetric);
  };
  wt(DistributionSpec::gaussian(3.0), 2.0);
  wt(DistributionSpec::laplace(0.5), 1.0);
  wt(DistributionSpec::generalized_gaussian(3.0), 3.0);

  const auto w = DistributionSpec::weibull(0.7).tail_class();
  CHECK(w.kind == TailKind::GWT_nonneg);
  CHECK(*w.beta == 0.7);
  CHECK(DistributionSpec::oscillating_gwt(2.0).tail_class().kind == TailKind::GWT_nonneg);
  CHECK(DistributionSpec::student_t(3.0).tail_class().kind == TailKind::power_tail);
  CHECK_FALSE(DistributionSpec::student_t(3.0).tail_class().beta);
  CHECK(DistributionSpec::point_mass(0.0).tail_class().kind == TailKind::bounded);
  CHECK(DistributionSpec::weibull(2.0).support() == Support::nonneg);
}

TEST_CASE("exact survival reference values") {
  CHECK(exact_survival(DistributionSpec::gaussian(), 1.96) ==
        doctest::Approx(0.0249978951482204341).epsilon(1e-12));
  CHECK(exact_survival(DistributionSpec::generalized_gaussian(3.0), 1.5) ==
        doctest::Approx(0.00244254720246137238).epsilon(1e-10));
  CHECK(exact_survival(DistributionSpec::student_t(3.0), 2.0) ==
        doctest::Approx(0.0696629842794215884).epsilon(1e-10));
  CHECK(exact_survival(DistributionSpec::laplace(2.0), 3.0) ==
        doctest::Approx(0.5 * std::exp(-1.5)).epsilon(1e-14));
  CHECK(exact_survival(DistributionSpec::laplace(), -1.0) ==
        doctest::Approx(1.0 - 0.5 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(exact_survival(DistributionSpec::weibull(2.0, 3.0), 2.0) ==
        doctest::Approx(std::exp(-4.0 / 9.0)).epsilon(1e-14));
  CHECK(exact_survival(DistributionSpec::point_mass(1.0), 1.0) == 1.0);
  CHECK(exact_survival(DistributionSpec::point_mass(1.0), 1.0 + 1e-12) == 0.0);
}

TEST_CASE("generalized gaussian reduces to gaussian and laplace") {
  oracle::Gen gen(3);
  for (int i = 0; i < 100; ++i) {
    const double x = gen.uniform(-4.0, 6.0);
    CHECK(exact_survival(DistributionSpec::generalized_gaussian(2.0), x) ==
          doctest::Approx(exact_survival(DistributionSpec::gaussian(std::sqrt(0.5)), x)).epsilon(1e-10));
    CHECK(exact_survival(DistributionSpec::generalized_gaussian(1.0), x) ==
          doctest::Approx(exact_survival(DistributionSpec::laplace(), x)).epsilon(1e-10));
  }
}

TEST_CASE("oscillating gwt quantile") {
  // Root of x^3 (1 + cos^2 ln x) = 1.
  CHECK(oscillating_quantile(3.0, std::exp(-1.0)) == doctest::Approx(0.800266856431296925).epsilon(1e-11));
  CHECK(oscillating_quantile(2.0, 1.0) == 0.0);
  CHECK_THROWS_AS(oscillating_quantile(2.0, 0.0), DomainError);
  CHECK_THROWS_AS(oscillating_quantile(1.0, 0.5), ParameterError);

  oracle::Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const double beta = gen.uniform(2.0, 6.0);
    const double u = std::exp(-gen.uniform(1e-3, 40.0));
    const double x = oscillating_quantile(beta, u);
    const double ref = oracle::survival_quantile([&](double t) { return oscillating_survival(beta, t); }, u);
    CHECK(x == doctest::Approx(ref).epsilon(1e-9));
    // survival is monotone for beta >= 2, so the quantile inverts it
    CHECK(oscillating_survival(beta, x) == doctest::Approx(u).epsilon(1e-8));
  }
}

TEST_CASE("oscillating survival is monotone for beta >= 2") {
  for (double beta : {2.0, 2.5, 4.0}) {
    double prev = 1.0;
    for (double x = 1e-3; x < 8.0; x *= 1.01) {
      const double s = oscillating_survival(beta, x);
      REQUIRE(s <= prev);
      prev = s;
    }
  }
}

TEST_CASE("samples follow the exact survival within the DKW band") {
  const std::size_t n = 100000;
  const double eps = oracle::dkw_epsilon(n, 1e-3);
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::gaussian(1.5),           DistributionSpec::laplace(0.7),
      DistributionSpec::weibull(0.5, 2.0),       DistributionSpec::weibull(4.0),
      DistributionSpec::generalized_gaussian(3.0), DistributionSpec::generalized_gaussian(0.8, 2.0),
      DistributionSpec::oscillating_gwt(2.0),    DistributionSpec::student_t(3.0)};
  std::uint64_t stream = 0;
  for (const auto& spec : specs) {
    CAPTURE(spec.label());
    auto xs = sample_iid(spec, n, RngStream{99, stream++});
    REQUIRE(xs.size() == n);
    std::sort(xs.begin(), xs.end());
    double worst = 0.0;
    for (std::size_t k = 0; k < n; k += 97) {
      const double x = xs[k];
      const double emp = static_cast<double>(n - k) / n;  // #{X >= x}/n with no ties
      worst = std::max(worst, std::abs(emp - exact_survival(spec, x)));
    }
    CHECK(worst < eps);
  }
}

TEST_CASE("sampling is deterministic per stream") {
  for (const auto& spec : {DistributionSpec::gaussian(), DistributionSpec::student_t(2.5),
                           DistributionSpec::generalized_gaussian(1.7)}) {
    const auto a = sample_iid(spec, 1000, RngStream{1, 2});
    const auto b = sample_iid(spec, 1000, RngStream{1, 2});
    const auto c = sample_iid(spec, 1000, RngStream{1, 3});
    CHECK(a == b);
    CHECK(a != c);
  }
  const auto pm = sample_iid(DistributionSpec::point_mass(2.5), 10, RngStream{});
  CHECK(std::all_of(pm.begin(), pm.end(), [](double v) { return v == 2.5; }));
}

TEST_CASE("symmetrize attaches a fair random sign") {
  const auto x = sample_iid(DistributionSpec::weibull(1.0), 100000, RngStream{4, 0});
  const auto y = symmetrize(x, RngStream{4, 1});
  REQUIRE(y.size() == x.size());
  std::size_t neg = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    REQUIRE(std::abs(y[i]) == x[i]);
    neg += y[i] < 0;
  }
  // 4 sigma of Binomial(1e5, 1/2)
  CHECK(std::abs(static_cast<double>(neg) - 50000.0) < 4.0 * std::sqrt(25000.0));
  const std::vector<double> bad = {1.0, -0.5};
  CHECK_THROWS_AS(symmetrize(bad, RngStream{}), DomainError);
}

TEST_CASE("digest and label are stable and distinguish specs") {
  CHECK(DistributionSpec::gaussian().digest() == DistributionSpec::gaussian(1.0).digest());
  CHECK(DistributionSpec::gaussian().digest() != DistributionSpec::gaussian(2.0).digest());
  CHECK(DistributionSpec::gaussian().digest() != DistributionSpec::laplace().digest());
  CHECK(DistributionSpec::generalized_gaussian(3.0).label() == "generalized_gaussian(scale=1,shape=3)");
}
