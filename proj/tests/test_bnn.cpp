#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "gwt/bnn.hpp"
#include "gwt/errors.hpp"
#include "oracle.hpp"

using namespace gwt;

namespace {

NetworkConfig small_net(Activation act, std::size_t n, std::vector<std::size_t> widths = {4, 4, 4}) {
  NetworkConfig net;
  net.input_dim = 50;
  net.widths = widths;
  net.layer_priors.assign(widths.size(), LayerPrior::gaussian());
  net.activation = act;
  net.n_samples = n;
  net.seed = 17;
  net.input_seed = 3;
  return net;
}

double sq_norm(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

}  // namespace

TEST_CASE("prior validation and scaling") {
  LayerPrior bad = LayerPrior::gaussian();
  bad.beta_w = 1.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  LayerPrior lap = LayerPrior::laplace();
  lap.beta_w = 2.0;
  CHECK_THROWS_AS(lap.validate(), ParameterError);
  CHECK_THROWS_AS(LayerPrior::generalized_gaussian(-1.0).validate(), ParameterError);
  LayerPrior neg = LayerPrior::gaussian();
  neg.scale_multiplier = 0.0;
  CHECK_THROWS_AS(neg.validate(), ParameterError);

  CHECK(LayerPrior::gaussian().scale(16) == doctest::Approx(0.25));
  CHECK(LayerPrior::gaussian(ScalePolicy::unit).scale(16) == 1.0);
}

TEST_CASE("network validation") {
  auto net = small_net(Activation::relu, 10);
  CHECK_NOTHROW(net.validate());
  auto a = net;
  a.layer_priors.pop_back();
  CHECK_THROWS_AS(a.validate(), ParameterError);
  auto b = net;
  b.widths[1] = 0;
  CHECK_THROWS_AS(b.validate(), ParameterError);
  auto c = net;
  c.tracked_unit = 4;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  auto d = net;
  d.n_samples = 0;
  CHECK_THROWS_AS(d.validate(), ParameterError);
}

TEST_CASE("predicted tail parameter follows the harmonic rule") {
  const std::vector<LayerPrior> g(4, LayerPrior::gaussian());
  CHECK(predicted_tail_parameter(g, 1) == doctest::Approx(2.0));
  CHECK(predicted_tail_parameter(g, 2) == doctest::Approx(1.0));
  CHECK(predicted_tail_parameter(g, 3) == doctest::Approx(2.0 / 3.0));
  CHECK(predicted_tail_parameter(g, 4) == doctest::Approx(0.5));
  const std::vector<LayerPrior> mixed = {LayerPrior::laplace(), LayerPrior::gaussian(),
                                         LayerPrior::generalized_gaussian(4.0)};
  CHECK(predicted_tail_parameter(mixed, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(predicted_tail_parameter(mixed, 3) == doctest::Approx(4.0 / 7.0));
  CHECK_THROWS_AS(predicted_tail_parameter(g, 0), ParameterError);
  CHECK_THROWS_AS(predicted_tail_parameter(g, 5), ParameterError);

  // property: monotone decreasing in depth, bounded by the smallest beta_w
  oracle::Gen gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LayerPrior> ps;
    const std::size_t depth = gen.index(1, 8);
    for (std::size_t k = 0; k < depth; ++k)
      ps.push_back(LayerPrior::generalized_gaussian(gen.uniform(0.3, 5.0)));
    double prev = 1e9, min_beta = 1e9;
    for (std::size_t l = 1; l <= depth; ++l) {
      min_beta = std::min(min_beta, ps[l - 1].beta_w);
      const double b = predicted_tail_parameter(ps, l);
      CHECK(b < prev);
      CHECK(b <= min_beta * (1 + 1e-12));
      prev = b;
    }
  }
}

TEST_CASE("forward pass structure") {
  for (auto act : {Activation::relu, Activation::identity, Activation::tanh}) {
    const auto net = small_net(act, 1);
    const auto input = make_input(net.input_dim, net.input_seed);
    const auto d = forward_sample(net, input, RngStream{1, 2}, SummandCapture{2, 1});
    REQUIRE(d.pre.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
      for (std::size_t j = 0; j < 4; ++j) {
        const double g = d.pre[l][j];
        const double h = d.post[l][j];
        if (act == Activation::relu) CHECK(h == std::max(g, 0.0));
        if (act == Activation::identity) CHECK(h == g);
        if (act == Activation::tanh) CHECK(h == std::tanh(g));
      }
    }
    // captured summands add up to the pre-activation they feed
    REQUIRE(d.summands.size() == 4);
    const double s = std::accumulate(d.summands.begin(), d.summands.end(), 0.0);
    CHECK(s == doctest::Approx(d.pre[1][1]).epsilon(1e-12));
  }
  const auto net = small_net(Activation::relu, 1);
  const std::vector<double> wrong(3, 1.0);
  CHECK_THROWS_AS(forward_sample(net, wrong, RngStream{}), ParameterError);
}

TEST_CASE("replicate i is forward_sample on stream (seed, i)") {
  const auto net = small_net(Activation::relu, 64);
  const auto trace = run_prior_monte_carlo(net, 3);
  const auto input = make_input(net.input_dim, net.input_seed);
  for (std::size_t i : {0u, 1u, 31u, 63u}) {
    const auto d = forward_sample(net, input, RngStream{net.seed, i});
    for (std::size_t l = 0; l < 3; ++l) {
      CHECK(trace.pre[l][i] == d.pre[l][net.tracked_unit]);
      CHECK(trace.post[l][i] == d.post[l][net.tracked_unit]);
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  const auto net = small_net(Activation::relu, 3001);
  const auto ref = run_prior_monte_carlo(net, 1);
  for (std::size_t w : {2u, 4u, 7u, 16u}) {
    const auto t = run_prior_monte_carlo(net, w);
    CHECK(t.pre == ref.pre);
    CHECK(t.post == ref.post);
  }
  const auto js = sample_layer_summands(net, 3, 0, 1);
  const auto js5 = sample_layer_summands(net, 3, 0, 5);
  for (std::size_t r = 0; r < js.rows(); r += 101)
    for (std::size_t c = 0; c < js.cols(); ++c) CHECK(js(r, c) == js5(r, c));
}

TEST_CASE("summand rows add up to the traced pre-activation") {
  const auto net = small_net(Activation::relu, 500);
  const auto trace = run_prior_monte_carlo(net, 2);
  const auto js = sample_layer_summands(net, 2, net.tracked_unit, 2);
  REQUIRE(js.rows() == 500);
  REQUIRE(js.cols() == 4);
  for (std::size_t r = 0; r < js.rows(); ++r) {
    const auto row = js.row(r);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(trace.pre[1][r]).epsilon(1e-12));
  }
}

TEST_CASE("first-layer pre-activation is Gaussian with variance |x|^2 / d") {
  auto net = small_net(Activation::identity, 100000, {3, 3});
  const auto trace = run_prior_monte_carlo(net);
  const auto input = make_input(net.input_dim, net.input_seed);
  const double sigma = std::sqrt(sq_norm(input) / net.input_dim);
  const double eps = oracle::dkw_epsilon(net.n_samples, 1e-3);
  const auto& g1 = trace.pre[0];
  double worst = 0.0;
  for (double x = -4.0 * sigma; x <= 4.0 * sigma; x += 0.05 * sigma) {
    const double exact = 0.5 * std::erfc(x / (sigma * std::sqrt(2.0)));
    worst = std::max(worst, std::abs(oracle::empirical_ge(g1, x) - exact));
  }
  CHECK(worst < eps);

  // With identity activation the second layer has the same variance.
  const auto& g2 = trace.pre[1];
  const double var = sq_norm(g2) / g2.size();
  // kurtosis of a product of Gaussians is 9, so sd(var_hat) ~ sigma^2 sqrt(8/n)
  CHECK(std::abs(var - sigma * sigma) < 5.0 * sigma * sigma * std::sqrt(8.0 / g2.size()));
}

TEST_CASE("pooling records every unit and flags dependence") {
  auto net = small_net(Activation::relu, 200);
  net.pool_units = true;
  const auto trace = run_prior_monte_carlo(net, 2);
  CHECK(trace.pooled);
  CHECK(trace.pre[0].size() == 200 * 4);
  auto single = net;
  single.pool_units = false;
  single.tracked_unit = 2;
  const auto t1 = run_prior_monte_carlo(single, 1);
  for (std::size_t i = 0; i < 200; ++i) CHECK(trace.pre[2][i * 4 + 2] == t1.pre[2][i]);
}

TEST_CASE("degenerate input is flagged") {
  auto net = small_net(Activation::relu, 100);
  net.input_override = std::vector<double>(net.input_dim, 0.0);
  const auto trace = run_prior_monte_carlo(net, 1);
  CHECK(trace.degenerate_input);
  CHECK(trace.pre[0][5] == 0.0);
  CHECK_FALSE(run_prior_monte_carlo(small_net(Activation::relu, 10), 1).degenerate_input);
}

TEST_CASE("overflow aborts with the failing layer") {
  auto net = small_net(Activation::identity, 50);
  for (auto& p : net.layer_priors) p.scale_multiplier = 1e200;
  try {
    run_prior_monte_carlo(net, 1);
    FAIL("expected OverflowError");
  } catch (const OverflowError& e) {
    CHECK(e.layer() == 2);
    CHECK(e.replicate() == 0);
  }
}

TEST_CASE("GWT_LAB_THREADS caps the worker count") {
  ::setenv("GWT_LAB_THREADS", "3", 1);
  CHECK(resolve_worker_count(8) == 3);
  CHECK(resolve_worker_count(2) == 2);
  CHECK(resolve_worker_count() <= 3);
  ::setenv("GWT_LAB_THREADS", "junk", 1);
  CHECK(resolve_worker_count(5) == 5);
  ::unsetenv("GWT_LAB_THREADS");
  CHECK(resolve_worker_count(6) == 6);
  CHECK(resolve_worker_count() >= 1);
}
