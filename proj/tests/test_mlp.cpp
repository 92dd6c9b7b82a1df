#include <doctest.h>

#include <cmath>

#include "slicesim/errors.hpp"
#include "slicesim/mlp.hpp"
#include "test_support.hpp"

using namespace slicesim;
using slicesim::testing::finite_difference;
using slicesim::testing::max_mixed_error;

namespace {

Mlp random_net(const std::vector<int>& sizes, const std::vector<Activation>& acts,
               std::uint64_t seed) {
  Mlp net = Mlp::make(sizes, acts);
  Rng rng(seed);
  init_params(net, rng);
  return net;
}

std::vector<double> random_input(int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(dim);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST_CASE("forward: zero-parameter sigmoid head outputs 0.5") {
  Mlp net = Mlp::make({4, 3, 2}, {Activation::relu, Activation::sigmoid});
  auto out = forward(net, std::vector<double>{0.3, -0.2, 0.9, 0.0});
  REQUIRE(out.size() == 2);
  for (double v : out) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forward: 1->1 identity net computes w*x + b") {
  Mlp net = Mlp::make({1, 1}, {Activation::identity});
  set_params(net, std::vector<double>{2.0, 1.0});  // w, b
  auto out = forward(net, std::vector<double>{3.0});
  CHECK(out[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("forward: finite inputs give finite outputs across activations") {
  std::vector<Activation> heads = {Activation::relu, Activation::sigmoid,
                                   Activation::tanh, Activation::identity};
  for (std::size_t h = 0; h < heads.size(); ++h) {
    Mlp net = random_net({6, 8, 4}, {Activation::relu, heads[h]}, 100 + h);
    for (int trial = 0; trial < 20; ++trial) {
      auto out = forward(net, random_input(6, 1000 + trial));
      for (double v : out) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("forward: dimension mismatch throws") {
  Mlp net = Mlp::make({3, 2}, {Activation::tanh});
  CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("forward is pure: identical params and input give identical outputs") {
  Mlp net = random_net({5, 7, 3}, {Activation::tanh, Activation::sigmoid}, 7);
  auto in = random_input(5, 8);
  auto a = forward(net, in);
  auto b = forward(net, in);
  CHECK(a == b);
}

TEST_CASE("backward: linear 1->1 net has param_grad [x, 1] and input_grad [w]") {
  Mlp net = Mlp::make({1, 1}, {Activation::identity});
  set_params(net, std::vector<double>{1.7, 0.3});
  ForwardCache cache;
  forward(net, std::vector<double>{4.0}, cache);
  auto grads = backward(net, cache, std::vector<double>{1.0});
  CHECK(grads.params[0] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(grads.params[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(grads.input[0] == doctest::Approx(1.7).epsilon(1e-15));
}

TEST_CASE("backward: zero output gradient gives zero gradients") {
  Mlp net = random_net({4, 6, 2}, {Activation::relu, Activation::tanh}, 11);
  ForwardCache cache;
  forward(net, random_input(4, 12), cache);
  auto grads = backward(net, cache, std::vector<double>{0.0, 0.0});
  for (double g : grads.params) CHECK(g == 0.0);
  for (double g : grads.input) CHECK(g == 0.0);
}

TEST_CASE("backward matches central finite differences on small nets") {
  // <= 64 params per case; every activation appears somewhere.
  struct Case {
    std::vector<int> sizes;
    std::vector<Activation> acts;
  };
  std::vector<Case> cases = {
      {{3, 4, 2}, {Activation::tanh, Activation::sigmoid}},
      {{2, 5, 1}, {Activation::sigmoid, Activation::tanh}},
      {{4, 4, 3}, {Activation::relu, Activation::identity}},
      {{5, 3, 2}, {Activation::identity, Activation::relu}},
  };
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (int trial = 0; trial < 5; ++trial) {
      std::uint64_t seed = 300 + 17 * c + trial;
      Mlp net = random_net(cases[c].sizes, cases[c].acts, seed);
      auto in = random_input(cases[c].sizes.front(), seed + 1);
      auto weights = random_input(cases[c].sizes.back(), seed + 2);

      ForwardCache cache;
      forward(net, in, cache);
      auto analytic = backward(net, cache, weights);

      auto objective = [&]() {
        auto out = forward(net, in);
        double v = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) v += weights[k] * out[k];
        return v;
      };
      auto fd = finite_difference(net.params, objective);
      CHECK(max_mixed_error(analytic.params, fd) <= 1e-4);
    }
  }
}

TEST_CASE("backward: input gradient matches finite differences") {
  Mlp net = random_net({4, 6, 2}, {Activation::tanh, Activation::sigmoid}, 42);
  std::vector<double> in = random_input(4, 43);
  std::vector<double> weights = {0.7, -0.4};

  ForwardCache cache;
  forward(net, in, cache);
  auto analytic = backward(net, cache, weights);

  auto objective = [&]() {
    auto out = forward(net, in);
    return weights[0] * out[0] + weights[1] * out[1];
  };
  auto fd = finite_difference(in, objective);
  CHECK(max_mixed_error(analytic.input, fd) <= 1e-4);
}

TEST_CASE("adam: zero gradient leaves params unchanged while moments decay") {
  AdamState state(2, 1e-3);
  state.m = {0.5, -0.25};
  state.v = {0.1, 0.2};
  std::vector<double> params = {1.0, 2.0};
  std::vector<double> before = params;
  std::vector<double> grads = {0.0, 0.0};
  adam_step(state, params, grads, StepDirection::descent);
  // Zero gradient still shifts params through the surviving first moment...
  CHECK(params != before);
  CHECK(state.m[0] == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(state.v[0] == doctest::Approx(0.0999).epsilon(1e-12));

  // ...but with zero moments nothing moves at all.
  AdamState zero_state(2, 1e-3);
  params = before;
  adam_step(zero_state, params, grads, StepDirection::descent);
  CHECK(params == before);
}

TEST_CASE("adam: first step magnitude is about lr * sign(g), bias-corrected") {
  AdamState state(1, 1e-3);
  std::vector<double> params = {0.0};
  std::vector<double> grads = {2.0};
  adam_step(state, params, grads, StepDirection::descent);
  // mhat = g, vhat = g^2 on the first step, so the update is
  // -lr * g / (|g| + eps).
  CHECK(params[0] == doctest::Approx(-0.001 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: descent then ascent with the same gradient nets out to zero") {
  AdamState state(1, 1e-3);
  std::vector<double> params = {0.4};
  std::vector<double> grads = {-1.3};
  adam_step(state, params, grads, StepDirection::descent);
  adam_step(state, params, grads, StepDirection::ascent);
  // Constant gradient keeps mhat = g and vhat = g^2 exactly, so both steps
  // have the same magnitude and opposite signs.
  CHECK(params[0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("get/set params round-trip leaves forward outputs bit-identical") {
  Mlp net = random_net({6, 8, 3}, {Activation::relu, Activation::tanh}, 77);
  auto in = random_input(6, 78);
  auto before = forward(net, in);
  auto saved = get_params(net);
  set_params(net, saved);
  auto after = forward(net, in);
  CHECK(before == after);
}

TEST_CASE("set_params: zeros push sigmoid-head outputs to 0.5") {
  Mlp net = random_net({3, 4, 2}, {Activation::relu, Activation::sigmoid}, 5);
  set_params(net, std::vector<double>(net.num_params(), 0.0));
  auto out = forward(net, std::vector<double>{0.1, 0.2, 0.3});
  for (double v : out) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("set_params: swapping params swaps outputs") {
  Mlp a = random_net({4, 5, 2}, {Activation::tanh, Activation::identity}, 21);
  Mlp b = random_net({4, 5, 2}, {Activation::tanh, Activation::identity}, 22);
  auto in = random_input(4, 23);
  auto out_a = forward(a, in);
  auto out_b = forward(b, in);

  auto pa = get_params(a);
  auto pb = get_params(b);
  set_params(a, pb);
  set_params(b, pa);
  CHECK(forward(a, in) == out_b);
  CHECK(forward(b, in) == out_a);
}

TEST_CASE("set_params: length mismatch throws") {
  Mlp net = Mlp::make({2, 2}, {Activation::relu});
  CHECK_THROWS_AS(set_params(net, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("checkpoint json round-trips bit-exactly") {
  Mlp net = random_net({10, 32, 32, 5},
                       {Activation::relu, Activation::relu, Activation::sigmoid}, 99);
  Mlp restored = mlp_from_json(mlp_to_json(net));
  CHECK(restored.layer_sizes == net.layer_sizes);
  CHECK(restored.activations == net.activations);
  REQUIRE(restored.params.size() == net.params.size());
  for (std::size_t k = 0; k < net.params.size(); ++k) {
    CHECK(restored.params[k] == net.params[k]);  // bit-exact
  }
}

TEST_CASE("checkpoint json rejects unknown versions") {
  CHECK_THROWS_AS(mlp_from_json(R"({"format_version": 2})"), CheckpointMismatch);
}
