#include "slicesim/mlp.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "slicesim/errors.hpp"

namespace slicesim {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::tanh: return std::tanh(z);
    case Activation::identity: return z;
  }
  return z;
}

// Derivative expressed from whichever of (pre, post) is cheaper.
double activate_grad(Activation a, double pre, double post) {
  switch (a) {
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return post * (1.0 - post);
    case Activation::tanh: return 1.0 - post * post;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation: " + name);
}

Mlp Mlp::make(std::vector<int> sizes, std::vector<Activation> acts) {
  if (sizes.size() < 2 || acts.size() != sizes.size() - 1) {
    throw DimensionMismatch("mlp: need n layer sizes and n-1 activations");
  }
  for (int s : sizes) {
    if (s < 1) throw DimensionMismatch("mlp: layer sizes must be >= 1");
  }
  Mlp net;
  net.layer_sizes = std::move(sizes);
  net.activations = std::move(acts);
  net.params.assign(net.num_params(), 0.0);
  return net;
}

std::size_t Mlp::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += static_cast<std::size_t>(layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return n;
}

std::size_t Mlp::layer_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return off;
}

const std::vector<double>& forward(const Mlp& net, std::span<const double> input,
                                   ForwardCache& cache) {
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw DimensionMismatch("forward: input length mismatch");
  }
  const int L = net.num_layers();
  cache.post.resize(L + 1);
  cache.pre.resize(L);
  cache.post[0].assign(input.begin(), input.end());

  std::size_t off = 0;
  for (int l = 0; l < L; ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const double* w = net.params.data() + off;
    const double* b = w + static_cast<std::size_t>(in) * out;
    const std::vector<double>& a = cache.post[l];
    cache.pre[l].resize(out);
    cache.post[l + 1].resize(out);
    for (int j = 0; j < out; ++j) {
      const double* wj = w + static_cast<std::size_t>(j) * in;
      double z = b[j];
      for (int i = 0; i < in; ++i) z += wj[i] * a[i];
      cache.pre[l][j] = z;
      cache.post[l + 1][j] = activate(net.activations[l], z);
    }
    off += static_cast<std::size_t>(in + 1) * out;
  }
  return cache.post[L];
}

std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  ForwardCache cache;
  return forward(net, input, cache);
}

void backward(const Mlp& net, const ForwardCache& cache,
              std::span<const double> output_grad, std::span<double> param_grad,
              std::span<double> input_grad) {
  const int L = net.num_layers();
  if (static_cast<int>(cache.post.size()) != L + 1) {
    throw DimensionMismatch("backward: cache does not match network");
  }
  if (static_cast<int>(output_grad.size()) != net.output_dim()) {
    throw DimensionMismatch("backward: output_grad length mismatch");
  }
  if (!param_grad.empty() && param_grad.size() != net.num_params()) {
    throw DimensionMismatch("backward: param_grad length mismatch");
  }
  if (!input_grad.empty() && static_cast<int>(input_grad.size()) != net.input_dim()) {
    throw DimensionMismatch("backward: input_grad length mismatch");
  }

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (int j = 0; j < net.output_dim(); ++j) {
    delta[j] *= activate_grad(net.activations[L - 1], cache.pre[L - 1][j],
                              cache.post[L][j]);
  }

  const bool want_params = !param_grad.empty();
  std::vector<double> prev_delta;
  for (int l = L - 1; l >= 0; --l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const std::size_t off = net.layer_offset(l);
    const double* w = net.params.data() + off;
    const std::vector<double>& a = cache.post[l];

    prev_delta.assign(in, 0.0);
    if (want_params) {
      double* gw = param_grad.data() + off;
      double* gb = gw + static_cast<std::size_t>(in) * out;
      for (int j = 0; j < out; ++j) {
        const double dj = delta[j];
        const double* wj = w + static_cast<std::size_t>(j) * in;
        double* gwj = gw + static_cast<std::size_t>(j) * in;
        for (int i = 0; i < in; ++i) {
          gwj[i] += dj * a[i];
          prev_delta[i] += dj * wj[i];
        }
        gb[j] += dj;
      }
    } else {
      for (int j = 0; j < out; ++j) {
        const double dj = delta[j];
        const double* wj = w + static_cast<std::size_t>(j) * in;
        for (int i = 0; i < in; ++i) prev_delta[i] += dj * wj[i];
      }
    }

    if (l > 0) {
      for (int i = 0; i < in; ++i) {
        prev_delta[i] *=
            activate_grad(net.activations[l - 1], cache.pre[l - 1][i], cache.post[l][i]);
      }
      delta.swap(prev_delta);
    } else if (!input_grad.empty()) {
      for (int i = 0; i < in; ++i) input_grad[i] = prev_delta[i];
    }
  }
}

Gradients backward(const Mlp& net, const ForwardCache& cache,
                   std::span<const double> output_grad) {
  Gradients g;
  g.params.assign(net.num_params(), 0.0);
  g.input.assign(net.input_dim(), 0.0);
  backward(net, cache, output_grad, g.params, g.input);
  return g;
}

void init_params(Mlp& net, Rng& rng) {
  for (int l = 0; l < net.num_layers(); ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    double* p = net.params.data() + net.layer_offset(l);
    const std::size_t count = static_cast<std::size_t>(in + 1) * out;
    for (std::size_t k = 0; k < count; ++k) p[k] = rng.uniform(-bound, bound);
  }
}

std::vector<double> get_params(const Mlp& net) { return net.params; }

void set_params(Mlp& net, std::span<const double> params) {
  if (params.size() != net.num_params()) {
    throw DimensionMismatch("set_params: length mismatch");
  }
  net.params.assign(params.begin(), params.end());
}

AdamState::AdamState(std::size_t num_params, double lr)
    : learning_rate(lr), m(num_params, 0.0), v(num_params, 0.0) {}

void AdamState::reset() {
  std::fill(m.begin(), m.end(), 0.0);
  std::fill(v.begin(), v.end(), 0.0);
  step_count = 0;
}

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads, StepDirection direction) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionMismatch("adam_step: shape mismatch");
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  const double sign = direction == StepDirection::descent ? -1.0 : 1.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] += sign * state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

std::string mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["layer_sizes"] = net.layer_sizes;
  std::vector<std::string> acts;
  for (Activation a : net.activations) acts.push_back(activation_name(a));
  j["activations"] = acts;
  j["params"] = net.params;
  return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw CheckpointMismatch("mlp checkpoint: unsupported format version");
  }
  std::vector<Activation> acts;
  for (const auto& name : j.at("activations")) {
    acts.push_back(activation_from_name(name.get<std::string>()));
  }
  Mlp net = Mlp::make(j.at("layer_sizes").get<std::vector<int>>(), std::move(acts));
  std::vector<double> params = j.at("params").get<std::vector<double>>();
  set_params(net, params);
  return net;
}

}  // namespace slicesim
