#ifndef SLICESIM_MLP_HPP
#define SLICESIM_MLP_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slicesim/rng.hpp"

namespace slicesim {

enum class Activation { relu, sigmoid, tanh, identity };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Dense network stored as one flat parameter vector: per layer, the weight
// matrix [out][in] row-major followed by the bias vector. The flat layout is
// what soft target updates and parameter averaging operate on.
struct Mlp {
  std::vector<int> layer_sizes;          // [input, hidden..., output]
  std::vector<Activation> activations;   // one per non-input layer
  std::vector<double> params;

  static Mlp make(std::vector<int> sizes, std::vector<Activation> acts);

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(activations.size()); }
  std::size_t num_params() const;
  std::size_t layer_offset(int layer) const;  // start of layer's weights
};

// Pre- and post-activation values retained by forward for backward.
struct ForwardCache {
  std::vector<std::vector<double>> post;  // post[0] = input, post[L] = output
  std::vector<std::vector<double>> pre;   // pre[l] for layer l (1-based into post)
};

// Affine + activation composition; cache is reused across calls without
// reallocation. Returns the output activation vector.
const std::vector<double>& forward(const Mlp& net, std::span<const double> input,
                                   ForwardCache& cache);
std::vector<double> forward(const Mlp& net, std::span<const double> input);

// Exact reverse-mode gradients of output . output_grad. Parameter gradients
// are accumulated into param_grad (callers zero it between batches); the
// input gradient is overwritten. input_grad feeds the actor update's dQ/da
// chain and may be empty when not needed.
void backward(const Mlp& net, const ForwardCache& cache,
              std::span<const double> output_grad, std::span<double> param_grad,
              std::span<double> input_grad);

struct Gradients {
  std::vector<double> params;
  std::vector<double> input;
};
Gradients backward(const Mlp& net, const ForwardCache& cache,
                   std::span<const double> output_grad);

// Uniform init in +-1/sqrt(fan_in) per layer, weights and biases alike.
void init_params(Mlp& net, Rng& rng);

std::vector<double> get_params(const Mlp& net);
void set_params(Mlp& net, std::span<const double> params);

enum class StepDirection { descent, ascent };

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  long step_count = 0;

  AdamState() = default;
  AdamState(std::size_t num_params, double lr);
  void reset();
};

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads, StepDirection direction);

// Versioned JSON checkpoint; doubles round-trip bit-exactly.
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

}  // namespace slicesim

#endif  // SLICESIM_MLP_HPP
