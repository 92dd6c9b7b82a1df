#ifndef SLICESIM_AGENT_HPP
#define SLICESIM_AGENT_HPP

#include <cstdint>
#include <vector>

#include "slicesim/mlp.hpp"
#include "slicesim/rng.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

// Actor 10 -> 32 -> 32 -> 5 with a sigmoid head so raw actions land in (0,1).
std::vector<int> actor_layer_sizes();
std::vector<Activation> actor_activations();

// Critic (global_dim + 5) -> 64 -> 64 -> 1 with a tanh head; the +5 slot is
// the agent's own action, appended so dQ/da exists while the input width
// stays fixed under agent-count changes.
std::vector<int> critic_layer_sizes(int global_dim);
std::vector<Activation> critic_activations();

// One actor-critic pair with slowly tracking target copies. slice_id always
// equals the agent's position in the session's agent vector.
struct Agent {
  int slice_id = 0;
  Mlp actor;
  Mlp target_actor;
  Mlp critic;
  Mlp target_critic;
  AdamState actor_opt;
  AdamState critic_opt;
};

// Seeded init; targets start equal to their mains.
Agent make_agent(int slice_id, int global_dim, double learning_rate, Rng& init_rng);

// Mean-reverting exploration noise, one state component per action dim:
// x <- x + beta * (mu - x) + sigma * gaussian, unit time step.
struct OuParams {
  double epsilon = 1.0;  // initial scale
  double mu = 0.0;
  double sigma = 0.1;
  double beta = 0.9;
};

class OuNoise {
 public:
  OuNoise(int dims, const OuParams& params) : params_(params), x_(dims, params.mu) {}

  const std::vector<double>& sample(Rng& rng) {
    for (double& x : x_) {
      x += params_.beta * (params_.mu - x) + params_.sigma * rng.normal();
    }
    return x_;
  }

  const std::vector<double>& state() const { return x_; }
  void reset() { std::fill(x_.begin(), x_.end(), params_.mu); }

 private:
  OuParams params_;
  std::vector<double> x_;
};

// One environment step as stored for replay. Actions are the post-noise,
// post-clip values actually executed, still on the [0,1] scale.
struct Transition {
  std::vector<double> global_state;
  std::vector<std::vector<double>> local_states;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<double> next_global_state;
  std::vector<std::vector<double>> next_local_states;

  int num_agents() const { return static_cast<int>(rewards.size()); }
};

// Bounded FIFO with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t logical_index) const;
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;
  void clear();

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;  // ring once full
  std::size_t head_ = 0;             // next write position when full
};

struct TrainSchedule {
  int k1 = 300;    // observation steps (random actions)
  int k2 = 2000;   // exploration steps (decaying noise)
  int k3 = 2000;   // training steps (no noise)
  int batch_size = 300;
  double gamma = 0.99;
  double tau = 0.1;
  double learning_rate = 1e-3;
  std::size_t replay_capacity = 50000;

  int total_steps() const { return k1 + k2 + k3; }
  void validate() const;
};

}  // namespace slicesim

#endif  // SLICESIM_AGENT_HPP
