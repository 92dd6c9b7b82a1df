#ifndef SLICESIM_MADDPG_HPP
#define SLICESIM_MADDPG_HPP

#include <functional>
#include <span>
#include <vector>

#include "slicesim/agent.hpp"
#include "slicesim/env.hpp"

namespace slicesim {

// Sigmoid actor output plus noise_scale * OU sample, clipped to [0,1].
// The noise process is only advanced when noise_scale > 0.
Action act(const Agent& agent, std::span<const double> local_state, double noise_scale,
           OuNoise& noise, Rng& rng);
Action act_deterministic(const Agent& agent, std::span<const double> local_state);

// [global state || own action].
std::vector<double> critic_input(std::span<const double> global_state,
                                 const Action& action);

// y = r + gamma * Q'(s_{t+1}, target_actor(s_{i,t+1})); no terminal masking,
// the slicing loop is a continuing task.
double td_target(const Agent& agent, double reward, std::span<const double> next_global,
                 std::span<const double> next_local, double gamma);

// One Adam descent step on the mean squared TD error; returns the pre-update
// batch loss.
double update_critic(Agent& agent, std::span<const Transition* const> batch,
                     double gamma);

// One Adam ascent step on mean Q(s, pi(s_i)), chaining the critic's
// action-slice input gradient through the actor; returns pre-update mean Q.
double update_actor(Agent& agent, std::span<const Transition* const> batch);

// target <- tau * main + (1 - tau) * target, elementwise.
void soft_update(const Mlp& main, Mlp& target, double tau);
void soft_update_agent(Agent& agent, double tau);

// Linear decay (k2 - f) / k2 over the exploration stage, clamped to [0,1].
double exploration_epsilon(int f, int k2);

struct StepMetrics {
  int step = 0;   // 1-based environment step
  int stage = 0;  // 1 observation, 2 exploration, 3 training
  double epsilon = 0.0;
  double shared_reward = 0.0;
  std::vector<double> rewards;      // r_it
  std::vector<double> critic_loss;  // NaN before updates start
  std::vector<double> mean_q;
};

struct TrainResult {
  std::vector<StepMetrics> trace;
};

struct TrainStreams {
  Rng noise;
  Rng replay;
  Rng random_actions;

  static TrainStreams from_root(std::uint64_t root_seed);
};

// Three-stage schedule: k1 random steps fill the buffer, k2 noisy-policy
// steps with per-step updates and linearly decaying epsilon, k3 noise-free
// steps with updates. Throws ConfigError when the batch cannot be filled by
// the end of the observation stage.
TrainResult train(Environment& env, std::vector<Agent>& agents,
                  const TrainSchedule& schedule, const OuParams& ou,
                  TrainStreams& streams,
                  const std::function<void(const StepMetrics&)>& on_step = {});

}  // namespace slicesim

#endif  // SLICESIM_MADDPG_HPP
