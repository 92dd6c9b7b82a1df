#include "slicesim/maddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slicesim/errors.hpp"

namespace slicesim {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// Reused across batch iterations to keep the hot loop allocation-free.
struct UpdateWorkspace {
  ForwardCache actor_cache;
  ForwardCache critic_cache;
  ForwardCache target_actor_cache;
  ForwardCache target_critic_cache;
  std::vector<double> input;
  std::vector<double> param_grad;
  std::vector<double> input_grad;
};

thread_local UpdateWorkspace tls_ws;

void build_critic_input(std::span<const double> global_state,
                        std::span<const double> action, std::vector<double>& out) {
  out.resize(global_state.size() + action.size());
  std::copy(global_state.begin(), global_state.end(), out.begin());
  std::copy(action.begin(), action.end(), out.begin() + global_state.size());
}

double td_target_ws(const Agent& agent, double reward,
                    std::span<const double> next_global,
                    std::span<const double> next_local, double gamma,
                    UpdateWorkspace& ws) {
  const std::vector<double>& next_action =
      forward(agent.target_actor, next_local, ws.target_actor_cache);
  build_critic_input(next_global, next_action, ws.input);
  double q = forward(agent.target_critic, ws.input, ws.target_critic_cache)[0];
  return reward + gamma * q;
}

}  // namespace

Action act(const Agent& agent, std::span<const double> local_state, double noise_scale,
           OuNoise& noise, Rng& rng) {
  const std::vector<double>& out =
      forward(agent.actor, local_state, tls_ws.actor_cache);
  Action action;
  if (noise_scale > 0.0) {
    const std::vector<double>& x = noise.sample(rng);
    for (int k = 0; k < kActionDim; ++k) {
      action[k] = clip01(out[k] + noise_scale * x[k]);
    }
  } else {
    for (int k = 0; k < kActionDim; ++k) action[k] = clip01(out[k]);
  }
  return action;
}

Action act_deterministic(const Agent& agent, std::span<const double> local_state) {
  const std::vector<double>& out =
      forward(agent.actor, local_state, tls_ws.actor_cache);
  Action action;
  for (int k = 0; k < kActionDim; ++k) action[k] = clip01(out[k]);
  return action;
}

std::vector<double> critic_input(std::span<const double> global_state,
                                 const Action& action) {
  std::vector<double> out;
  build_critic_input(global_state, std::span<const double>(action), out);
  return out;
}

double td_target(const Agent& agent, double reward, std::span<const double> next_global,
                 std::span<const double> next_local, double gamma) {
  return td_target_ws(agent, reward, next_global, next_local, gamma, tls_ws);
}

double update_critic(Agent& agent, std::span<const Transition* const> batch,
                     double gamma) {
  if (batch.empty()) throw ConfigError("update_critic: empty batch");
  UpdateWorkspace& ws = tls_ws;
  const int i = agent.slice_id;
  const std::size_t n = batch.size();

  ws.param_grad.assign(agent.critic.num_params(), 0.0);
  double loss = 0.0;
  for (const Transition* t : batch) {
    double y = td_target_ws(agent, t->rewards[i], t->next_global_state,
                            t->next_local_states[i], gamma, ws);
    build_critic_input(t->global_state, std::span<const double>(t->actions[i]),
                       ws.input);
    double q = forward(agent.critic, ws.input, ws.critic_cache)[0];
    double err = q - y;
    loss += err * err;
    double output_grad = 2.0 * err / static_cast<double>(n);
    backward(agent.critic, ws.critic_cache, std::span<const double>(&output_grad, 1),
             ws.param_grad, {});
  }
  loss /= static_cast<double>(n);
  adam_step(agent.critic_opt, agent.critic.params, ws.param_grad,
            StepDirection::descent);
  return loss;
}

double update_actor(Agent& agent, std::span<const Transition* const> batch) {
  if (batch.empty()) throw ConfigError("update_actor: empty batch");
  UpdateWorkspace& ws = tls_ws;
  const int i = agent.slice_id;
  const std::size_t n = batch.size();

  ws.param_grad.assign(agent.actor.num_params(), 0.0);
  ws.input_grad.resize(agent.critic.input_dim());
  double mean_q = 0.0;
  const double output_grad = 1.0 / static_cast<double>(n);
  for (const Transition* t : batch) {
    const std::vector<double>& action =
        forward(agent.actor, t->local_states[i], ws.actor_cache);
    build_critic_input(t->global_state, action, ws.input);
    mean_q += forward(agent.critic, ws.input, ws.critic_cache)[0];
    backward(agent.critic, ws.critic_cache, std::span<const double>(&output_grad, 1),
             {}, ws.input_grad);
    // dQ/da is the action slice of the critic's input gradient.
    std::span<const double> dq_da(ws.input_grad.data() + ws.input_grad.size() -
                                      kActionDim,
                                  kActionDim);
    backward(agent.actor, ws.actor_cache, dq_da, ws.param_grad, {});
  }
  mean_q /= static_cast<double>(n);
  adam_step(agent.actor_opt, agent.actor.params, ws.param_grad, StepDirection::ascent);
  return mean_q;
}

void soft_update(const Mlp& main, Mlp& target, double tau) {
  if (main.params.size() != target.params.size()) {
    throw DimensionMismatch("soft_update: parameter shape mismatch");
  }
  for (std::size_t k = 0; k < main.params.size(); ++k) {
    target.params[k] = tau * main.params[k] + (1.0 - tau) * target.params[k];
  }
}

void soft_update_agent(Agent& agent, double tau) {
  soft_update(agent.actor, agent.target_actor, tau);
  soft_update(agent.critic, agent.target_critic, tau);
}

double exploration_epsilon(int f, int k2) {
  if (k2 <= 0) return 0.0;
  return std::clamp(static_cast<double>(k2 - f) / static_cast<double>(k2), 0.0, 1.0);
}

TrainStreams TrainStreams::from_root(std::uint64_t root_seed) {
  return TrainStreams{Rng(derive_seed(root_seed, "train/noise")),
                      Rng(derive_seed(root_seed, "train/replay")),
                      Rng(derive_seed(root_seed, "train/random_actions"))};
}

TrainResult train(Environment& env, std::vector<Agent>& agents,
                  const TrainSchedule& schedule, const OuParams& ou,
                  TrainStreams& streams,
                  const std::function<void(const StepMetrics&)>& on_step) {
  schedule.validate();
  const int num_agents = static_cast<int>(agents.size());
  if (num_agents != env.num_slices()) {
    throw ConfigError("train: one agent per active slice required");
  }
  for (int i = 0; i < num_agents; ++i) {
    if (agents[i].slice_id != i) {
      throw ConfigError("train: agent slice_id must match its position");
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  ReplayBuffer buffer(schedule.replay_capacity);
  std::vector<OuNoise> noise(num_agents, OuNoise(kActionDim, ou));

  TrainResult result;
  result.trace.reserve(schedule.total_steps());

  std::vector<double> global_state = env.observe_global();
  std::vector<std::vector<double>> local_states(num_agents);
  for (int i = 0; i < num_agents; ++i) local_states[i] = env.observe_local(i);

  int exploration_count = 0;  // f in the decay rule, counted from 0
  for (int step = 1; step <= schedule.total_steps(); ++step) {
    const int stage = step <= schedule.k1                ? 1
                      : step <= schedule.k1 + schedule.k2 ? 2
                                                          : 3;
    double eps = ou.epsilon;
    std::vector<Action> actions(num_agents);
    if (stage == 1) {
      for (Action& a : actions) {
        for (double& v : a) v = streams.random_actions.uniform();
      }
    } else {
      eps = stage == 2
                ? ou.epsilon * exploration_epsilon(exploration_count, schedule.k2)
                : 0.0;
      for (int i = 0; i < num_agents; ++i) {
        actions[i] = act(agents[i], local_states[i], eps, noise[i], streams.noise);
      }
    }

    StepOutcome outcome = env.step(actions);
    std::vector<double> next_global = env.observe_global();
    std::vector<std::vector<double>> next_locals(num_agents);
    for (int i = 0; i < num_agents; ++i) next_locals[i] = env.observe_local(i);

    Transition transition;
    transition.global_state = global_state;
    transition.local_states = local_states;
    transition.actions = actions;
    transition.rewards.resize(num_agents);
    for (int i = 0; i < num_agents; ++i) {
      transition.rewards[i] = outcome.slices[i].reward;
    }
    transition.next_global_state = next_global;
    transition.next_local_states = next_locals;
    buffer.push(std::move(transition));

    StepMetrics metrics;
    metrics.step = step;
    metrics.stage = stage;
    metrics.epsilon = eps;
    metrics.shared_reward = outcome.shared_reward;
    metrics.rewards.resize(num_agents);
    for (int i = 0; i < num_agents; ++i) metrics.rewards[i] = outcome.slices[i].reward;
    metrics.critic_loss.assign(num_agents, nan);
    metrics.mean_q.assign(num_agents, nan);

    if (stage >= 2) {
      std::vector<const Transition*> batch =
          buffer.sample(schedule.batch_size, streams.replay);
      for (int i = 0; i < num_agents; ++i) {
        metrics.critic_loss[i] = update_critic(agents[i], batch, schedule.gamma);
        metrics.mean_q[i] = update_actor(agents[i], batch);
        soft_update_agent(agents[i], schedule.tau);
      }
      if (stage == 2) exploration_count += 1;
    }

    global_state = std::move(next_global);
    local_states = std::move(next_locals);

    if (on_step) on_step(metrics);
    result.trace.push_back(std::move(metrics));
  }
  return result;
}

}  // namespace slicesim
