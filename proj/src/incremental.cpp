#include "slicesim/incremental.hpp"

#include <cmath>

#include "slicesim/errors.hpp"

namespace slicesim {

namespace {

std::vector<double> mean_of(std::span<const Agent> agents, const Mlp Agent::*net) {
  const std::size_t n = (agents[0].*net).params.size();
  std::vector<double> mean(n, 0.0);
  for (const Agent& a : agents) {
    if ((a.*net).params.size() != n) {
      throw DimensionMismatch("average_params: agent network shapes differ");
    }
    for (std::size_t k = 0; k < n; ++k) mean[k] += (a.*net).params[k];
  }
  const double inv = 1.0 / static_cast<double>(agents.size());
  for (double& v : mean) v *= inv;
  return mean;
}

}  // namespace

GeneralizedModel average_params(std::span<const Agent> agents) {
  if (agents.empty()) throw CountError("average_params: needs at least one agent");
  GeneralizedModel model;
  model.actor_params = mean_of(agents, &Agent::actor);
  model.critic_params = mean_of(agents, &Agent::critic);
  model.target_actor_params = mean_of(agents, &Agent::target_actor);
  model.target_critic_params = mean_of(agents, &Agent::target_critic);
  model.source_count = static_cast<int>(agents.size());
  return model;
}

void grow(std::vector<Agent>& agents, int new_count, const GeneralizedModel& model,
          int max_slices, double learning_rate) {
  const int current = static_cast<int>(agents.size());
  if (current < 1) throw CountError("grow: no source agents");
  if (new_count <= current) throw CountError("grow: new count must exceed current");
  if (new_count > max_slices) throw CountError("grow: new count exceeds max_slices");

  for (Agent& a : agents) {
    a.actor_opt.reset();
    a.critic_opt.reset();
  }
  for (int i = current; i < new_count; ++i) {
    Agent fresh;
    fresh.slice_id = i;
    fresh.actor = Mlp::make(agents[0].actor.layer_sizes, agents[0].actor.activations);
    fresh.critic = Mlp::make(agents[0].critic.layer_sizes, agents[0].critic.activations);
    set_params(fresh.actor, model.actor_params);
    set_params(fresh.critic, model.critic_params);
    // Targets start at the averaged mains so fine-tuning opens without a
    // main-vs-target TD gap.
    fresh.target_actor = fresh.actor;
    fresh.target_critic = fresh.critic;
    fresh.actor_opt = AdamState(fresh.actor.num_params(), learning_rate);
    fresh.critic_opt = AdamState(fresh.critic.num_params(), learning_rate);
    agents.push_back(std::move(fresh));
  }
}

void shrink(std::vector<Agent>& agents, int new_count, const GeneralizedModel& model) {
  const int current = static_cast<int>(agents.size());
  if (new_count < 1) throw CountError("shrink: new count must be >= 1");
  if (new_count >= current) throw CountError("shrink: new count must be below current");

  agents.resize(new_count);
  for (int i = 0; i < new_count; ++i) {
    Agent& a = agents[i];
    a.slice_id = i;
    set_params(a.actor, model.actor_params);
    set_params(a.critic, model.critic_params);
    set_params(a.target_actor, model.actor_params);
    set_params(a.target_critic, model.critic_params);
    a.actor_opt.reset();
    a.critic_opt.reset();
  }
}

TrainSchedule scaled_schedule(const TrainSchedule& base, double fraction,
                              int batch_size) {
  if (!(fraction > 0.0)) throw ConfigError("scaled_schedule: fraction must be > 0");
  TrainSchedule scaled = base;
  scaled.k1 = static_cast<int>(std::llround(base.k1 * fraction));
  scaled.k2 = static_cast<int>(std::llround(base.k2 * fraction));
  scaled.k3 = static_cast<int>(std::llround(base.k3 * fraction));
  scaled.batch_size = batch_size;
  return scaled;
}

TrainResult incremental_train(Environment& env, std::vector<Agent>& agents,
                              const TrainSchedule& base_schedule, double fraction,
                              int batch_size, const OuParams& ou, TrainStreams& streams,
                              const std::function<void(const StepMetrics&)>& on_step) {
  TrainSchedule schedule = scaled_schedule(base_schedule, fraction, batch_size);
  return train(env, agents, schedule, ou, streams, on_step);
}

}  // namespace slicesim
