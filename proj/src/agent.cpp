#include "slicesim/agent.hpp"

#include "slicesim/errors.hpp"

namespace slicesim {

std::vector<int> actor_layer_sizes() { return {2 * kActionDim, 32, 32, kActionDim}; }

std::vector<Activation> actor_activations() {
  return {Activation::relu, Activation::relu, Activation::sigmoid};
}

std::vector<int> critic_layer_sizes(int global_dim) {
  return {global_dim + kActionDim, 64, 64, 1};
}

std::vector<Activation> critic_activations() {
  return {Activation::relu, Activation::relu, Activation::tanh};
}

Agent make_agent(int slice_id, int global_dim, double learning_rate, Rng& init_rng) {
  Agent agent;
  agent.slice_id = slice_id;
  agent.actor = Mlp::make(actor_layer_sizes(), actor_activations());
  agent.critic = Mlp::make(critic_layer_sizes(global_dim), critic_activations());
  init_params(agent.actor, init_rng);
  init_params(agent.critic, init_rng);
  agent.target_actor = agent.actor;
  agent.target_critic = agent.critic;
  agent.actor_opt = AdamState(agent.actor.num_params(), learning_rate);
  agent.critic_opt = AdamState(agent.critic.num_params(), learning_rate);
  return agent;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay buffer: capacity must be > 0");
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
    return;
  }
  storage_[head_] = std::move(t);  // overwrite the oldest entry
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t logical_index) const {
  // Logical index 0 is the oldest stored transition.
  if (logical_index >= storage_.size()) {
    throw DimensionMismatch("replay buffer: index out of range");
  }
  if (storage_.size() < capacity_) return storage_[logical_index];
  return storage_[(head_ + logical_index) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (batch > storage_.size()) {
    throw ConfigError("replay buffer: batch larger than stored transitions");
  }
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t k = 0; k < batch; ++k) {
    out.push_back(&storage_[rng.index(storage_.size())]);
  }
  return out;
}

void ReplayBuffer::clear() {
  storage_.clear();
  head_ = 0;
}

void TrainSchedule::validate() const {
  if (k1 < 0 || k2 < 0 || k3 < 0) throw ConfigError("schedule: k1, k2, k3 must be >= 0");
  if (batch_size < 1) throw ConfigError("schedule: batch size must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("schedule: gamma outside [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("schedule: tau outside (0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("schedule: learning rate must be > 0");
  if (replay_capacity == 0) throw ConfigError("schedule: replay capacity must be > 0");
  if (batch_size > static_cast<int>(replay_capacity)) {
    throw ConfigError("schedule: batch size exceeds replay capacity");
  }
  if ((k2 + k3) > 0 && batch_size > k1) {
    throw ConfigError(
        "schedule: batch size exceeds buffer occupancy at the first update "
        "(batch must be <= k1)");
  }
}

}  // namespace slicesim
