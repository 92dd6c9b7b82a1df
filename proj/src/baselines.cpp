#include "slicesim/baselines.hpp"

#include <algorithm>

#include "slicesim/errors.hpp"

namespace slicesim {

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::maddpg: return "maddpg";
    case PolicyKind::random: return "random";
    case PolicyKind::over_allocation: return "over";
    case PolicyKind::static_slicing: return "static";
  }
  return "maddpg";
}

PolicyKind policy_from_name(const std::string& name) {
  if (name == "maddpg") return PolicyKind::maddpg;
  if (name == "random") return PolicyKind::random;
  if (name == "over") return PolicyKind::over_allocation;
  if (name == "static") return PolicyKind::static_slicing;
  throw ConfigError("unknown policy: " + name);
}

Action random_policy(Rng& rng) {
  Action a;
  for (double& v : a) v = rng.uniform();
  return a;
}

Action over_allocation_policy() {
  Action a;
  a.fill(1.0);
  return a;
}

Action static_slicing_policy(double share) {
  if (!(share >= 0.0)) throw ConfigError("static slicing: share must be >= 0");
  Action a;
  a.fill(std::min(share / 0.4, 1.0));
  return a;
}

BaselinePolicy BaselinePolicy::make_random(std::uint64_t seed) {
  BaselinePolicy p(PolicyKind::random);
  p.rng_ = Rng(seed);
  return p;
}

BaselinePolicy BaselinePolicy::make_over_allocation() {
  return BaselinePolicy(PolicyKind::over_allocation);
}

BaselinePolicy BaselinePolicy::make_static_slicing(std::vector<double> shares) {
  BaselinePolicy p(PolicyKind::static_slicing);
  p.shares_ = std::move(shares);
  return p;
}

std::vector<Action> BaselinePolicy::act(int num_slices) {
  std::vector<Action> actions(num_slices);
  switch (kind_) {
    case PolicyKind::random:
      for (Action& a : actions) a = random_policy(rng_);
      break;
    case PolicyKind::over_allocation:
      for (Action& a : actions) a = over_allocation_policy();
      break;
    case PolicyKind::static_slicing: {
      if (!shares_.empty() && static_cast<int>(shares_.size()) != num_slices) {
        throw ConfigError("static slicing: share table size mismatch");
      }
      for (int i = 0; i < num_slices; ++i) {
        double share = shares_.empty() ? 1.0 / num_slices : shares_[i];
        actions[i] = static_slicing_policy(share);
      }
      break;
    }
    case PolicyKind::maddpg:
      throw ConfigError("maddpg is not a baseline policy");
  }
  return actions;
}

}  // namespace slicesim
