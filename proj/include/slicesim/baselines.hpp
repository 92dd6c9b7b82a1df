#ifndef SLICESIM_BASELINES_HPP
#define SLICESIM_BASELINES_HPP

#include <string>
#include <vector>

#include "slicesim/rng.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

enum class PolicyKind { maddpg, random, over_allocation, static_slicing };

std::string policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);

// Each component uniform in [0, 1]; the env scales by the 2/5 caps.
Action random_policy(Rng& rng);

// Constant all-ones action: the full 2/5 J and 2/5 B cap every slot.
Action over_allocation_policy();

// Complete partition of resources: a slice holding `share` of the total gets
// share * J per MEC and share * B per link, i.e. action share/(2/5) clipped
// to the per-slice cap.
Action static_slicing_policy(double share);

// Non-learning comparison policies emitting actions in the same
// [0,1]^5-per-slice interface as actors.
class BaselinePolicy {
 public:
  static BaselinePolicy make_random(std::uint64_t seed);
  static BaselinePolicy make_over_allocation();
  // Equal shares when the table is empty.
  static BaselinePolicy make_static_slicing(std::vector<double> shares = {});

  PolicyKind kind() const { return kind_; }
  std::vector<Action> act(int num_slices);

 private:
  explicit BaselinePolicy(PolicyKind kind) : kind_(kind), rng_(0) {}

  PolicyKind kind_;
  Rng rng_;
  std::vector<double> shares_;
};

}  // namespace slicesim

#endif  // SLICESIM_BASELINES_HPP
