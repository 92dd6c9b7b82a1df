#ifndef SLICESIM_CONFIG_HPP
#define SLICESIM_CONFIG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicesim/agent.hpp"
#include "slicesim/baselines.hpp"
#include "slicesim/env.hpp"

namespace slicesim {

// Full experiment description. Everything is optional in the JSON form and
// falls back to the defaults below; absent topology means default_topology().
struct ExperimentConfig {
  EnvConfig env;
  TrainSchedule schedule;
  OuParams ou;
  PolicyKind policy = PolicyKind::maddpg;
  std::vector<std::uint64_t> seeds{1};
  int eval_horizon = 30;
  double incremental_fraction = 0.12;
  int incremental_batch = 200;
  std::vector<double> static_shares;  // empty = equal shares
  std::string out_dir;                // optional; CLI --out overrides

  static ExperimentConfig defaults();
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void validate() const;

  // Hash of the whole config; stamped into every output file.
  std::string config_hash() const;
  // Hash of the evaluation scenario only (env + seeds + horizon), shared by
  // runs that differ only in policy so compare() can pair them.
  std::string scenario_hash() const;

  int global_observation_dim() const {
    return env.topology.num_mecs() + env.topology.num_links() +
           kActionDim * env.max_slices;
  }
};

std::string hash_json(const nlohmann::json& j);

}  // namespace slicesim

#endif  // SLICESIM_CONFIG_HPP
