#ifndef SLICESIM_INCREMENTAL_HPP
#define SLICESIM_INCREMENTAL_HPP

#include <span>
#include <string>
#include <vector>

#include "slicesim/maddpg.hpp"

namespace slicesim {

// Elementwise mean of the source agents' networks. Target averages are kept
// alongside the mains for provenance; transitions load targets from the
// averaged mains (see grow/shrink).
struct GeneralizedModel {
  std::vector<double> actor_params;
  std::vector<double> critic_params;
  std::vector<double> target_actor_params;
  std::vector<double> target_critic_params;
  int source_count = 0;
  std::string provenance;
};

GeneralizedModel average_params(std::span<const Agent> agents);

// Adds agents initialized from the generalized model; surviving agents keep
// their parameters bit-exactly. Optimizer moments reset for every agent.
void grow(std::vector<Agent>& agents, int new_count, const GeneralizedModel& model,
          int max_slices, double learning_rate);

// Keeps new_count agents, all carrying the generalized model; optimizer
// moments reset.
void shrink(std::vector<Agent>& agents, int new_count, const GeneralizedModel& model);

// Base schedule with k1, k2, k3 scaled by fraction and the given batch size.
TrainSchedule scaled_schedule(const TrainSchedule& base, double fraction,
                              int batch_size);

// Fine-tuning run after an agent-count transition: scaled schedule, fresh
// replay buffer (train always starts one), reduced batch.
TrainResult incremental_train(Environment& env, std::vector<Agent>& agents,
                              const TrainSchedule& base_schedule, double fraction,
                              int batch_size, const OuParams& ou, TrainStreams& streams,
                              const std::function<void(const StepMetrics&)>& on_step = {});

}  // namespace slicesim

#endif  // SLICESIM_INCREMENTAL_HPP
