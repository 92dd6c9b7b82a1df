#ifndef SLICESIM_ENV_HPP
#define SLICESIM_ENV_HPP

#include <deque>
#include <optional>
#include <vector>

#include "slicesim/rng.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

struct DemandRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct OccupancyPolicy {
  enum class Mode { latency_scaled, single_slot };
  Mode mode = Mode::latency_scaled;
  int max_slots = 5;
  double slot_length = 1.0;  // seconds
};

// Affine server power model: f(U) = static_coeff + dynamic_coeff * U.
struct PowerModel {
  double static_coeff = 0.6;
  double dynamic_coeff = 0.4;
};

// f(U); throws DomainError outside [0, 1].
double power_draw(const PowerModel& model, double utilization);

// Link data rate, Gbps: bandwidth * log2(1 + snr).
double compute_data_rate(double bandwidth_gbps, double snr);

struct LatencyBreakdown {
  double total = 0.0;                                     // C_it, seconds
  double compute = 0.0;                                   // c_ibt = max over MECs
  double transmission = 0.0;                              // c_iat
  std::array<double, kMecsPerSlice> per_mec{};            // c_imbt
};

// Latency of serving `request` under `grant`. Returns nullopt (unservable)
// if any used allocation is below epsilon_min_fraction of its per-slice cap.
std::optional<LatencyBreakdown> compute_latency(const SliceRequest& request,
                                                const AllocationGrant& grant,
                                                const Topology& topology,
                                                double epsilon_min_fraction);

// Sum over the slice's MECs of f(U_m) * c_imbt, with U_m read from the
// ledger after all of the slot's grants were applied.
double compute_energy(const SlicePath& path,
                      const std::array<double, kMecsPerSlice>& per_mec_latency,
                      const ResourceLedger& ledger, const Topology& topology,
                      const PowerModel& power);

// Sliding record of recent per-slice latency and energy values whose minima
// (C1, E1) normalize the reward. The current slot's values are inserted
// before the minima are queried, which bounds every served reward by 1/I.
class NormalizationWindow {
 public:
  explicit NormalizationWindow(int capacity = 500);

  void insert(double latency, double energy);
  double min_latency() const { return min_latency_; }  // C1
  double min_energy() const { return min_energy_; }    // E1
  int size() const { return static_cast<int>(history_.size()); }
  bool empty() const { return history_.empty(); }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::deque<std::pair<double, double>> history_;
  double min_latency_ = 0.0;
  double min_energy_ = 0.0;
};

// Served reward (C1/C + E1/energy) / (2I). Zero-latency/energy entries are
// window minima by construction and score ratio 1.
double reward_served(double min_latency, double min_energy, double latency,
                     double energy, int num_slices);

// Failure penalty -1/I.
double reward_failed(int num_slices);

enum class SliceStatus { served, failed, idle };

struct SliceOutcome {
  SliceStatus status = SliceStatus::idle;
  double latency = 0.0;  // C_it, seconds (served only)
  double energy = 0.0;   // normalized power * s (served only)
  double reward = 0.0;   // r_it
  double utility = 0.0;  // served: == reward; failed/idle: 0
};

struct StepOutcome {
  int slot = 0;
  std::vector<SliceOutcome> slices;
  double shared_reward = 0.0;  // r_t = sum r_it
  double utility = 0.0;        // sum of per-slice utilities (failures clamp to 0)
};

double eval_utility(const StepOutcome& outcome);

struct EnvConfig {
  Topology topology;
  int num_slices = 4;
  int max_slices = 6;
  DemandRange compute_demand{10.0, 20.0};  // Gcycles
  DemandRange data_size{1.0, 2.0};         // Gb
  double arrival_prob = 1.0;
  OccupancyPolicy occupancy;
  PowerModel power;
  int window_size = 500;
  double epsilon_min = 1e-6;  // fraction of the per-slice cap

  double compute_cap_per_slice() const { return 0.4 * topology.urllc_compute_cap; }
  double bandwidth_cap_per_slice() const { return 0.4 * topology.urllc_bandwidth_cap; }

  void validate() const;
};

// Discrete-time slicing environment. Each slot runs
//   release expired grants -> generate requests -> observe -> act ->
//   feasibility-checked allocation -> latency/energy/reward
// with requests pre-generated at reset()/end-of-step so observations always
// describe the demands the next action will serve.
class Environment {
 public:
  Environment(EnvConfig config, std::uint64_t request_seed);

  // The ledger points into the owned config; hold instances by unique_ptr
  // when they need to change execution context.
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  void reset();
  void reset(std::uint64_t request_seed);

  // One action per active slice, components in [0, 1]. Infeasibility is a
  // modeled outcome (failed slice), not an error.
  StepOutcome step(const std::vector<Action>& actions);

  // Critic state: [remaining compute / J (M), remaining bandwidth / B (L),
  // 5 normalized demand values per slice slot, zero-padded to max_slices].
  std::vector<double> observe_global() const;

  // Actor state for one slice: remaining resources on its own path followed
  // by its normalized demands; throws UnknownSlice for inactive ids.
  std::vector<double> observe_local(int slice_id) const;

  int global_observation_dim() const;
  static constexpr int local_observation_dim() { return 2 * kActionDim; }

  const EnvConfig& config() const { return config_; }
  const ResourceLedger& ledger() const { return ledger_; }
  const NormalizationWindow& window() const { return window_; }
  const std::vector<std::optional<SliceRequest>>& pending_requests() const {
    return pending_;
  }
  int slot() const { return slot_; }
  int num_slices() const { return config_.num_slices; }

 private:
  void generate_requests();
  int occupancy_slots(double latency) const;

  EnvConfig config_;
  std::uint64_t request_seed_;
  Rng request_rng_;
  ResourceLedger ledger_;
  NormalizationWindow window_;
  std::vector<std::optional<SliceRequest>> pending_;
  int slot_ = 0;
};

}  // namespace slicesim

#endif  // SLICESIM_ENV_HPP
