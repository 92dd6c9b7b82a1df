#include "slicesim/env.hpp"

#include <algorithm>
#include <cmath>

#include "slicesim/errors.hpp"

namespace slicesim {

double power_draw(const PowerModel& model, double utilization) {
  if (!(utilization >= 0.0 && utilization <= 1.0)) {
    throw DomainError("power_draw: utilization outside [0, 1]");
  }
  return model.static_coeff + model.dynamic_coeff * utilization;
}

double compute_data_rate(double bandwidth_gbps, double snr) {
  return bandwidth_gbps * std::log2(1.0 + snr);
}

std::optional<LatencyBreakdown> compute_latency(const SliceRequest& request,
                                                const AllocationGrant& grant,
                                                const Topology& topology,
                                                double epsilon_min_fraction) {
  const double min_compute = epsilon_min_fraction * 0.4 * topology.urllc_compute_cap;
  const double min_bandwidth = epsilon_min_fraction * 0.4 * topology.urllc_bandwidth_cap;
  for (double e : grant.compute_alloc) {
    if (e < min_compute) return std::nullopt;
  }
  for (double b : grant.bandwidth_alloc) {
    if (b < min_bandwidth) return std::nullopt;
  }

  LatencyBreakdown out;
  for (int k = 0; k < kMecsPerSlice; ++k) {
    out.per_mec[k] = request.compute_demand[k] / grant.compute_alloc[k];
    out.compute = std::max(out.compute, out.per_mec[k]);
  }
  for (int k = 0; k < kLinksPerSlice; ++k) {
    double rate = compute_data_rate(grant.bandwidth_alloc[k], topology.snr);
    out.transmission += request.data_size[k] / rate;
  }
  out.total = out.compute + out.transmission;
  return out;
}

double compute_energy(const SlicePath& path,
                      const std::array<double, kMecsPerSlice>& per_mec_latency,
                      const ResourceLedger& ledger, const Topology& topology,
                      const PowerModel& power) {
  double energy = 0.0;
  for (int k = 0; k < kMecsPerSlice; ++k) {
    int mec = path.mecs[k];
    double utilization = ledger.allocated_compute(mec) / topology.mec_capacity[mec];
    energy += power_draw(power, utilization) * per_mec_latency[k];
  }
  return energy;
}

NormalizationWindow::NormalizationWindow(int capacity) : capacity_(capacity) {}

void NormalizationWindow::insert(double latency, double energy) {
  if (static_cast<int>(history_.size()) == capacity_) {
    auto [old_latency, old_energy] = history_.front();
    history_.pop_front();
    // Only a departing minimum forces a rescan.
    if (old_latency == min_latency_) {
      min_latency_ = history_.empty() ? latency : history_[0].first;
      for (const auto& [c, e] : history_) min_latency_ = std::min(min_latency_, c);
    }
    if (old_energy == min_energy_) {
      min_energy_ = history_.empty() ? energy : history_[0].second;
      for (const auto& [c, e] : history_) min_energy_ = std::min(min_energy_, e);
    }
  }
  if (history_.empty()) {
    min_latency_ = latency;
    min_energy_ = energy;
  } else {
    min_latency_ = std::min(min_latency_, latency);
    min_energy_ = std::min(min_energy_, energy);
  }
  history_.emplace_back(latency, energy);
}

double reward_served(double min_latency, double min_energy, double latency,
                     double energy, int num_slices) {
  double latency_ratio = latency > 0.0 ? min_latency / latency : 1.0;
  double energy_ratio = energy > 0.0 ? min_energy / energy : 1.0;
  return (latency_ratio + energy_ratio) / (2.0 * num_slices);
}

double reward_failed(int num_slices) { return -1.0 / num_slices; }

double eval_utility(const StepOutcome& outcome) { return outcome.utility; }

void EnvConfig::validate() const {
  topology.validate();
  if (num_slices < 0) throw ConfigError("env: num_slices must be >= 0");
  if (max_slices < 1) throw ConfigError("env: max_slices must be >= 1");
  if (num_slices > max_slices) throw ConfigError("env: num_slices exceeds max_slices");
  if (max_slices > static_cast<int>(topology.slice_paths.size())) {
    throw ConfigError("env: max_slices exceeds the number of slice paths");
  }
  if (!(compute_demand.lo >= 0.0) || compute_demand.hi < compute_demand.lo) {
    throw ConfigError("env: bad compute demand range");
  }
  if (!(data_size.lo >= 0.0) || data_size.hi < data_size.lo) {
    throw ConfigError("env: bad data size range");
  }
  if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) {
    throw ConfigError("env: arrival_prob outside [0, 1]");
  }
  if (occupancy.max_slots < 1) throw ConfigError("env: occupancy max_slots must be >= 1");
  if (!(occupancy.slot_length > 0.0)) throw ConfigError("env: slot_length must be > 0");
  if (window_size < 1) throw ConfigError("env: window_size must be >= 1");
  if (!(epsilon_min > 0.0)) throw ConfigError("env: epsilon_min must be > 0");
  if (!(power.static_coeff >= 0.0) || !(power.dynamic_coeff >= 0.0)) {
    throw ConfigError("env: power coefficients must be >= 0");
  }
}

Environment::Environment(EnvConfig config, std::uint64_t request_seed)
    : config_(std::move(config)),
      request_seed_(request_seed),
      request_rng_(request_seed),
      ledger_(&config_.topology),
      window_(config_.window_size) {
  config_.validate();
  reset();
}

void Environment::reset() { reset(request_seed_); }

void Environment::reset(std::uint64_t request_seed) {
  request_seed_ = request_seed;
  request_rng_ = Rng(request_seed);
  ledger_.clear();
  window_ = NormalizationWindow(config_.window_size);
  pending_.assign(config_.num_slices, std::nullopt);
  slot_ = 0;
  generate_requests();
}

void Environment::generate_requests() {
  pending_.assign(config_.num_slices, std::nullopt);
  for (int i = 0; i < config_.num_slices; ++i) {
    bool arrives = request_rng_.uniform() < config_.arrival_prob;
    SliceRequest req;
    req.slice_id = i;
    req.slot = slot_;
    for (int k = 0; k < kMecsPerSlice; ++k) {
      req.compute_demand[k] =
          request_rng_.uniform(config_.compute_demand.lo, config_.compute_demand.hi);
    }
    for (int k = 0; k < kLinksPerSlice; ++k) {
      req.data_size[k] = request_rng_.uniform(config_.data_size.lo, config_.data_size.hi);
    }
    if (arrives) pending_[i] = req;
  }
}

int Environment::occupancy_slots(double latency) const {
  if (config_.occupancy.mode == OccupancyPolicy::Mode::single_slot) return 1;
  int slots = static_cast<int>(std::ceil(latency / config_.occupancy.slot_length));
  return std::clamp(slots, 1, config_.occupancy.max_slots);
}

StepOutcome Environment::step(const std::vector<Action>& actions) {
  if (static_cast<int>(actions.size()) != config_.num_slices) {
    throw DimensionMismatch("step: one action per active slice required");
  }
  const int I = config_.num_slices;
  StepOutcome outcome;
  outcome.slot = slot_;
  outcome.slices.resize(I);

  // Allocation pass, ascending slice index: earlier slices claim first.
  std::vector<LatencyBreakdown> latencies(I);
  for (int i = 0; i < I; ++i) {
    SliceOutcome& slice = outcome.slices[i];
    if (!pending_[i].has_value()) {
      slice.status = SliceStatus::idle;
      continue;
    }
    AllocationGrant grant;
    grant.slice_id = i;
    grant.slot_created = slot_;
    for (int k = 0; k < kMecsPerSlice; ++k) {
      grant.compute_alloc[k] = actions[i][k] * config_.compute_cap_per_slice();
    }
    for (int k = 0; k < kLinksPerSlice; ++k) {
      grant.bandwidth_alloc[k] =
          actions[i][kMecsPerSlice + k] * config_.bandwidth_cap_per_slice();
    }
    auto latency =
        compute_latency(*pending_[i], grant, config_.topology, config_.epsilon_min);
    if (!latency.has_value() || !ledger_.fits(grant)) {
      slice.status = SliceStatus::failed;
      continue;
    }
    grant.occupancy_slots = occupancy_slots(latency->total);
    ledger_.add(grant);
    latencies[i] = *latency;
    slice.status = SliceStatus::served;
    slice.latency = latency->total;
  }

  // Energy pass: utilization reflects every grant applied this slot.
  for (int i = 0; i < I; ++i) {
    if (outcome.slices[i].status != SliceStatus::served) continue;
    outcome.slices[i].energy =
        compute_energy(config_.topology.slice_paths[i], latencies[i].per_mec, ledger_,
                       config_.topology, config_.power);
  }

  // Reward pass, ascending slice index; each served slice enters the window
  // before its own reward is read so no slice can score above 1/I.
  for (int i = 0; i < I; ++i) {
    SliceOutcome& slice = outcome.slices[i];
    switch (slice.status) {
      case SliceStatus::idle:
        break;
      case SliceStatus::failed:
        slice.reward = reward_failed(I);
        break;
      case SliceStatus::served:
        window_.insert(slice.latency, slice.energy);
        slice.reward = reward_served(window_.min_latency(), window_.min_energy(),
                                     slice.latency, slice.energy, I);
        slice.utility = slice.reward;
        break;
    }
    outcome.shared_reward += slice.reward;
    outcome.utility += slice.utility;
  }

  // Advance to the next slot: release, then fresh requests, so the next
  // observation describes the state the next action will face.
  slot_ += 1;
  ledger_.release_expired();
  generate_requests();
  return outcome;
}

std::vector<double> Environment::observe_global() const {
  const Topology& topo = config_.topology;
  std::vector<double> obs;
  obs.reserve(global_observation_dim());
  for (int m = 0; m < topo.num_mecs(); ++m) {
    obs.push_back(ledger_.remaining_compute(m) / topo.urllc_compute_cap);
  }
  for (int l = 0; l < topo.num_links(); ++l) {
    obs.push_back(ledger_.remaining_bandwidth(l) / topo.urllc_bandwidth_cap);
  }
  for (int i = 0; i < config_.max_slices; ++i) {
    bool present = i < config_.num_slices && pending_[i].has_value();
    if (!present) {
      for (int k = 0; k < kActionDim; ++k) obs.push_back(0.0);
      continue;
    }
    const SliceRequest& req = *pending_[i];
    for (int k = 0; k < kMecsPerSlice; ++k) {
      obs.push_back(config_.compute_demand.hi > 0.0
                        ? req.compute_demand[k] / config_.compute_demand.hi
                        : 0.0);
    }
    for (int k = 0; k < kLinksPerSlice; ++k) {
      obs.push_back(config_.data_size.hi > 0.0 ? req.data_size[k] / config_.data_size.hi
                                               : 0.0);
    }
  }
  return obs;
}

std::vector<double> Environment::observe_local(int slice_id) const {
  if (slice_id < 0 || slice_id >= config_.num_slices) {
    throw UnknownSlice("observe_local: inactive slice id " + std::to_string(slice_id));
  }
  const Topology& topo = config_.topology;
  const SlicePath& path = topo.slice_paths[slice_id];
  std::vector<double> obs;
  obs.reserve(local_observation_dim());
  for (int k = 0; k < kMecsPerSlice; ++k) {
    obs.push_back(ledger_.remaining_compute(path.mecs[k]) / topo.urllc_compute_cap);
  }
  for (int k = 0; k < kLinksPerSlice; ++k) {
    obs.push_back(ledger_.remaining_bandwidth(path.links[k]) / topo.urllc_bandwidth_cap);
  }
  if (pending_[slice_id].has_value()) {
    const SliceRequest& req = *pending_[slice_id];
    for (int k = 0; k < kMecsPerSlice; ++k) {
      obs.push_back(config_.compute_demand.hi > 0.0
                        ? req.compute_demand[k] / config_.compute_demand.hi
                        : 0.0);
    }
    for (int k = 0; k < kLinksPerSlice; ++k) {
      obs.push_back(config_.data_size.hi > 0.0 ? req.data_size[k] / config_.data_size.hi
                                               : 0.0);
    }
  } else {
    for (int k = 0; k < kActionDim; ++k) obs.push_back(0.0);
  }
  return obs;
}

int Environment::global_observation_dim() const {
  return config_.topology.num_mecs() + config_.topology.num_links() +
         kActionDim * config_.max_slices;
}

}  // namespace slicesim
