#include "slicesim/topology.hpp"

#include <algorithm>

#include "slicesim/errors.hpp"

namespace slicesim {

void Topology::validate() const {
  if (mec_capacity.empty() || link_capacity.empty()) {
    throw ConfigError("topology: needs at least one MEC and one link");
  }
  for (double c : mec_capacity) {
    if (!(c > 0.0)) throw ConfigError("topology: MEC capacities must be > 0");
    if (urllc_compute_cap > c) {
      throw ConfigError("topology: reserved compute cap J exceeds a MEC capacity");
    }
  }
  for (double c : link_capacity) {
    if (!(c > 0.0)) throw ConfigError("topology: link capacities must be > 0");
    if (urllc_bandwidth_cap > c) {
      throw ConfigError("topology: reserved bandwidth cap B exceeds a link capacity");
    }
  }
  if (!(urllc_compute_cap > 0.0) || !(urllc_bandwidth_cap > 0.0)) {
    throw ConfigError("topology: reserved caps J and B must be > 0");
  }
  if (!(snr >= 0.0)) throw ConfigError("topology: snr must be >= 0");
  for (const SlicePath& path : slice_paths) {
    for (int m : path.mecs) {
      if (m < 0 || m >= num_mecs()) throw ConfigError("topology: path MEC index out of range");
    }
    for (int l : path.links) {
      if (l < 0 || l >= num_links()) throw ConfigError("topology: path link index out of range");
    }
  }
}

Topology default_topology() {
  Topology topo;
  topo.mec_capacity.assign(6, 150.0);
  topo.urllc_compute_cap = 100.0;
  topo.link_capacity.assign(7, 10.0);  // ring of 6 plus one chord
  topo.urllc_bandwidth_cap = 10.0;
  topo.snr = 10.0;  // 10 dB expressed as a linear ratio
  topo.slice_paths.resize(6);
  for (int i = 0; i < 6; ++i) {
    topo.slice_paths[i].mecs = {i, (i + 1) % 6, (i + 2) % 6};
    topo.slice_paths[i].links = {i, (i + 1) % 6};
  }
  return topo;
}

double ResourceLedger::allocated_compute(int mec) const {
  double total = 0.0;
  for (const AllocationGrant& g : grants_) {
    const SlicePath& path = topology_->slice_paths[g.slice_id];
    for (int k = 0; k < kMecsPerSlice; ++k) {
      if (path.mecs[k] == mec) total += g.compute_alloc[k];
    }
  }
  return total;
}

double ResourceLedger::allocated_bandwidth(int link) const {
  double total = 0.0;
  for (const AllocationGrant& g : grants_) {
    const SlicePath& path = topology_->slice_paths[g.slice_id];
    for (int k = 0; k < kLinksPerSlice; ++k) {
      if (path.links[k] == link) total += g.bandwidth_alloc[k];
    }
  }
  return total;
}

double ResourceLedger::remaining_compute(int mec) const {
  return topology_->urllc_compute_cap - allocated_compute(mec);
}

double ResourceLedger::remaining_bandwidth(int link) const {
  return topology_->urllc_bandwidth_cap - allocated_bandwidth(link);
}

bool ResourceLedger::fits(const AllocationGrant& grant) const {
  const SlicePath& path = topology_->slice_paths[grant.slice_id];
  // The would-be totals are accumulated in exactly the order
  // allocated_compute/allocated_bandwidth would use after insertion, so an
  // accepted grant can never drive remaining below zero, not even by an ulp.
  for (int k = 0; k < kMecsPerSlice; ++k) {
    int mec = path.mecs[k];
    double total = allocated_compute(mec);
    for (int j = 0; j < kMecsPerSlice; ++j) {
      if (path.mecs[j] == mec) total += grant.compute_alloc[j];
    }
    if (total > topology_->urllc_compute_cap) return false;
  }
  for (int k = 0; k < kLinksPerSlice; ++k) {
    int link = path.links[k];
    double total = allocated_bandwidth(link);
    for (int j = 0; j < kLinksPerSlice; ++j) {
      if (path.links[j] == link) total += grant.bandwidth_alloc[j];
    }
    if (total > topology_->urllc_bandwidth_cap) return false;
  }
  return true;
}

void ResourceLedger::add(AllocationGrant grant) { grants_.push_back(grant); }

int ResourceLedger::release_expired() {
  for (AllocationGrant& g : grants_) g.occupancy_slots -= 1;
  auto dead = std::remove_if(grants_.begin(), grants_.end(),
                             [](const AllocationGrant& g) { return g.occupancy_slots <= 0; });
  int released = static_cast<int>(grants_.end() - dead);
  grants_.erase(dead, grants_.end());
  return released;
}

}  // namespace slicesim
