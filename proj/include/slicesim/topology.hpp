#ifndef SLICESIM_TOPOLOGY_HPP
#define SLICESIM_TOPOLOGY_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace slicesim {

// Every slice spans exactly 3 MECs and 2 links, so local observations and
// actions are 5-dimensional.
inline constexpr int kMecsPerSlice = 3;
inline constexpr int kLinksPerSlice = 2;
inline constexpr int kActionDim = kMecsPerSlice + kLinksPerSlice;

using Action = std::array<double, kActionDim>;

struct SlicePath {
  std::array<int, kMecsPerSlice> mecs;
  std::array<int, kLinksPerSlice> links;
};

// Physical substrate plus the resources reserved for slicing on it.
// urllc_compute_cap (J) and urllc_bandwidth_cap (B) bound what the ledger
// may hand out; mec_capacity is the full server capacity used for the
// utilization ratio in the power model.
struct Topology {
  std::vector<double> mec_capacity;    // GHz (Gcycles/s) per server
  double urllc_compute_cap = 0.0;      // J, GHz reserved per MEC
  std::vector<double> link_capacity;   // Gbps per link
  double urllc_bandwidth_cap = 0.0;    // B, Gbps reserved per link
  double snr = 0.0;                    // linear signal-to-noise ratio
  std::vector<SlicePath> slice_paths;  // one path per supportable slice

  int num_mecs() const { return static_cast<int>(mec_capacity.size()); }
  int num_links() const { return static_cast<int>(link_capacity.size()); }

  // Throws ConfigError on violated invariants (caps exceed capacities,
  // nonpositive capacities, out-of-range path indices).
  void validate() const;
};

// 6 MECs at 150 GHz (J = 100 reserved), ring of 6 links plus one chord at
// 10 Gbps (B = 10), linear SNR 10; slice i spans MECs {i, i+1, i+2 mod 6}
// and the two ring links joining them.
Topology default_topology();

// One slice's demand for one slot.
struct SliceRequest {
  int slice_id = 0;
  std::array<double, kMecsPerSlice> compute_demand{};  // E, Gcycles per used MEC
  std::array<double, kLinksPerSlice> data_size{};      // D, Gb per used link
  int slot = 0;
};

// Resources held by one served request, with its occupancy countdown.
struct AllocationGrant {
  int slice_id = 0;
  std::array<double, kMecsPerSlice> compute_alloc{};    // e, GHz per used MEC
  std::array<double, kLinksPerSlice> bandwidth_alloc{}; // b, Gbps per used link
  int occupancy_slots = 1;
  int slot_created = 0;
};

// Tracks active grants and exposes exact remaining-resource accounting.
// Remaining values are never stored: they are recomputed as
// cap - sum(active grants, insertion order) so that accounting stays
// bit-exact and remaining returns to cap exactly once all grants expire.
class ResourceLedger {
 public:
  explicit ResourceLedger(const Topology* topology) : topology_(topology) {}

  double allocated_compute(int mec) const;
  double allocated_bandwidth(int link) const;
  double remaining_compute(int mec) const;
  double remaining_bandwidth(int link) const;

  // True iff adding the grant keeps every touched MEC total <= J and every
  // touched link total <= B (constraints on aggregate allocations).
  bool fits(const AllocationGrant& grant) const;

  void add(AllocationGrant grant);

  // Decrements every occupancy counter, drops grants reaching zero.
  // Returns the number of grants released.
  int release_expired();

  const std::vector<AllocationGrant>& active() const { return grants_; }
  void clear() { grants_.clear(); }

 private:
  const Topology* topology_;
  std::vector<AllocationGrant> grants_;  // insertion order
};

}  // namespace slicesim

#endif  // SLICESIM_TOPOLOGY_HPP
