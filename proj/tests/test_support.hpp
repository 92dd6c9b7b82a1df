#ifndef SLICESIM_TEST_SUPPORT_HPP
#define SLICESIM_TEST_SUPPORT_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "slicesim/env.hpp"
#include "slicesim/mlp.hpp"

namespace slicesim::testing {

// Central finite differences over a parameter vector; the oracle used by
// every gradient check. Independent of the backward implementation.
inline std::vector<double> finite_difference(
    std::vector<double>& params, const std::function<double()>& objective,
    double h = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    const double hi = objective();
    params[k] = saved - h;
    const double lo = objective();
    params[k] = saved;
    grad[k] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

// |a - b| <= tol * max(1, |a|, |b|): relative for large values, absolute
// below 1 where finite-difference noise dominates.
inline bool close_mixed(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double max_mixed_error(const std::vector<double>& a,
                              const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst,
                     std::fabs(a[k] - b[k]) /
                         std::max({1.0, std::fabs(a[k]), std::fabs(b[k])}));
  }
  return worst;
}

// All slices share the same 3 MECs and 2 links; used by contention tests.
inline Topology shared_path_topology(int num_paths) {
  Topology topo;
  topo.mec_capacity.assign(3, 150.0);
  topo.urllc_compute_cap = 100.0;
  topo.link_capacity.assign(2, 10.0);
  topo.urllc_bandwidth_cap = 10.0;
  topo.snr = 10.0;
  topo.slice_paths.assign(num_paths, SlicePath{{0, 1, 2}, {0, 1}});
  return topo;
}

// Two slices on disjoint MECs/links; used by symmetric-reward tests.
inline Topology disjoint_topology() {
  Topology topo;
  topo.mec_capacity.assign(6, 150.0);
  topo.urllc_compute_cap = 100.0;
  topo.link_capacity.assign(6, 10.0);
  topo.urllc_bandwidth_cap = 10.0;
  topo.snr = 10.0;
  topo.slice_paths = {SlicePath{{0, 1, 2}, {0, 1}}, SlicePath{{3, 4, 5}, {3, 4}}};
  return topo;
}

}  // namespace slicesim::testing

#endif  // SLICESIM_TEST_SUPPORT_HPP
