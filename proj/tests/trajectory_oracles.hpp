#pragma once

// Test-only reference constructions for the min-snap solver. These build each
// segment from explicit endpoint derivatives (Hermite form) instead of the
// global continuity system used by the library.

#include "agrisim/trajectory.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace agrisim::oracle {

/// Degree-7 polynomial on [0, T] with prescribed derivatives 0..3 at both ends.
inline std::array<double, 8> hermite7(const std::array<double, 4>& start, const std::array<double, 4>& end, double T) {
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> b;
  for (int order = 0; order < 4; ++order) {
    for (int k = order; k < 8; ++k) {
      double factor = 1.0;
      for (int j = 0; j < order; ++j) factor *= k - j;
      a(order, k) = (k == order) ? factor : 0.0;
      a(4 + order, k) = factor * std::pow(T, k - order);
    }
    b[order] = start[static_cast<std::size_t>(order)];
    b[4 + order] = end[static_cast<std::size_t>(order)];
  }
  const Eigen::Matrix<double, 8, 1> c = a.fullPivLu().solve(b);
  std::array<double, 8> out{};
  for (int k = 0; k < 8; ++k) out[static_cast<std::size_t>(k)] = c[k];
  return out;
}

/// Snap cost of a 1-D piecewise trajectory through `values` given the free
/// interior derivatives 1..3 (`interior[i]` for knot i+1).
inline double snap_cost_with_free_derivatives(const std::vector<double>& values, const std::vector<double>& durations,
                                              const std::vector<std::array<double, 3>>& interior) {
  double cost = 0.0;
  for (std::size_t s = 0; s < durations.size(); ++s) {
    std::array<double, 4> start{values[s], 0, 0, 0};
    std::array<double, 4> end{values[s + 1], 0, 0, 0};
    if (s > 0) {
      for (int k = 0; k < 3; ++k) start[static_cast<std::size_t>(k + 1)] = interior[s - 1][static_cast<std::size_t>(k)];
    }
    if (s + 1 < durations.size()) {
      for (int k = 0; k < 3; ++k) end[static_cast<std::size_t>(k + 1)] = interior[s][static_cast<std::size_t>(k)];
    }
    cost += PiecewiseTrajectory::segment_snap_cost(hermite7(start, end, durations[s]), durations[s]);
  }
  return cost;
}

}  // namespace agrisim::oracle
