// SPDX-License-Identifier: Apache-2.0
//
// Bandwidth, task-split and energy-beamforming allocation under fixed slot
// times. Same dual machinery as the time stage: per-pair stationary points
// inside an ellipsoid search, then an SDP recovery with the spectral loads
// l / b held at their dual-optimal values.

#pragma once

#include <array>
#include <limits>
#include <vector>

#include "wpmec/instance.hpp"
#include "wpmec/model.hpp"
#include "wpmec/p21.hpp"

namespace wpmec {

struct PairStationaryPoint {
  double bits = 0.0;
  double bandwidth = 0.0;
  double spectral_load = 0.0;  // bits / bandwidth
  bool capped = false;         // bandwidth pinned at the cap
  bool priced_out = false;     // no positive bits pay off
  double value = 0.0;          // per-pair Lagrangian at the point
};

/// x ln2 2^x - 2^x + 1, the b-derivative kernel of (N0 t b / h)(2^{l/(t b)} - 1).
double spectral_kernel(double x);

/// Per-pair Lagrangian l - a E1 - c E2 - c E3 - d b at fixed slot times.
double pair_bandwidth_lagrangian(double bits, double bandwidth, double a, double c, double d,
                                 const std::array<double, 3>& t, double h, double N0, double beta, double xi,
                                 double C);

/// Maximizer of pair_bandwidth_lagrangian over l >= 0, 0 <= b <= band_cap.
/// Never throws; `priced_out` marks the l = b = 0 answer.
PairStationaryPoint pair_bandwidth_inner(double a, double c, double d, const std::array<double, 3>& t, double h,
                                         double N0, double beta, double cubic,
                                         double band_cap = std::numeric_limits<double>::infinity());

/// Interior stationary point of the per-pair Lagrangian. Throws
/// NoInteriorSolution when offloading is priced out at these multipliers.
PairStationaryPoint pair_stationary_point(double a, double c, double d, const std::array<double, 3>& t, double h,
                                          double N0, double beta, double xi, double C,
                                          double band_cap = std::numeric_limits<double>::infinity());

/// Times follow Instance::pairs. Pairs with a zero slot needed for offloading
/// are left idle. StageResult::bandwidth_price holds the bandwidth multiplier.
StageResult solve_p22_scaled(const Instance& inst, const std::vector<std::array<double, 3>>& times,
                             const DualSolveOptions& options = {});

SolveReport solve_p22(const Instance& inst, const std::vector<std::array<double, 3>>& times,
                      const DualSolveOptions& options = {});

}  // namespace wpmec
