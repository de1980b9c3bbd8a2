// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization between the time stage and the bandwidth stage,
// plus the two reference schemes: local computing only, and fixed uniform
// energy beamforming with optimized offloading.

#pragma once

#include <vector>

#include "wpmec/instance.hpp"
#include "wpmec/model.hpp"
#include "wpmec/p21.hpp"

namespace wpmec {

struct AlternatingOptions {
  DualSolveOptions stage;
  double alt_tol = 1e-4;  // relative objective improvement
  int max_alt_iters = 50;
};

/// Alternating loop in scaled units. `history` receives the accepted
/// objective (Mbit) after the initial time stage and after every iteration.
StageResult solve_alternating(const Instance& inst, const AlternatingOptions& options,
                              std::vector<double>* history = nullptr, int* alt_iterations = nullptr,
                              bool* alt_converged = nullptr);

SolveReport solve_p2(const Instance& inst, const AlternatingOptions& options = {});
SolveReport solve_p2(const SystemConfig& config, const ChannelSet& channels, const Pairing& pairing,
                     const AlternatingOptions& options = {});

/// Every user computes locally; no helpers are used.
SolveReport benchmark_local_only(const SystemConfig& config, const ChannelSet& channels,
                                 const AlternatingOptions& options = {});

/// S fixed to blockdiag((P_n / N_t) I); offloading optimized by the alternating loop.
SolveReport benchmark_uniform_beamforming(const SystemConfig& config, const ChannelSet& channels,
                                          const Pairing& pairing, const AlternatingOptions& options = {});

/// Closed-form single-user local-only optimum (bits):
/// (eta T^3 (sum_n sqrt(P_n) ||g_n||)^2 / (xi C^3))^{1/3}.
double single_user_local_bits(const SystemConfig& config, const ChannelSet& channels, int user = 0);

}  // namespace wpmec
