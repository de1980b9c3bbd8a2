// SPDX-License-Identifier: Apache-2.0
//
// Experiment sweeps: one axis (helpers M, block length T, ET power P or the
// pairing scheme) swept over a list of values, R channel realizations per
// point with seeds base_seed + i, every requested scheme solved on each
// realization. Results are CSV rows plus per-point means and standard errors.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wpmec/model.hpp"
#include "wpmec/pairing.hpp"
#include "wpmec/radio.hpp"
#include "wpmec/serialize.hpp"

namespace wpmec {

enum class SweepAxis { Helpers, BlockDuration, Power, Pairing };

const char* to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepConfig {
  SystemConfig system;
  TopologySpec topology;
  SweepAxis axis = SweepAxis::Helpers;
  std::vector<double> values;                     // numeric axes
  std::vector<PairingScheme> pairing_values;      // pairing axis
  std::vector<Scheme> schemes{Scheme::Proposed, Scheme::Uniform, Scheme::Local};
  /// Pairing used on the numeric axes when K > 1.
  PairingScheme pairing = PairingScheme::Greedy;
  std::uint64_t base_seed = 1;
  int realizations = 20;
  /// Helper m gets switch capacitance helper_xi_cycle[m % size]; empty keeps the config.
  std::vector<double> helper_xi_cycle;
  AlternatingOptions options;
  /// Record wall time; off by default so repeated runs are byte-identical.
  bool timing = false;
};

/// Throws ConfigError naming the field.
SweepConfig sweep_config_from_json(const Json& j);
SweepConfig read_sweep_config(const std::string& path);

/// System parameters at one sweep point (numeric axes).
SystemConfig config_at(const SweepConfig& cfg, double value);

struct SweepRow {
  std::string axis;
  std::string value;
  std::uint64_t seed = 0;
  std::string scheme;
  double objective_bits = 0.0;
  double local_bits = 0.0;
  double offload_bits = 0.0;
  double user_tx_energy = 0.0;  // J, summed over users
  double user_comp_energy = 0.0;
  double helper_comp_energy = 0.0;
  double helper_tx_energy = 0.0;
  double rel_gap = 0.0;
  int iters = 0;
  std::string status;
  double wall_ms = 0.0;
  // Not part of the CSV.
  double worst_violation = 0.0;
  std::vector<double> history;
  bool failed = false;
};

/// Solves one (point, seed) cell for every scheme. Solver failures become
/// rows with failed = true and the error kind as status.
std::vector<SweepRow> run_cell(const SweepConfig& cfg, std::size_t point, std::uint64_t seed);

/// All cells, ordered by point, then seed, then scheme. `threads` <= 0 uses worker_threads().
std::vector<SweepRow> run_sweep(const SweepConfig& cfg, int threads = 0);

/// Worker count: WPMEC_THREADS when set, else the hardware concurrency.
int worker_threads();

extern const char* const kSweepCsvHeader;
extern const char* const kAggregateCsvHeader;

std::string rows_csv(const std::vector<SweepRow>& rows);
/// Mean and standard error per (point, scheme) over the non-failed rows.
std::string aggregate_csv(const std::vector<SweepRow>& rows);

}  // namespace wpmec
