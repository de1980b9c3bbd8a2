// SPDX-License-Identifier: Apache-2.0
//
// Domain types shared by every solver: system parameters, channel
// realizations, user-helper pairings, primal allocations and dual points.
// Public quantities are in SI units (bits, seconds, Hz, W, J).

#pragma once

#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wpmec {

enum class ErrorKind {
  DimensionMismatch,
  NonPositiveParameter,
  OverlappingPairing,
  DomainError,
  NotHermitian,
  DegenerateSlot,
  NoFeasiblePointFound,
  Infeasible,
  NumericalFailure,
  DualInfeasible,
  NoInteriorSolution,
  EnumerationCapExceeded,
  ConfigError,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. `field()` names the offending
/// parameter when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string field, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

struct ComputeProfile {
  double switch_capacitance = 1e-28;  // xi, effective switched capacitance
  double cycles_per_bit = 1e3;        // C, CPU cycles per task input-bit
};

struct SystemConfig {
  int n_ets = 2;
  int antennas_per_et = 4;
  int n_users = 1;
  int n_helpers = 0;
  double block_duration = 0.3;     // T [s]
  double total_bandwidth = 3e6;    // B [Hz]
  double noise_psd = 1e-15;        // N0 [W/Hz]
  double eh_efficiency = 0.8;      // eta
  double result_ratio = 0.2;       // beta
  std::vector<double> power_budget;             // P_n [W], one per ET
  std::vector<ComputeProfile> user_compute;     // one per user
  std::vector<ComputeProfile> helper_compute;   // one per helper

  int dim() const { return n_ets * antennas_per_et; }

  /// Uniform parameters for every ET, user and helper.
  static SystemConfig uniform(int n_ets, int antennas_per_et, int n_users, int n_helpers,
                              double power_per_et = 6.0);
};

struct ChannelSet {
  std::vector<Eigen::VectorXcd> et_user;    // g_{k,0}, length N_t*N
  std::vector<Eigen::VectorXcd> et_helper;  // g_m, length N_t*N
  Eigen::MatrixXd d2d_gain;                 // h_{k,m}, K x M power gains
};

struct PairIndex {
  int user = 0;
  int helper = 0;
  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Helper sets M_k, one ordered list of zero-based helper indices per user.
struct Pairing {
  std::vector<std::vector<int>> helper_sets;

  static Pairing empty(int n_users);
  /// Every helper assigned to user 0.
  static Pairing all_to_first(int n_users, int n_helpers);
  /// assignment[m] = user of helper m.
  static Pairing from_assignment(int n_users, std::span<const int> assignment);

  int n_pairs() const;
  /// Pairs in canonical order: users ascending, helpers in set order.
  std::vector<PairIndex> pairs() const;
  /// Canonical key, identical for pairings with the same sets.
  std::string key() const;
};

/// One point of the joint allocation problem. Per-pair vectors follow
/// `pairs` order.
struct PrimalAllocation {
  Eigen::MatrixXcd energy_cov;                // S [W]
  std::vector<double> local_bits;             // l_{k,0} [bits]
  std::vector<PairIndex> pairs;
  std::vector<double> offload_bits;           // l_{k,m} [bits]
  std::vector<double> bandwidths;             // b_{k,m} [Hz]
  std::vector<std::array<double, 3>> slot_times;  // t^(1..3)_{k,m} [s]

  static PrimalAllocation zero(const SystemConfig& config, const Pairing& pairing);
  double total_bits() const;
  double offloaded_bits() const;
  double local_total_bits() const;
};

/// Multipliers of the time-allocation dual. Flattened as
/// [lambda_1..lambda_K, mu (pair order), rho (pair order), gamma_1..gamma_N].
struct DualPoint {
  std::vector<double> lambda;
  std::vector<double> mu;
  std::vector<double> rho;
  std::vector<double> gamma;

  static constexpr double kPositiveFloor = 1e-9;

  Eigen::VectorXd flatten() const;
  static DualPoint unflatten(std::span<const double> x, int n_users, int n_pairs, int n_ets);
  bool satisfies_bounds() const;
};

struct RateTriple {
  double r1 = 0.0;  // offloading
  double r2 = 0.0;  // remote computing
  double r3 = 0.0;  // result downloading (+inf when nothing is returned)
};

enum class SolveStatus { Converged, IterLimit, Infeasible };
const char* to_string(SolveStatus status);

struct SolveReport {
  double objective_bits = 0.0;
  PrimalAllocation allocation;
  double dual_value = 0.0;    // bits
  double rel_gap = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  /// Accepted objective after each alternating iteration (bits).
  std::vector<double> history;
  /// Final multipliers in scaled units; empty when not applicable.
  std::vector<double> duals;
};

void validate(const SystemConfig& config);
void validate(const SystemConfig& config, const ChannelSet& channels);
void validate(const SystemConfig& config, const ChannelSet& channels, const Pairing& pairing);

}  // namespace wpmec
