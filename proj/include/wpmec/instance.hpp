// SPDX-License-Identifier: Apache-2.0
//
// Solver-side view of one problem instance in scaled units. Task bits are
// held in Mbit, energies in mJ, bandwidth in MHz, time in s and ET power in
// W. With these units the cubic computing-energy coefficients are O(100)
// instead of O(1e-19), which keeps the dual search and the SDP well scaled.
// All SI <-> scaled conversion happens here.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "wpmec/model.hpp"

namespace wpmec {

namespace units {
inline constexpr double kBitsPerUnit = 1e6;     // Mbit
inline constexpr double kJoulesPerUnit = 1e-3;  // mJ
inline constexpr double kHzPerUnit = 1e6;       // MHz
}  // namespace units

struct ScaledPair {
  int user = 0;
  int helper = 0;
  double gain = 0.0;   // h_{k,m}
  double cubic = 0.0;  // xi C^3 [mJ s^2 / Mbit^3]
  Eigen::VectorXcd g;  // ET -> helper channel, scaled like Instance::g_user
};

struct Instance {
  int n_users = 0;
  int n_ets = 0;
  int antennas = 0;
  int dim = 0;
  double T = 0.0;
  double B = 0.0;      // MHz
  double noise = 0.0;  // N0 expressed in mJ / (s MHz)
  double eta = 0.0;
  double beta = 0.0;
  std::vector<double> power;       // W
  std::vector<double> user_cubic;  // xi_{k,0} C_{k,0}^3 [mJ s^2 / Mbit^3]
  /// Scaled by sqrt(1e3) so that T * eta * g^H S g is in mJ with S in W.
  std::vector<Eigen::VectorXcd> g_user;
  std::vector<ScaledPair> pairs;
  /// When set the energy covariance is a constant, not a decision variable.
  std::optional<Eigen::MatrixXcd> fixed_cov;

  static Instance build(const SystemConfig& config, const ChannelSet& channels,
                        const Pairing& pairing);

  int n_pairs() const { return static_cast<int>(pairs.size()); }
  /// T * eta * g^H S g  [mJ]
  double harvest(const Eigen::MatrixXcd& S, const Eigen::VectorXcd& g) const;
  /// tr(Sigma_n S)
  double et_power(const Eigen::MatrixXcd& S, int n) const;
  /// Block-diagonal S with (P_n / N_t) I per ET.
  Eigen::MatrixXcd uniform_covariance() const;
  /// Copy keeping only the listed pairs (indices into `pairs`).
  Instance subset(const std::vector<int>& keep) const;
};

/// An allocation in scaled units; per-pair vectors follow Instance::pairs.
struct ScaledAllocation {
  Eigen::MatrixXcd S;
  std::vector<double> local;
  std::vector<double> offload;
  std::vector<double> bandwidth;
  std::vector<std::array<double, 3>> times;

  static ScaledAllocation zero(const Instance& inst);
  double objective() const;
};

/// Per-node energy bookkeeping for one allocation [mJ].
struct EnergyLedger {
  std::vector<double> user_harvest, user_tx, user_comp;
  std::vector<double> helper_harvest, helper_tx, helper_comp;  // pair order
};

EnergyLedger energy_ledger(const Instance& inst, const ScaledAllocation& a);

PrimalAllocation to_public(const Instance& inst, const ScaledAllocation& a);
ScaledAllocation from_public(const Instance& inst, const PrimalAllocation& a);

}  // namespace wpmec
