// SPDX-License-Identifier: Apache-2.0
//
// Physical-layer model: channel generation, the energy and throughput
// formulas of the three-slot offloading protocol, and a constraint auditor
// for complete allocations.
//
// The scalar formulas are unit-agnostic: pass SI values and get SI results,
// or pass the scaled units of instance.hpp and get scaled results.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wpmec/instance.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  std::vector<Point2> et_positions;
  std::vector<Point2> user_positions;
  std::vector<Point2> helper_positions;
  double pathloss_ref_db = -30.0;  // PL_0 at 1 m
  double pathloss_exponent = 3.0;  // theta
  double min_distance = 1.0;       // distances are clamped to this [m]

  /// PL_0 * d^-theta with d clamped to min_distance.
  double mean_gain(const Point2& a, const Point2& b) const;
};

struct TopologySpec {
  std::vector<Point2> et_positions{{-5.0, 0.0}, {5.0, 0.0}};
  Point2 center{0.0, 0.0};
  double user_radius = 5.0;
  double helper_radius = 5.0;
  double pathloss_ref_db = -30.0;
  double pathloss_exponent = 3.0;
  double min_distance = 1.0;
};

/// ETs at fixed points, users and helpers uniform in a disc. Deterministic per seed.
Topology make_topology(const TopologySpec& spec, int n_users, int n_helpers, std::uint64_t seed);

/// Rayleigh fading: every complex entry ~ CN(0, PL_0 d^-theta); h_{k,m} = |CN(0, PL)|^2.
/// Deterministic per (seed, node): draws come from a counter-based stream.
ChannelSet generate_channels(const Topology& topology, const SystemConfig& config, std::uint64_t seed);

/// T * eta * g^H S g, clamped at 0 for round-off negatives.
double harvested_energy(const Eigen::MatrixXcd& S, const Eigen::VectorXcd& g, double T, double eta);

/// t b log2(1 + h q / (N0 b)).
double offload_bits(double t, double b, double h, double q, double N0);

/// (N0 t b / h)(2^{l/(t b)} - 1); zero for l = 0.
double offload_energy(double bits, double t, double b, double h, double N0);

/// xi C^3 l^3 / t2^2; zero for l = 0.
double helper_compute_energy(double bits, double t2, double xi, double C);

/// (N0 t3 b / h)(2^{beta l/(t3 b)} - 1); zero when beta l = 0.
double download_energy(double bits, double t3, double b, double h, double N0, double beta);

/// xi C^3 l^3 / T^2.
double local_compute_energy(double bits, double T, double xi, double C);

struct ConstraintAudit {
  std::vector<double> power;         // P_n - tr(Sigma_n S)          [W]
  double bandwidth = 0.0;            // B - sum b                    [MHz]
  std::vector<double> time;          // T - sum_i t^(i), pair order  [s]
  std::vector<double> user_energy;   // harvest - comp - tx          [mJ]
  std::vector<double> helper_energy; // harvest - comp - tx, pairs   [mJ]
  double psd = 0.0;                  // min eigenvalue of S
  double nonnegativity = 0.0;        // most negative scalar variable
  double worst_violation = 0.0;

  bool feasible(double tol = 1e-6) const { return worst_violation <= tol; }
};

/// Signed slack of every constraint of the joint problem, in scaled units.
ConstraintAudit audit(const SystemConfig& config, const ChannelSet& channels, const Pairing& pairing,
                      const PrimalAllocation& alloc);
ConstraintAudit audit(const Instance& inst, const ScaledAllocation& alloc);

}  // namespace wpmec
