// SPDX-License-Identifier: Apache-2.0
//
// Internal helpers shared by the two dual-based stages: which users and
// pairs take part, how multipliers are laid out in the ellipsoid vector,
// and the tangent-cut recovery SDP with its feasibility polish.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wpmec/instance.hpp"
#include "wpmec/model.hpp"
#include "wpmec/sdp.hpp"

namespace wpmec::detail {

/// Largest energy node g can harvest in one block [mJ].
double harvest_upper_bound(const Instance& inst, const Eigen::VectorXcd& g);

/// Harvest term used in the dual: the fixed covariance when there is one, else S = 0.
double dual_harvest(const Instance& inst, const Eigen::VectorXcd& g);

struct ActiveSet {
  std::vector<int> users;  // can harvest energy
  std::vector<int> pairs;  // active user, positive bandwidth, helper can harvest
};

/// pair_ok[i] = false excludes pair i regardless of the other checks.
ActiveSet active_set(const Instance& inst, const std::vector<bool>& pair_ok);

/// Position of each multiplier in the ellipsoid vector.
struct DualLayout {
  ActiveSet active;
  bool with_rho = false;
  bool with_band = false;
  bool with_gamma = false;
  int n_ets = 0;

  int n_users() const { return static_cast<int>(active.users.size()); }
  int n_pairs() const { return static_cast<int>(active.pairs.size()); }
  int lambda_at(int j) const { return j; }
  int mu_at(int j) const { return n_users() + j; }
  int rho_at(int j) const { return n_users() + n_pairs() + j; }
  int band_at() const { return n_users() + n_pairs() * (with_rho ? 2 : 1); }
  int gamma_at(int n) const { return band_at() + (with_band ? 1 : 0) + n; }
  int dim() const { return gamma_at(0) + (with_gamma ? n_ets : 0); }
};

struct RecoveryPair {
  int index = 0;              // into Instance::pairs
  double user_cost = 0.0;     // user transmit energy per bit
  double helper_cost = 0.0;   // linear helper energy per bit
  double helper_cubic = 0.0;  // helper energy = helper_cubic l^3 + helper_cost l
  double time_coef = 0.0;     // time_coef l <= T when positive
  double band_coef = 0.0;     // sum band_coef l <= band_budget when positive
  double hint = 0.0;          // bits predicted by the dual
};

struct RecoveryInput {
  std::vector<RecoveryPair> pairs;
  std::vector<double> local_hint;  // per user
  double band_budget = 0.0;
};

struct RecoveryOutput {
  Eigen::MatrixXcd S;
  std::vector<double> local;    // per user
  std::vector<double> offload;  // per RecoveryPair
  double relaxed = 0.0;         // objective of the last cut relaxation
  double objective = 0.0;       // after polish
};

RecoveryOutput recover(const Instance& inst, const RecoveryInput& in, const SdpOptions& sdp, int rounds);

/// Largest l >= 0 with w l^3 + v l <= H.
double max_bits_within(double w, double v, double H);

}  // namespace wpmec::detail
