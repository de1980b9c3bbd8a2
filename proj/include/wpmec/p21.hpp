// SPDX-License-Identifier: Apache-2.0
//
// Time, task-split and energy-beamforming allocation under fixed
// bandwidths, solved through its Lagrange dual: closed-form inner
// maximizers, an ellipsoid search over the multipliers and an SDP recovery
// step that turns the optimal multipliers into a feasible allocation.
//
// Scalar closed forms are unit-agnostic. Everything that takes an Instance
// works in the scaled units of instance.hpp.

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "wpmec/instance.hpp"
#include "wpmec/mathkit.hpp"
#include "wpmec/model.hpp"
#include "wpmec/sdp.hpp"

namespace wpmec {

/// argmax_l  l - lambda xi C^3 l^3 / T^2  =  T / sqrt(3 lambda xi C^3).
double local_bits_closed_form(double lambda, double xi, double C, double T);

/// Per-slot rates minimizing the per-bit Lagrangian cost of each slot.
/// rho = 0 gives all-zero rates; beta = 0 gives r3 = +inf.
RateTriple rates_closed_form(double lambda, double mu, double rho, double b, double h, double N0,
                             double beta, double xi, double C);

/// Net per-bit Lagrangian gain of offloading at the given rates:
///   1 - [lambda E1/l + rho/r1] - [mu xi C^3 r2^2 + rho/r2] - [mu E3/l + rho/r3].
/// A zero rate with rho = 0 uses the r -> 0 limit of its bracket.
double gain_G(const RateTriple& rates, double lambda, double mu, double rho, double b, double h,
              double N0, double beta, double xi, double C);

/// Objective of the per-pair subproblem at (l, t1, t2, t3), without the
/// constant rho T: l - lambda E1 - mu E2 - mu E3 - rho (t1 + t2 + t3).
double pair_subproblem_objective(double bits, const std::array<double, 3>& t, double lambda, double mu,
                                 double rho, double b, double h, double N0, double beta, double xi,
                                 double C);

/// Offloaded bits prescribed by the sign of G alone: 0 when G <= 0 and
/// min_i r_i T when G > 0. This ignores the slot-length bound t <= T that
/// keeps the true supremum finite; see pair_inner for the exact maximizer.
double offload_by_gain_sign(double gain, const RateTriple& rates, double T);

/// Scalar data of one user-helper pair in consistent units.
struct PairParams {
  double b = 0.0;      // bandwidth
  double h = 0.0;      // d2d power gain
  double noise = 0.0;  // N0
  double beta = 0.0;
  double cubic = 0.0;  // xi C^3 of the helper
  double T = 0.0;
};

struct PairInner {
  RateTriple rates;
  double gain = 0.0;
  double bits = 0.0;
  std::array<double, 3> times{0.0, 0.0, 0.0};
  double value = 0.0;  // supremum of the subproblem plus rho T
};

/// Exact maximizer of the per-pair subproblem over l >= 0, 0 <= t_i <= T.
PairInner pair_inner(const PairParams& p, double lambda, double mu, double rho);

/// Minimizes pair_inner(...).value over rho >= 0. The returned bits satisfy
/// sum_i t_i = T whenever rho > 0, which zeroes the rho-slack.
PairInner pair_inner_min_rho(const PairParams& p, double lambda, double mu, double* rho_out);

/// Inner maximizers of the Lagrangian at one dual point (S* = 0 unless the
/// instance fixes S). Per-pair entries follow Instance::pairs.
struct InnerSolution {
  std::vector<double> local_bits;
  std::vector<RateTriple> rates;
  std::vector<double> gains;
  std::vector<double> offload_bits;
  std::vector<std::array<double, 3>> times;
  std::vector<double> pair_values;
  double value = 0.0;  // dual function value [Mbit]
};

/// Dual LMI matrix F(lambda, mu, gamma) = T eta (sum lambda g g^H + sum mu g g^H) - sum gamma Sigma_n.
Eigen::MatrixXcd dual_lmi(const DualPoint& d, const Instance& inst);

/// Gradient of nu^H F nu in canonical dual order for the top eigenvector nu of F.
Eigen::VectorXd lmi_cut(const DualPoint& d, const Instance& inst);

InnerSolution inner_solution(const DualPoint& d, const Instance& inst, const std::vector<double>& bandwidths);

/// Dual function value. Throws DualInfeasible outside the dual domain.
double evaluate_dual(const DualPoint& d, const Instance& inst, const std::vector<double>& bandwidths);

/// Constraint slacks at the inner maximizers, canonical dual order.
Eigen::VectorXd dual_subgradient(const DualPoint& d, const InnerSolution& inner, const Instance& inst,
                                 const std::vector<double>& bandwidths);

struct DualSolveOptions {
  double gap_tol = 1e-3;
  /// Minimize out the time prices per pair instead of searching over them.
  bool eliminate_time_prices = true;
  EllipsoidOptions ellipsoid = default_ellipsoid();
  SdpOptions sdp;
  int recovery_rounds = 8;

  static EllipsoidOptions default_ellipsoid() {
    EllipsoidOptions o;
    o.rel_tol = 1e-7;
    o.abs_tol = 1e-13;
    return o;
  }
};

/// Result of one dual-based stage in scaled units.
struct StageResult {
  ScaledAllocation alloc;
  double primal = 0.0;  // Mbit
  double dual = 0.0;    // Mbit
  int iterations = 0;
  bool converged = false;
  DualPoint duals;
  double bandwidth_price = 0.0;  // bandwidth stage only
  double rel_gap() const;
};

/// Builds and solves the recovery SDP at the given multipliers.
ScaledAllocation recover_primal(const DualPoint& d, const Instance& inst, const std::vector<double>& bandwidths,
                                const DualSolveOptions& options = {});

StageResult solve_p21_scaled(const Instance& inst, const std::vector<double>& bandwidths,
                             const DualSolveOptions& options = {});

/// Public wrapper; bandwidths in MHz follow Instance::pairs.
SolveReport solve_p21(const Instance& inst, const std::vector<double>& bandwidths,
                      const DualSolveOptions& options = {});

/// Converts a stage result into the public report.
SolveReport make_report(const Instance& inst, const StageResult& r, double gap_tol);

}  // namespace wpmec
