// SPDX-License-Identifier: Apache-2.0
//
// Small dense linear SDP solver: one complex Hermitian PSD block plus
// nonnegative scalars, solved by a primal-dual interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace wpmec {

struct SdpConstraint {
  enum class Sense { LessEqual, Equal };
  /// Coefficient on S; an empty matrix means zero.
  Eigen::MatrixXcd matrix;
  /// Coefficients on the scalar variables; an empty vector means zero.
  Eigen::VectorXd scalars;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// maximize tr(C S) + c^T x  s.t.  tr(A_j S) + a_j^T x (<= | =) b_j,  S >= 0, x >= 0.
/// psd_dim may be 0, in which case the problem is an LP.
struct LinearSdp {
  int psd_dim = 0;
  int n_scalars = 0;
  Eigen::MatrixXcd objective_matrix;   // empty means zero
  Eigen::VectorXd objective_scalars;   // empty means zero
  std::vector<SdpConstraint> constraints;

  /// Appends a row and returns its index.
  int add(SdpConstraint c) {
    constraints.push_back(std::move(c));
    return static_cast<int>(constraints.size()) - 1;
  }
};

struct SdpOptions {
  double tol = 1e-8;
  int max_iter = 100;
  /// Results whose residuals stay above this after max_iter raise NumericalFailure.
  double accept_tol = 1e-5;
};

struct SdpSolution {
  Eigen::MatrixXcd S;
  Eigen::VectorXd scalars;
  double objective = 0.0;
  double dual_bound = 0.0;  // weak-duality upper bound on the objective
  Eigen::VectorXd multipliers;  // y_j >= 0 for inequality rows, in the max-form sign convention
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Throws Error(Infeasible) when either side diverges, Error(NumericalFailure)
/// when the residuals stay above accept_tol.
SdpSolution solve_linear_sdp(const LinearSdp& problem, const SdpOptions& options = {});

}  // namespace wpmec
