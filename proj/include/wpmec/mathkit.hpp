// SPDX-License-Identifier: Apache-2.0
//
// Numerical kernels: principal-branch Lambert W, Hermitian extreme
// eigenpairs and a central-cut ellipsoid method.

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace wpmec {

/// Principal branch W0(y) for y >= -1/e. Relative accuracy ~1e-15.
double lambert_w0(double y);
/// 1 + W0((u - 1)/e) for u >= 0, accurate near u = 0 where W0 is close to -1.
double one_plus_w0_shifted(double u);

struct EigPair {
  double value = 0.0;
  Eigen::VectorXcd vector;  // unit norm
};

/// Smallest eigenvalue of a Hermitian matrix and a unit eigenvector.
EigPair hermitian_min_eigpair(const Eigen::MatrixXcd& F);
/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector.
EigPair hermitian_max_eigpair(const Eigen::MatrixXcd& F);

struct CutOracleResponse {
  enum class Kind { ObjectiveCut, FeasibilityCut };
  Kind kind = Kind::ObjectiveCut;
  double value = 0.0;  // objective value, ObjectiveCut only
  Eigen::VectorXd subgradient;

  static CutOracleResponse objective(double value, Eigen::VectorXd g) {
    return {Kind::ObjectiveCut, value, std::move(g)};
  }
  static CutOracleResponse feasibility(Eigen::VectorXd g) {
    return {Kind::FeasibilityCut, 0.0, std::move(g)};
  }
};

/// E = { x : (x - c)^T A^{-1} (x - c) <= 1 }, updated by central cuts.
class Ellipsoid {
 public:
  Ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape);
  static Ellipsoid ball(Eigen::VectorXd center, double radius);

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& shape() const { return shape_; }
  int dim() const { return static_cast<int>(center_.size()); }

  /// sqrt(g^T A g): the spread of the linear function g over E.
  double width(const Eigen::VectorXd& g) const;
  /// Keep the half {x : g^T (x - c) <= 0}. Returns false if g is degenerate.
  bool cut(const Eigen::VectorXd& g);
  void resymmetrize();
  double log_det() const;

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd shape_;
};

struct EllipsoidOptions {
  double radius = 1e4;
  /// Optional per-coordinate radius multipliers; the initial shape is
  /// diag((radius * scale_j)^2).
  Eigen::VectorXd scale;
  double abs_tol = 1e-12;
  double rel_tol = 1e-6;
  int max_iter = 200000;
  int resymmetrize_every = 50;
};

struct EllipsoidResult {
  Eigen::VectorXd point;        // best feasible point seen
  double best_value = 0.0;
  double lower_bound = 0.0;     // valid when the optimum lies in the initial ellipsoid
  int iterations = 0;
  bool converged = false;
  std::vector<double> best_trace;  // best value after each objective cut
};

using CutOracle = std::function<CutOracleResponse(const Eigen::VectorXd&)>;

/// Minimizes a convex function over a convex set described by cuts.
/// Stops when sqrt(g^T A g) <= max(abs_tol, rel_tol |f|) at a feasible
/// center, or after max_iter cuts. Throws NoFeasiblePointFound when every
/// query was infeasible.
EllipsoidResult ellipsoid_minimize(const CutOracle& oracle, const Eigen::VectorXd& center0,
                                   const EllipsoidOptions& options);

}  // namespace wpmec
