// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "wpmec/mathkit.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

Ellipsoid::Ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape)
    : center_(std::move(center)), shape_(std::move(shape)) {
  if (shape_.rows() != center_.size() || shape_.cols() != center_.size() || center_.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "shape", "ellipsoid shape must be n x n");
  }
}

Ellipsoid Ellipsoid::ball(Eigen::VectorXd center, double radius) {
  const Eigen::Index n = center.size();
  return Ellipsoid(std::move(center), Eigen::MatrixXd::Identity(n, n) * radius * radius);
}

double Ellipsoid::width(const Eigen::VectorXd& g) const {
  return std::sqrt(std::max(0.0, g.dot(shape_ * g)));
}

bool Ellipsoid::cut(const Eigen::VectorXd& g) {
  const double n = static_cast<double>(center_.size());
  const Eigen::VectorXd Ag = shape_ * g;
  const double gAg = g.dot(Ag);
  if (!(gAg > 0.0) || !std::isfinite(gAg)) return false;
  const Eigen::VectorXd step = Ag / std::sqrt(gAg);
  if (center_.size() == 1) {
    center_ -= 0.5 * step;
    shape_ *= 0.25;
    return true;
  }
  center_ -= step / (n + 1.0);
  shape_ = (n * n / (n * n - 1.0)) * (shape_ - (2.0 / (n + 1.0)) * step * step.transpose());
  return true;
}

void Ellipsoid::resymmetrize() { shape_ = 0.5 * (shape_ + shape_.transpose()).eval(); }

double Ellipsoid::log_det() const {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(shape_);
  return ldlt.vectorD().array().log().sum();
}

EllipsoidResult ellipsoid_minimize(const CutOracle& oracle, const Eigen::VectorXd& center0,
                                   const EllipsoidOptions& options) {
  const Eigen::Index n = center0.size();
  Eigen::VectorXd radii = Eigen::VectorXd::Constant(n, options.radius);
  if (options.scale.size() == n) radii = radii.cwiseProduct(options.scale);
  Ellipsoid ell(center0, radii.array().square().matrix().asDiagonal());

  EllipsoidResult res;
  res.best_value = std::numeric_limits<double>::infinity();
  res.lower_bound = -std::numeric_limits<double>::infinity();
  bool found = false;

  for (int it = 0; it < options.max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd x = ell.center();
    const CutOracleResponse r = oracle(x);
    if (r.kind == CutOracleResponse::Kind::ObjectiveCut) {
      if (!found || r.value < res.best_value) {
        res.best_value = r.value;
        res.point = x;
        found = true;
      }
      const double w = ell.width(r.subgradient);
      res.lower_bound = std::max(res.lower_bound, r.value - w);
      res.best_trace.push_back(res.best_value);
      if (w <= std::max(options.abs_tol, options.rel_tol * std::abs(r.value))) {
        res.converged = true;
        break;
      }
    }
    if (!ell.cut(r.subgradient)) {
      // A zero objective subgradient certifies optimality of the center.
      res.converged = r.kind == CutOracleResponse::Kind::ObjectiveCut;
      break;
    }
    if (options.resymmetrize_every > 0 && (it + 1) % options.resymmetrize_every == 0) {
      ell.resymmetrize();
    }
  }
  if (!found) {
    throw Error(ErrorKind::NoFeasiblePointFound, "ellipsoid", "every query point was infeasible");
  }
  return res;
}

}  // namespace wpmec
