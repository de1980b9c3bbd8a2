// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Eigenvalues>

#include "wpmec/mathkit.hpp"
#include "wpmec/model.hpp"

namespace wpmec {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> decompose(const Eigen::MatrixXcd& F) {
  if (F.rows() != F.cols() || F.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "F", "expected a non-empty square matrix");
  }
  const double scale = std::max(1.0, F.cwiseAbs().maxCoeff());
  if ((F - F.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorKind::NotHermitian, "F", "matrix is not Hermitian within 1e-10");
  }
  const Eigen::MatrixXcd H = 0.5 * (F + F.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H);
}

}  // namespace

EigPair hermitian_min_eigpair(const Eigen::MatrixXcd& F) {
  const auto es = decompose(F);
  return {es.eigenvalues()(0), es.eigenvectors().col(0).normalized()};
}

EigPair hermitian_max_eigpair(const Eigen::MatrixXcd& F) {
  const auto es = decompose(F);
  const Eigen::Index last = F.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last).normalized()};
}

}  // namespace wpmec
