// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpmec/mathkit.hpp"
#include "wpmec/sdp.hpp"

using namespace wpmec;

namespace {

SdpConstraint trace_row(int n, double rhs) {
  SdpConstraint c;
  c.matrix = Eigen::MatrixXcd::Identity(n, n);
  c.rhs = rhs;
  return c;
}

SdpConstraint scalar_row(std::initializer_list<double> a, double rhs,
                         SdpConstraint::Sense sense = SdpConstraint::Sense::LessEqual) {
  SdpConstraint c;
  c.scalars = Eigen::VectorXd(static_cast<Eigen::Index>(a.size()));
  int i = 0;
  for (double v : a) c.scalars[i++] = v;
  c.rhs = rhs;
  c.sense = sense;
  return c;
}

}  // namespace

TEST(Sdp, TraceConstrainedMaxIsLargestEigenvalue) {
  std::mt19937_64 rng(21);
  for (int n : {1, 2, 4, 8}) {
    LinearSdp p;
    p.psd_dim = n;
    p.objective_matrix = oracle::random_hermitian(n, rng);
    p.add(trace_row(n, 1.0));
    const SdpSolution s = solve_linear_sdp(p);
    const double lmax = -oracle::min_eig_power(-p.objective_matrix);
    EXPECT_NEAR(s.objective, lmax, 1e-6) << n;
    EXPECT_NEAR(s.S.trace().real(), 1.0, 1e-6);
    EXPECT_GE(hermitian_min_eigpair(s.S).value, -1e-8);
    EXPECT_NEAR(s.multipliers[0], lmax, 1e-5);
  }
}

TEST(Sdp, LinearProgramMatchesVertexEnumeration) {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3.
  LinearSdp p;
  p.n_scalars = 2;
  p.objective_scalars = Eigen::Vector2d(3.0, 2.0);
  p.add(scalar_row({1.0, 1.0}, 4.0));
  p.add(scalar_row({1.0, 3.0}, 6.0));
  p.add(scalar_row({1.0, 0.0}, 3.0));
  double best = -INFINITY;
  for (auto [x, y] : std::vector<std::pair<double, double>>{{0, 0}, {3, 0}, {3, 1}, {0, 2}})
    if (x + y <= 4 + 1e-12 && x + 3 * y <= 6 + 1e-12 && x <= 3) best = std::max(best, 3 * x + 2 * y);
  const SdpSolution s = solve_linear_sdp(p);
  EXPECT_NEAR(s.objective, best, 1e-6);
  EXPECT_NEAR(s.scalars[0], 3.0, 1e-5);
  EXPECT_NEAR(s.scalars[1], 1.0, 1e-5);
}

TEST(Sdp, EqualityRows) {
  // max -x0 - 2 x1  s.t. x0 + x1 = 1.
  LinearSdp p;
  p.n_scalars = 2;
  p.objective_scalars = Eigen::Vector2d(-1.0, -2.0);
  p.add(scalar_row({1.0, 1.0}, 1.0, SdpConstraint::Sense::Equal));
  const SdpSolution s = solve_linear_sdp(p);
  EXPECT_NEAR(s.objective, -1.0, 1e-6);
  EXPECT_NEAR(s.scalars[0], 1.0, 1e-6);
}

TEST(Sdp, WeakDualityAndCertificates) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    LinearSdp p;
    p.psd_dim = n;
    p.n_scalars = 2;
    p.objective_matrix = oracle::random_hermitian(n, rng);
    p.objective_scalars = Eigen::Vector2d(u(rng), u(rng));
    p.add(trace_row(n, u(rng)));
    SdpConstraint mix;
    mix.matrix = oracle::random_hermitian(n, rng);
    mix.matrix += (std::abs(hermitian_min_eigpair(mix.matrix).value) + 0.1) * Eigen::MatrixXcd::Identity(n, n);
    mix.scalars = Eigen::Vector2d(u(rng), u(rng));
    mix.rhs = 1.0 + u(rng);
    p.add(mix);
    const SdpSolution s = solve_linear_sdp(p);
    EXPECT_TRUE(s.converged);
    EXPECT_LE(s.objective, s.dual_bound + 1e-6 * (1.0 + std::abs(s.dual_bound)));
    EXPECT_NEAR(s.objective, s.dual_bound, 1e-5 * (1.0 + std::abs(s.dual_bound)));
    EXPECT_GE(hermitian_min_eigpair(s.S).value, -1e-8);
    EXPECT_GE(s.scalars.minCoeff(), -1e-8);
    EXPECT_GE(s.multipliers.minCoeff(), -1e-8);
    // Feasibility of the returned point.
    for (const auto& c : p.constraints) {
      double lhs = 0.0;
      if (c.matrix.size() > 0) lhs += c.matrix.cwiseProduct(s.S.transpose()).sum().real();
      if (c.scalars.size() > 0) lhs += c.scalars.dot(s.scalars);
      EXPECT_LE(lhs, c.rhs + 1e-6);
    }
  }
}

TEST(Sdp, InfeasibleProblemIsReported) {
  // x0 <= -1 with x0 >= 0.
  LinearSdp p;
  p.n_scalars = 1;
  p.objective_scalars = Eigen::VectorXd::Ones(1);
  p.add(scalar_row({1.0}, -1.0));
  try {
    solve_linear_sdp(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::Infeasible || e.kind() == ErrorKind::NumericalFailure) << e.what();
  }
}

TEST(Sdp, UnboundedProblemIsReported) {
  LinearSdp p;
  p.n_scalars = 2;
  p.objective_scalars = Eigen::Vector2d(1.0, 1.0);
  p.add(scalar_row({1.0, -1.0}, 1.0));
  try {
    solve_linear_sdp(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::Infeasible || e.kind() == ErrorKind::NumericalFailure) << e.what();
  }
}
