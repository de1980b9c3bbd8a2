// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpmec/instance.hpp"
#include "wpmec/radio.hpp"

using namespace wpmec;

namespace {

// One user at the origin and n helpers at distance d on the x axis.
ChannelSet ring_channels(int n, double d, std::uint64_t seed) {
  Topology t;
  t.et_positions = {{0.0, 0.0}};
  t.user_positions = {{0.0, 0.0}};
  t.helper_positions.assign(n, Point2{d, 0.0});
  const SystemConfig c = SystemConfig::uniform(1, 1, 1, n);
  return generate_channels(t, c, seed);
}

double mean_d2d(const ChannelSet& ch) { return ch.d2d_gain.mean(); }

}  // namespace

TEST(Channels, DeterministicPerSeed) {
  const auto a = oracle::scenario(2, 4, 2, 3, 17);
  const auto b = oracle::scenario(2, 4, 2, 3, 17);
  const auto c = oracle::scenario(2, 4, 2, 3, 18);
  for (int k = 0; k < 2; ++k) EXPECT_EQ(a.channels.et_user[k], b.channels.et_user[k]);
  for (int m = 0; m < 3; ++m) EXPECT_EQ(a.channels.et_helper[m], b.channels.et_helper[m]);
  EXPECT_EQ(a.channels.d2d_gain, b.channels.d2d_gain);
  EXPECT_NE(a.channels.d2d_gain, c.channels.d2d_gain);
}

TEST(Channels, MeanGainAtOneMetre) {
  const ChannelSet ch = ring_channels(20000, 1.0, 3);
  EXPECT_NEAR(mean_d2d(ch), 1e-3, 0.05e-3);
  EXPECT_GT(ch.d2d_gain.minCoeff(), 0.0);
}

TEST(Channels, DoublingDistanceDividesGainByEight) {
  const double near = mean_d2d(ring_channels(20000, 1.0, 5));
  const double far = mean_d2d(ring_channels(20000, 2.0, 5));
  EXPECT_NEAR(near / far, 8.0, 0.6);
  Topology t;
  EXPECT_DOUBLE_EQ(t.mean_gain({0, 0}, {2, 0}) * 8.0, t.mean_gain({0, 0}, {1, 0}));
}

TEST(Channels, DistanceClampedBelowOneMetre) {
  Topology t;
  EXPECT_DOUBLE_EQ(t.mean_gain({0, 0}, {0.25, 0}), 1e-3);
  EXPECT_DOUBLE_EQ(t.mean_gain({0, 0}, {0, 0}), 1e-3);
}

TEST(Channels, TopologyPositionsInsideDisc) {
  TopologySpec spec;
  const Topology t = make_topology(spec, 50, 50, 9);
  for (const auto& p : t.user_positions) EXPECT_LE(std::hypot(p.x, p.y), spec.user_radius + 1e-12);
  for (const auto& p : t.helper_positions) EXPECT_LE(std::hypot(p.x, p.y), spec.helper_radius + 1e-12);
}

TEST(Harvest, Examples) {
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::VectorXcd g(2);
  g << 1.0, 1.0;
  EXPECT_DOUBLE_EQ(harvested_energy(S, g, 0.3, 0.8), 0.3 * 0.8 * 2.0);
  g << std::complex<double>(0.0, 1.0), 0.0;
  S(0, 0) = 3.0;
  EXPECT_DOUBLE_EQ(harvested_energy(S, g, 1.0, 0.5), 1.5);
  EXPECT_EQ(harvested_energy(Eigen::MatrixXcd::Zero(2, 2), g, 1.0, 1.0), 0.0);
}

TEST(Harvest, MonteCarloQuadraticForm) {
  // E[g^H S g] = PL tr(S) for g ~ CN(0, PL I).
  Topology t;
  t.et_positions = {{0.0, 0.0}};
  t.user_positions.assign(20000, Point2{1.0, 0.0});
  const SystemConfig c = SystemConfig::uniform(1, 3, 20000, 0);
  const ChannelSet ch = generate_channels(t, c, 12);
  Eigen::MatrixXcd S(3, 3);
  S << 2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0;
  double sum = 0.0;
  for (const auto& g : ch.et_user) sum += harvested_energy(S, g, 1.0, 1.0);
  EXPECT_NEAR(sum / 20000.0, 1e-3 * 4.0, 0.05 * 4e-3);
}

TEST(Formulas, Examples) {
  EXPECT_DOUBLE_EQ(offload_bits(1.0, 1.0, 1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(offload_bits(0.5, 2.0, 1.0, 6.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(offload_energy(1.0, 1.0, 1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(offload_energy(0.0, 1.0, 1.0, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(helper_compute_energy(2.0, 0.5, 1.0, 1.0), 32.0);
  EXPECT_DOUBLE_EQ(helper_compute_energy(0.0, 0.5, 1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(download_energy(1.0, 1.0, 1.0, 1.0, 1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(download_energy(5.0, 1.0, 1.0, 1.0, 1.0, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(local_compute_energy(3.0, 1.0, 2.0, 1.0), 54.0);
  // SI defaults: 1e5 bits locally in 0.3 s with xi = 1e-28, C = 1e3.
  EXPECT_NEAR(local_compute_energy(1e5, 0.3, 1e-28, 1e3), 1e-28 * 1e9 * 1e15 / 0.09, 1e-18);
}

TEST(Formulas, EnergyMatchesPowOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double l = 3.0 * u(rng), t = u(rng), b = u(rng), h = u(rng), N0 = u(rng);
    EXPECT_NEAR(offload_energy(l, t, b, h, N0), oracle::tx_energy(l, t, b, h, N0),
                1e-12 * oracle::tx_energy(l, t, b, h, N0));
  }
}

TEST(Formulas, RateEnergyInverse) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng), b = u(rng), h = u(rng), q = u(rng), N0 = u(rng);
    const double l = offload_bits(t, b, h, q, N0);
    EXPECT_NEAR(offload_energy(l, t, b, h, N0), q * t, 1e-12 * q * t);
  }
}

TEST(Formulas, MidpointConvexityInBits) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), c = u(rng);
    const double m = 0.5 * (a + c);
    EXPECT_LE(offload_energy(m, 0.7, 1.3, 0.9, 0.4),
              0.5 * (offload_energy(a, 0.7, 1.3, 0.9, 0.4) + offload_energy(c, 0.7, 1.3, 0.9, 0.4)) + 1e-12);
    EXPECT_LE(helper_compute_energy(m, 0.2, 1.0, 1.0),
              0.5 * (helper_compute_energy(a, 0.2, 1.0, 1.0) + helper_compute_energy(c, 0.2, 1.0, 1.0)) + 1e-12);
    // Joint convexity in (l, t): perspective of a convex function.
    const double t1 = 0.1 + u(rng), t2 = 0.1 + u(rng);
    EXPECT_LE(offload_energy(m, 0.5 * (t1 + t2), 1.0, 1.0, 1.0),
              0.5 * (offload_energy(a, t1, 1.0, 1.0, 1.0) + offload_energy(c, t2, 1.0, 1.0, 1.0)) + 1e-12);
  }
}

TEST(Audit, ZeroAllocationIsFeasible) {
  const auto s = oracle::scenario(2, 4, 1, 2, 4);
  const Pairing p = Pairing::all_to_first(1, 2);
  const ConstraintAudit a = audit(s.config, s.channels, p, PrimalAllocation::zero(s.config, p));
  ASSERT_EQ(a.power.size(), 2u);
  EXPECT_DOUBLE_EQ(a.power[0], 6.0);
  EXPECT_DOUBLE_EQ(a.bandwidth, 3.0);
  ASSERT_EQ(a.time.size(), 2u);
  EXPECT_DOUBLE_EQ(a.time[0], 0.3);
  EXPECT_EQ(a.user_energy[0], 0.0);
  EXPECT_LE(a.worst_violation, 0.0);
  EXPECT_TRUE(a.feasible());
}

TEST(Audit, ReportsBandwidthOverrunInMegahertz) {
  const auto s = oracle::scenario(2, 4, 1, 2, 4);
  const Pairing p = Pairing::all_to_first(1, 2);
  PrimalAllocation x = PrimalAllocation::zero(s.config, p);
  x.bandwidths = {2e6, 2e6};
  const ConstraintAudit a = audit(s.config, s.channels, p, x);
  EXPECT_NEAR(a.bandwidth, -1.0, 1e-12);
  EXPECT_NEAR(a.worst_violation, 1.0, 1e-12);
  EXPECT_FALSE(a.feasible());
}

TEST(Audit, EnergyAndTimeViolations) {
  const auto s = oracle::scenario(2, 4, 1, 1, 4);
  const Pairing p = Pairing::all_to_first(1, 1);
  PrimalAllocation x = PrimalAllocation::zero(s.config, p);
  x.local_bits = {1e6};  // no harvested energy to pay for it
  x.slot_times = {{{0.2, 0.2, 0.0}}};
  const ConstraintAudit a = audit(s.config, s.channels, p, x);
  const double comp_mj = local_compute_energy(1e6, 0.3, 1e-28, 1e3) * 1e3;
  EXPECT_NEAR(a.user_energy[0], -comp_mj, 1e-9 * comp_mj);
  EXPECT_NEAR(a.time[0], -0.1, 1e-12);
  EXPECT_NEAR(a.worst_violation, comp_mj, 1e-9 * comp_mj);
}
