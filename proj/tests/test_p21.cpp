// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wpmec/instance.hpp"
#include "wpmec/orchestrator.hpp"
#include "wpmec/p21.hpp"
#include "wpmec/p22.hpp"
#include "wpmec/radio.hpp"

using namespace wpmec;

namespace {

constexpr double kLn2 = std::numbers::ln2;

struct Draw {
  double lambda, mu, rho, b, h, N0, beta, cubic;
};

// Multipliers and pair data in the magnitudes the scaled solver sees.
Draw draw(std::mt19937_64& rng, bool with_beta = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  Draw d;
  d.lambda = logu(0.05, 5.0);
  d.mu = logu(0.05, 5.0);
  d.rho = logu(0.01, 20.0);
  d.b = logu(0.2, 3.0);
  d.N0 = 1e-6;
  d.h = d.N0 * logu(10.0, 1e3);
  d.beta = with_beta ? logu(0.05, 1.0) : 0.0;
  d.cubic = logu(10.0, 1e3);
  return d;
}

DualPoint feasible_duals(const Instance& inst, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  DualPoint d;
  const double te = inst.T * inst.eta;
  double load = 0.0;
  for (int k = 0; k < inst.n_users; ++k) {
    d.lambda.push_back(u(rng));
    load += te * d.lambda.back() * inst.g_user[k].squaredNorm();
  }
  for (int i = 0; i < inst.n_pairs(); ++i) {
    d.mu.push_back(u(rng));
    d.rho.push_back(u(rng));
    load += te * d.mu.back() * inst.pairs[i].g.squaredNorm();
  }
  for (int n = 0; n < inst.n_ets; ++n) d.gamma.push_back(load * u(rng) + load);
  return d;
}

std::vector<double> equal_split(const Instance& inst) {
  return std::vector<double>(inst.n_pairs(), inst.n_pairs() ? inst.B / inst.n_pairs() : 0.0);
}

}  // namespace

TEST(ClosedForm, LocalBitsMatchGoldenSection) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double lambda = u(rng), xi = u(rng), C = u(rng), T = u(rng);
    const double want = oracle::golden_max(
        [&](double l) { return l - lambda * xi * C * C * C * l * l * l / (T * T); }, 0.0, 100.0);
    EXPECT_NEAR(local_bits_closed_form(lambda, xi, C, T), want, 1e-7 * want);
  }
}

TEST(ClosedForm, RatesMinimizePerBitCosts) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const Draw d = draw(rng);
    const RateTriple r = rates_closed_form(d.lambda, d.mu, d.rho, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
    auto c1 = [&](double x) { return d.lambda * oracle::tx_energy(x, 1.0, d.b, d.h, d.N0) / x + d.rho / x; };
    auto c2 = [&](double x) { return d.mu * d.cubic * x * x + d.rho / x; };
    auto c3 = [&](double x) { return d.mu * oracle::tx_energy(d.beta * x, 1.0, d.b, d.h, d.N0) / x + d.rho / x; };
    const double o1 = oracle::golden_min(c1, 1e-9, 50.0 * d.b);
    const double o2 = oracle::golden_min(c2, 1e-9, 100.0);
    const double o3 = oracle::golden_min(c3, 1e-9, 50.0 * d.b / d.beta);
    EXPECT_NEAR(r.r1, o1, 1e-6 * o1);
    EXPECT_NEAR(r.r2, o2, 1e-6 * o2);
    EXPECT_NEAR(r.r3, o3, 1e-6 * o3);
  }
}

TEST(ClosedForm, StationarityResiduals) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Draw d = draw(rng);
    const RateTriple r = rates_closed_form(d.lambda, d.mu, d.rho, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
    const double k1 = d.lambda * d.N0 * d.b / d.h, k3 = d.mu * d.N0 * d.b / d.h;
    EXPECT_NEAR(k1 * spectral_kernel(r.r1 / d.b), d.rho, 1e-9 * d.rho);
    EXPECT_NEAR(2.0 * d.mu * d.cubic * r.r2 * r.r2 * r.r2, d.rho, 1e-9 * d.rho);
    EXPECT_NEAR(k3 * spectral_kernel(d.beta * r.r3 / d.b), d.rho, 1e-9 * d.rho);
  }
}

TEST(ClosedForm, ObjectiveEqualsBitsTimesGain) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Draw d = draw(rng);
    const RateTriple r = rates_closed_form(d.lambda, d.mu, d.rho, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
    const double G = gain_G(r, d.lambda, d.mu, d.rho, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
    const double l = u(rng) * std::min({r.r1, r.r2, r.r3});
    const double v = pair_subproblem_objective(l, {l / r.r1, l / r.r2, l / r.r3}, d.lambda, d.mu, d.rho, d.b, d.h,
                                               d.N0, d.beta, d.cubic, 1.0);
    EXPECT_NEAR(v, l * G, 1e-9 * std::max(1.0, l));
  }
}

TEST(Gain, ZeroTimePriceLimits) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    for (bool with_beta : {true, false}) {
      const Draw d = draw(rng, with_beta);
      const RateTriple r = rates_closed_form(d.lambda, d.mu, 0.0, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
      EXPECT_EQ(r.r1, 0.0);
      EXPECT_EQ(r.r2, 0.0);
      if (with_beta) EXPECT_EQ(r.r3, 0.0);
      else EXPECT_TRUE(std::isinf(r.r3));
      const double G0 = gain_G(r, d.lambda, d.mu, 0.0, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
      EXPECT_NEAR(G0, 1.0 - (d.lambda + d.mu * d.beta) * d.N0 * kLn2 / d.h, 1e-14);
      // Continuity of G as rho -> 0.
      const RateTriple rs = rates_closed_form(d.lambda, d.mu, 1e-12, d.b, d.h, d.N0, d.beta, d.cubic, 1.0);
      EXPECT_NEAR(gain_G(rs, d.lambda, d.mu, 1e-12, d.b, d.h, d.N0, d.beta, d.cubic, 1.0), G0, 1e-5);
    }
  }
}

TEST(Gain, OffloadBySignTable) {
  const RateTriple r{2.0, 3.0, 4.0};
  EXPECT_EQ(offload_by_gain_sign(-0.1, r, 0.5), 0.0);
  EXPECT_EQ(offload_by_gain_sign(0.0, r, 0.5), 0.0);
  EXPECT_EQ(offload_by_gain_sign(0.2, r, 0.5), 1.0);
  EXPECT_EQ(offload_by_gain_sign(0.2, RateTriple{2.0, 3.0, INFINITY}, 0.5), 1.0);
}

TEST(PairInner, MatchesNestedSearch) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 60; ++i) {
    const Draw d = draw(rng, i % 3 != 0);
    const PairParams p{d.b, d.h, d.N0, d.beta, d.cubic, 0.3};
    // For fixed l every slot length is a separate convex choice on (0, T].
    auto best_slot = [&](const std::function<double(double)>& cost) {
      const double t = oracle::golden_min(cost, 1e-12, p.T, 120);
      return std::min(cost(t), cost(p.T));
    };
    auto value = [&](double l) {
      if (l <= 0.0) return 0.0;
      double v = l;
      v -= best_slot([&](double t) { return d.lambda * oracle::tx_energy(l, t, d.b, d.h, d.N0) + d.rho * t; });
      v -= best_slot([&](double t) { return d.mu * d.cubic * l * l * l / (t * t) + d.rho * t; });
      if (d.beta > 0.0)
        v -= best_slot([&](double t) { return d.mu * oracle::tx_energy(d.beta * l, t, d.b, d.h, d.N0) + d.rho * t; });
      return v;
    };
    const PairInner got = pair_inner(p, d.lambda, d.mu, d.rho);
    const double hi = std::max(1.0, 4.0 * got.bits);
    const double l = oracle::golden_max(value, 0.0, hi, 150);
    const double want = std::max(0.0, value(l)) + d.rho * p.T;
    EXPECT_NEAR(got.value, want, 1e-7 * want) << i;
    for (double t : got.times) EXPECT_LE(t, p.T * (1.0 + 1e-12));
  }
}

TEST(PairInner, TimePriceEliminationMatchesSearch) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    const Draw d = draw(rng, i % 4 != 0);
    const PairParams p{d.b, d.h, d.N0, d.beta, d.cubic, 0.3};
    double rho = -1.0;
    const PairInner got = pair_inner_min_rho(p, d.lambda, d.mu, &rho);
    auto D = [&](double x) { return pair_inner(p, d.lambda, d.mu, x).value; };
    const double ref = std::min(D(oracle::golden_min(D, 0.0, 1e3, 200)), D(0.0));
    // The oracle sits on a kink of D, so it is only accurate to ~1e-6.
    EXPECT_LE(got.value, ref * (1.0 + 1e-9)) << i;
    EXPECT_NEAR(got.value, ref, 1e-5 * ref) << i;
    EXPECT_NEAR(D(rho), got.value, 1e-9 * got.value) << i;
    EXPECT_GE(rho, 0.0);
    if (rho > 0.0) EXPECT_NEAR(got.times[0] + got.times[1] + got.times[2], p.T, 1e-9);
  }
}

TEST(Dual, SubgradientInequality) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = oracle::scenario(2, 2, 2, 2, 100 + trial);
    const Instance inst = Instance::build(s.config, s.channels, Pairing::from_assignment(2, std::vector<int>{0, 1}));
    const std::vector<double> bw = equal_split(inst);
    const DualPoint d = feasible_duals(inst, rng);
    const InnerSolution in = inner_solution(d, inst, bw);
    const Eigen::VectorXd g = dual_subgradient(d, in, inst, bw);
    const double f0 = evaluate_dual(d, inst, bw);
    EXPECT_NEAR(f0, in.value, 1e-12 * std::abs(f0));
    const Eigen::VectorXd x0 = d.flatten();
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd dx(x0.size());
      for (Eigen::Index j = 0; j < dx.size(); ++j) dx[j] = 0.05 * n(rng) * x0[j];
      Eigen::VectorXd x1 = x0 + dx;
      for (Eigen::Index j = 0; j < x1.size() - inst.n_ets; ++j) x1[j] = std::max(x1[j], 1e-3);
      for (Eigen::Index j = x1.size() - inst.n_ets; j < x1.size(); ++j) x1[j] = x0[j] * 2.0;
      const DualPoint d1 = DualPoint::unflatten(std::span<const double>(x1.data(), x1.size()), 2, 2, 2);
      const double f1 = evaluate_dual(d1, inst, bw);
      EXPECT_GE(f1, f0 + g.dot(x1 - x0) - 1e-9 * std::abs(f0));
    }
  }
}

TEST(Dual, FiniteDifferenceMatchesSubgradientAwayFromKinks) {
  std::mt19937_64 rng(9);
  const auto s = oracle::scenario(2, 2, 1, 1, 77);
  const Instance inst = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 1));
  const std::vector<double> bw = equal_split(inst);
  const DualPoint d = feasible_duals(inst, rng);
  const Eigen::VectorXd g = dual_subgradient(d, inner_solution(d, inst, bw), inst, bw);
  const Eigen::VectorXd x0 = d.flatten();
  for (Eigen::Index j = 0; j < x0.size(); ++j) {
    const double h = 1e-6 * x0[j];
    Eigen::VectorXd xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    auto f = [&](const Eigen::VectorXd& x) {
      return evaluate_dual(DualPoint::unflatten(std::span<const double>(x.data(), x.size()), 1, 1, 2), inst, bw);
    };
    const double fd = (f(xp) - f(xm)) / (2.0 * h);
    EXPECT_NEAR(fd, g[j], 1e-5 * std::max(1.0, std::abs(g[j]))) << j;
  }
}

TEST(Dual, OutsideDomainIsRejected) {
  std::mt19937_64 rng(10);
  const auto s = oracle::scenario(2, 2, 1, 1, 3);
  const Instance inst = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 1));
  DualPoint d = feasible_duals(inst, rng);
  d.gamma = {1e-12, 1e-12};
  try {
    evaluate_dual(d, inst, equal_split(inst));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DualInfeasible);
  }
  EXPECT_GT(hermitian_max_eigpair(dual_lmi(d, inst)).value, 0.0);
}

TEST(Dual, WeakDualityAgainstRandomFeasiblePrimals) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = oracle::scenario(2, 2, 2, 2, 200 + trial);
    const Pairing pairing = Pairing::from_assignment(2, std::vector<int>{0, 1});
    const Instance inst = Instance::build(s.config, s.channels, pairing);
    const std::vector<double> bw = equal_split(inst);
    ScaledAllocation a = ScaledAllocation::zero(inst);
    a.S = inst.uniform_covariance();
    a.bandwidth = bw;
    for (int i = 0; i < inst.n_pairs(); ++i) {
      const double l = 0.01 * u(rng);
      a.offload[i] = l;
      a.times[i] = {inst.T / 3, inst.T / 3, inst.T / 3};
    }
    const EnergyLedger e = energy_ledger(inst, a);
    for (int k = 0; k < inst.n_users; ++k) {
      const double spare = std::max(0.0, e.user_harvest[k] - e.user_tx[k]);
      a.local[k] = u(rng) * std::cbrt(spare * inst.T * inst.T / inst.user_cubic[k]);
    }
    const ConstraintAudit audit_result = audit(inst, a);
    if (!audit_result.feasible(1e-12)) continue;
    for (int k = 0; k < 5; ++k) {
      const DualPoint d = feasible_duals(inst, rng);
      EXPECT_LE(a.objective(), evaluate_dual(d, inst, bw) + 1e-12);
    }
  }
}

TEST(Stage, SingleUserWithoutHelpersIsAnalytic) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = oracle::scenario(2, 4, 1, 0, seed);
    const Instance inst = Instance::build(s.config, s.channels, Pairing::empty(1));
    const SolveReport r = solve_p21(inst, {});
    const double want = oracle::single_user_local_oracle(s.config, s.channels.et_user[0]);
    EXPECT_NEAR(r.objective_bits, want, 1e-3 * want) << seed;
  }
}

TEST(Stage, EightfoldPowerDoublesLocalBits) {
  const auto a = oracle::scenario(2, 4, 1, 0, 5, 6.0);
  const auto b = oracle::scenario(2, 4, 1, 0, 5, 48.0);
  const double ra = solve_p21(Instance::build(a.config, a.channels, Pairing::empty(1)), {}).objective_bits;
  const double rb = solve_p21(Instance::build(b.config, b.channels, Pairing::empty(1)), {}).objective_bits;
  EXPECT_NEAR(rb / ra, 2.0, 2e-3);
}

TEST(Stage, SinglePairMatchesNestedOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = oracle::scenario(1, 1, 1, 1, seed);
    const Instance inst = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 1));
    const SolveReport r = solve_p21(inst, {inst.B});
    const double want = oracle::SinglePair(s.config, s.channels).joint_optimum();
    EXPECT_NEAR(r.objective_bits, want, 2e-3 * want) << seed;
    EXPECT_LE(r.rel_gap, 1e-3);
  }
}

TEST(Stage, GapFeasibilityAndComplementarySlackness) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = oracle::scenario(2, 2, 1, 2, seed);
    const Instance inst = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 2));
    const StageResult r = solve_p21_scaled(inst, {inst.B / 2, inst.B / 2});
    EXPECT_LE(r.rel_gap(), 1e-3);
    EXPECT_LE(r.primal, r.dual * (1.0 + 1e-6));
    const ConstraintAudit a = audit(inst, r.alloc);
    EXPECT_LE(a.worst_violation, 1e-6);
    // lambda_k * slack_k summed is bounded by the duality gap.
    double cs = r.duals.lambda[0] * a.user_energy[0];
    for (int i = 0; i < inst.n_pairs(); ++i) cs += r.duals.mu[i] * a.helper_energy[i];
    for (int n = 0; n < inst.n_ets; ++n) cs += r.duals.gamma[n] * a.power[n];
    EXPECT_LE(cs, 2e-3 * r.dual) << seed;
  }
}

TEST(Stage, InvariantToChannelPhases) {
  const auto s = oracle::scenario(2, 2, 1, 1, 12);
  auto t = s;
  const std::complex<double> w = std::polar(1.0, 0.7);
  t.channels.et_user[0] *= w;
  t.channels.et_helper[0] *= std::conj(w);
  const Instance a = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 1));
  const Instance b = Instance::build(t.config, t.channels, Pairing::all_to_first(1, 1));
  const double ra = solve_p21(a, {a.B}).objective_bits;
  const double rb = solve_p21(b, {b.B}).objective_bits;
  EXPECT_NEAR(ra, rb, 1e-3 * ra);
}

TEST(Stage, ZeroBandwidthPairStaysIdle) {
  const auto s = oracle::scenario(2, 2, 1, 2, 4);
  const Instance inst = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 2));
  const StageResult r = solve_p21_scaled(inst, {inst.B, 0.0});
  EXPECT_EQ(r.alloc.offload[1], 0.0);
  EXPECT_LE(audit(inst, r.alloc).worst_violation, 1e-6);
}
