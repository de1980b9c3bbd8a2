// SPDX-License-Identifier: Apache-2.0

#include "wpmec/p21.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "stage_common.hpp"
#include "wpmec/radio.hpp"

namespace wpmec {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLmiTol = 1e-9;

struct Slots {
  RateTriple r;
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;  // per-bit cost at the optimal rate
  double gain() const { return 1.0 - a1 - a2 - a3; }
};

// Per-bit cost c(r) = price * (noise b / (h r)) (2^{scale r / b} - 1) + rho / r.
double comm_cost(double r, double price, double rho, double b, double h, double noise, double scale) {
  if (r == 0.0) return price * noise * scale * kLn2 / h;
  if (std::isinf(r)) return 0.0;
  return price * noise * b / (h * r) * std::expm1(scale * r * kLn2 / b) + rho / r;
}

Slots slots(const PairParams& p, double lambda, double mu, double rho) {
  Slots s;
  if (rho > 0.0) {
    s.r.r1 = p.b / kLn2 * one_plus_w0_shifted(rho * p.h / (lambda * p.noise * p.b));
    s.r.r2 = std::cbrt(rho / (2.0 * mu * p.cubic));
    s.r.r3 = p.beta > 0.0 ? p.b / (p.beta * kLn2) * one_plus_w0_shifted(rho * p.h / (mu * p.noise * p.b)) : kInf;
  } else {
    s.r.r3 = p.beta > 0.0 ? 0.0 : kInf;
  }
  s.a1 = comm_cost(s.r.r1, lambda, rho, p.b, p.h, p.noise, 1.0);
  s.a2 = s.r.r2 > 0.0 ? mu * p.cubic * s.r.r2 * s.r.r2 + rho / s.r.r2 : 0.0;
  s.a3 = p.beta > 0.0 ? comm_cost(s.r.r3, mu, rho, p.b, p.h, p.noise, p.beta) : 0.0;
  return s;
}

// Slot costs when the slot is pinned at t = T.
double capped_cost1(const PairParams& p, double lambda, double rho, double l) {
  return lambda * p.noise * p.T * p.b / p.h * std::expm1(l / (p.T * p.b) * kLn2) + rho * p.T;
}
double capped_cost2(const PairParams& p, double mu, double rho, double l) {
  return mu * p.cubic * l * l * l / (p.T * p.T) + rho * p.T;
}
double capped_cost3(const PairParams& p, double mu, double rho, double l) {
  return mu * p.noise * p.T * p.b / p.h * std::expm1(p.beta * l / (p.T * p.b) * kLn2) + rho * p.T;
}

std::array<double, 3> slot_times(const PairParams& p, const RateTriple& r, double l) {
  if (l <= 0.0) return {0.0, 0.0, 0.0};
  auto t = [&](double rate) { return rate > 0.0 ? std::min(l / rate, p.T) : p.T; };
  return {t(r.r1), t(r.r2), p.beta > 0.0 ? t(r.r3) : 0.0};
}

PairParams params_of(const Instance& inst, int i, double b) {
  const auto& sp = inst.pairs[i];
  return {b, sp.gain, inst.noise, inst.beta, sp.cubic, inst.T};
}

double local_bits_scaled(const Instance& inst, int k, double lambda) {
  return inst.T / std::sqrt(3.0 * lambda * inst.user_cubic[k]);
}

}  // namespace

double local_bits_closed_form(double lambda, double xi, double C, double T) {
  return T / std::sqrt(3.0 * lambda * xi * C * C * C);
}

RateTriple rates_closed_form(double lambda, double mu, double rho, double b, double h, double N0, double beta,
                             double xi, double C) {
  return slots({b, h, N0, beta, xi * C * C * C, 1.0}, lambda, mu, rho).r;
}

double gain_G(const RateTriple& r, double lambda, double mu, double rho, double b, double h, double N0,
              double beta, double xi, double C) {
  const double cubic = xi * C * C * C;
  const double a1 = comm_cost(r.r1, lambda, rho, b, h, N0, 1.0);
  const double a2 = r.r2 > 0.0 ? mu * cubic * r.r2 * r.r2 + rho / r.r2 : 0.0;
  const double a3 = beta > 0.0 ? comm_cost(r.r3, mu, rho, b, h, N0, beta) : 0.0;
  return 1.0 - a1 - a2 - a3;
}

double pair_subproblem_objective(double l, const std::array<double, 3>& t, double lambda, double mu, double rho,
                                 double b, double h, double N0, double beta, double xi, double C) {
  try {
    return l - lambda * offload_energy(l, t[0], b, h, N0) - mu * helper_compute_energy(l, t[1], xi, C) -
           mu * download_energy(l, t[2], b, h, N0, beta) - rho * (t[0] + t[1] + t[2]);
  } catch (const Error&) {
    return -kInf;
  }
}

double offload_by_gain_sign(double gain, const RateTriple& r, double T) {
  if (!(gain > 0.0)) return 0.0;
  return std::min({r.r1, r.r2, r.r3}) * T;
}

PairInner pair_inner(const PairParams& p, double lambda, double mu, double rho) {
  const Slots s = slots(p, lambda, mu, rho);
  PairInner out;
  out.rates = s.r;
  out.gain = s.gain();
  out.value = rho * p.T;
  if (!(out.gain > 0.0)) return out;

  const double T = p.T;
  auto deriv = [&](double l) {
    const double d1 = l <= s.r.r1 * T ? s.a1 : lambda * p.noise / p.h * kLn2 * std::exp2(l / (T * p.b));
    const double d2 = l <= s.r.r2 * T ? s.a2 : 3.0 * mu * p.cubic * l * l / (T * T);
    double d3 = 0.0;
    if (p.beta > 0.0) {
      d3 = l <= s.r.r3 * T ? s.a3 : mu * p.noise / p.h * p.beta * kLn2 * std::exp2(p.beta * l / (T * p.b));
    }
    return 1.0 - d1 - d2 - d3;
  };
  double lo = std::min({s.r.r1, s.r.r2, s.r.r3}) * T;
  double hi = std::max(lo, 1e-9) * 2.0;
  for (int it = 0; it < 2000 && deriv(hi) > 0.0; ++it) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) > 0.0 ? lo : hi) = mid;
  }
  const double l = 0.5 * (lo + hi);
  out.bits = l;
  out.times = slot_times(p, s.r, l);
  auto cost = [&](double rate, double a, double capped) { return l <= rate * T ? a * l : capped; };
  double total = cost(s.r.r1, s.a1, capped_cost1(p, lambda, rho, l)) +
                 cost(s.r.r2, s.a2, capped_cost2(p, mu, rho, l));
  if (p.beta > 0.0) total += cost(s.r.r3, s.a3, capped_cost3(p, mu, rho, l));
  out.value = l - total + rho * T;
  return out;
}

PairInner pair_inner_min_rho(const PairParams& p, double lambda, double mu, double* rho_out) {
  const double g0 = 1.0 - (lambda + mu * p.beta) * p.noise * kLn2 / p.h;
  if (!(g0 > 0.0)) {
    if (rho_out) *rho_out = 0.0;
    PairInner out;
    out.gain = g0;
    out.rates.r3 = p.beta > 0.0 ? 0.0 : kInf;
    return out;
  }
  auto G = [&](double rho) { return slots(p, lambda, mu, rho).gain(); };
  // G is convex and decreasing in rho, so Newton from the left of the root
  // stays on the left and converges monotonically.
  double x = 1.0;
  for (int it = 0; it < 200 && G(x) > 0.0; ++it) x *= 4.0;
  for (int it = 0; it < 2000 && G(x) <= 0.0; ++it) x *= 0.25;
  Slots s = slots(p, lambda, mu, x);
  for (int it = 0; it < 100; ++it) {
    const double g = s.gain();
    const double dg = -(1.0 / s.r.r1 + 1.0 / s.r.r2 + (p.beta > 0.0 ? 1.0 / s.r.r3 : 0.0));
    const double step = -g / dg;
    if (!(step > 0.0)) break;
    Slots next = slots(p, lambda, mu, x + step);
    if (next.gain() < 0.0) {
      // Round-off overshoot; keep the last nonnegative point.
      if (step <= 1e-12 * x) break;
      double lo = x, hi = x + step;
      for (int b = 0; b < 60; ++b) {
        const double mid = 0.5 * (lo + hi);
        (slots(p, lambda, mu, mid).gain() >= 0.0 ? lo : hi) = mid;
      }
      x = lo;
      s = slots(p, lambda, mu, x);
      break;
    }
    x += step;
    s = next;
    if (step <= 1e-15 * x || s.gain() <= 1e-15) break;
  }
  PairInner out;
  out.rates = s.r;
  out.gain = s.gain();
  const double inv = 1.0 / s.r.r1 + 1.0 / s.r.r2 + (p.beta > 0.0 ? 1.0 / s.r.r3 : 0.0);
  out.bits = p.T / inv;
  out.times = slot_times(p, s.r, out.bits);
  out.value = x * p.T + out.bits * std::max(0.0, out.gain);
  if (rho_out) *rho_out = x;
  return out;
}

Eigen::MatrixXcd dual_lmi(const DualPoint& d, const Instance& inst) {
  const double te = inst.T * inst.eta;
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
  for (int k = 0; k < inst.n_users; ++k) {
    if (d.lambda[k] != 0.0) F.selfadjointView<Eigen::Lower>().rankUpdate(inst.g_user[k], te * d.lambda[k]);
  }
  for (int i = 0; i < inst.n_pairs(); ++i) {
    if (d.mu[i] != 0.0) F.selfadjointView<Eigen::Lower>().rankUpdate(inst.pairs[i].g, te * d.mu[i]);
  }
  Eigen::MatrixXcd full = F.selfadjointView<Eigen::Lower>();
  for (int n = 0; n < inst.n_ets && n < static_cast<int>(d.gamma.size()); ++n) {
    full.diagonal().segment(n * inst.antennas, inst.antennas).array() -= d.gamma[n];
  }
  return full;
}

Eigen::VectorXd lmi_cut(const DualPoint& d, const Instance& inst) {
  const EigPair top = hermitian_max_eigpair(dual_lmi(d, inst));
  const double te = inst.T * inst.eta;
  const int K = inst.n_users, P = inst.n_pairs();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(K + 2 * P + inst.n_ets);
  for (int k = 0; k < K; ++k) g[k] = te * std::norm(top.vector.dot(inst.g_user[k]));
  for (int i = 0; i < P; ++i) g[K + i] = te * std::norm(top.vector.dot(inst.pairs[i].g));
  for (int n = 0; n < inst.n_ets; ++n) {
    g[K + 2 * P + n] = -top.vector.segment(n * inst.antennas, inst.antennas).squaredNorm();
  }
  return g;
}

InnerSolution inner_solution(const DualPoint& d, const Instance& inst, const std::vector<double>& bw) {
  InnerSolution s;
  for (int k = 0; k < inst.n_users; ++k) {
    const double l0 = local_bits_scaled(inst, k, d.lambda[k]);
    s.local_bits.push_back(l0);
    s.value += l0 - d.lambda[k] * inst.user_cubic[k] * l0 * l0 * l0 / (inst.T * inst.T) +
               d.lambda[k] * detail::dual_harvest(inst, inst.g_user[k]);
  }
  for (int i = 0; i < inst.n_pairs(); ++i) {
    PairInner pi;
    if (bw[i] > 0.0) {
      pi = pair_inner(params_of(inst, i, bw[i]), d.lambda[inst.pairs[i].user], d.mu[i], d.rho[i]);
    } else {
      pi.value = d.rho[i] * inst.T;
    }
    s.rates.push_back(pi.rates);
    s.gains.push_back(pi.gain);
    s.offload_bits.push_back(pi.bits);
    s.times.push_back(pi.times);
    s.pair_values.push_back(pi.value);
    s.value += pi.value + d.mu[i] * detail::dual_harvest(inst, inst.pairs[i].g);
  }
  for (int n = 0; n < static_cast<int>(d.gamma.size()); ++n) s.value += d.gamma[n] * inst.power[n];
  return s;
}

double evaluate_dual(const DualPoint& d, const Instance& inst, const std::vector<double>& bw) {
  if (static_cast<int>(d.lambda.size()) != inst.n_users || static_cast<int>(d.mu.size()) != inst.n_pairs() ||
      static_cast<int>(d.rho.size()) != inst.n_pairs() || static_cast<int>(bw.size()) != inst.n_pairs()) {
    throw Error(ErrorKind::DimensionMismatch, "duals", "dual point does not match the instance");
  }
  if (!d.satisfies_bounds()) throw Error(ErrorKind::DualInfeasible, "duals", "multiplier below its floor");
  if (!inst.fixed_cov) {
    if (static_cast<int>(d.gamma.size()) != inst.n_ets) {
      throw Error(ErrorKind::DimensionMismatch, "gamma", "one power price per ET expected");
    }
    if (hermitian_max_eigpair(dual_lmi(d, inst)).value > kLmiTol) {
      throw Error(ErrorKind::DualInfeasible, "F", "dual LMI has a positive eigenvalue");
    }
  }
  return inner_solution(d, inst, bw).value;
}

Eigen::VectorXd dual_subgradient(const DualPoint& d, const InnerSolution& in, const Instance& inst,
                                 const std::vector<double>& bw) {
  const int K = inst.n_users, P = inst.n_pairs();
  const int N = static_cast<int>(d.gamma.size());
  Eigen::VectorXd g(K + 2 * P + N);
  for (int k = 0; k < K; ++k) {
    const double l0 = in.local_bits[k];
    g[k] = detail::dual_harvest(inst, inst.g_user[k]) - inst.user_cubic[k] * l0 * l0 * l0 / (inst.T * inst.T);
  }
  for (int i = 0; i < P; ++i) {
    const auto& sp = inst.pairs[i];
    const double l = in.offload_bits[i];
    const auto& t = in.times[i];
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    if (l > 0.0) {
      e1 = offload_energy(l, t[0], bw[i], sp.gain, inst.noise);
      e2 = helper_compute_energy(l, t[1], sp.cubic, 1.0);
      e3 = download_energy(l, t[2], bw[i], sp.gain, inst.noise, inst.beta);
    }
    g[sp.user] -= e1;
    g[K + i] = detail::dual_harvest(inst, sp.g) - e2 - e3;
    g[K + P + i] = inst.T - (t[0] + t[1] + t[2]);
  }
  for (int n = 0; n < N; ++n) g[K + 2 * P + n] = inst.power[n];
  return g;
}

double StageResult::rel_gap() const { return std::abs(dual - primal) / std::max(dual, 1e-6); }

namespace {

// Recovery from per-pair rates; pairs without usable rates stay idle.
ScaledAllocation recover_from_rates(const Instance& inst, const std::vector<double>& bw,
                                    const std::vector<int>& pairs, const std::vector<RateTriple>& rates,
                                    const std::vector<double>& hints, const std::vector<double>& local_hint,
                                    const DualSolveOptions& opt) {
  detail::RecoveryInput in;
  in.local_hint = local_hint;
  in.band_budget = inst.B;
  std::vector<RateTriple> used;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const int i = pairs[j];
    const RateTriple& r = rates[j];
    if (!(r.r1 > 0.0 && r.r2 > 0.0 && r.r3 > 0.0) || !std::isfinite(r.r1) || !std::isfinite(r.r2)) continue;
    const auto& sp = inst.pairs[i];
    detail::RecoveryPair rp;
    rp.index = i;
    rp.user_cost = inst.noise * bw[i] / (sp.gain * r.r1) * std::expm1(r.r1 * kLn2 / bw[i]);
    rp.helper_cost = sp.cubic * r.r2 * r.r2;
    rp.time_coef = 1.0 / r.r1 + 1.0 / r.r2;
    if (inst.beta > 0.0) {
      rp.helper_cost += inst.noise * bw[i] / (sp.gain * r.r3) * std::expm1(inst.beta * r.r3 * kLn2 / bw[i]);
      rp.time_coef += 1.0 / r.r3;
    }
    rp.hint = hints[j];
    in.pairs.push_back(rp);
    used.push_back(r);
  }
  const detail::RecoveryOutput rec = detail::recover(inst, in, opt.sdp, opt.recovery_rounds);
  ScaledAllocation a = ScaledAllocation::zero(inst);
  a.S = rec.S;
  a.local = rec.local;
  for (int i = 0; i < inst.n_pairs(); ++i) a.bandwidth[i] = std::max(0.0, bw[i]);
  for (std::size_t j = 0; j < in.pairs.size(); ++j) {
    const int i = in.pairs[j].index;
    const double l = rec.offload[j];
    a.offload[i] = l;
    if (l > 0.0) {
      a.times[i] = {l / used[j].r1, l / used[j].r2, inst.beta > 0.0 ? l / used[j].r3 : 0.0};
    }
  }
  return a;
}

}  // namespace

ScaledAllocation recover_primal(const DualPoint& d, const Instance& inst, const std::vector<double>& bw,
                                const DualSolveOptions& opt) {
  const InnerSolution in = inner_solution(d, inst, bw);
  std::vector<int> pairs;
  std::vector<RateTriple> rates;
  std::vector<double> hints;
  for (int i = 0; i < inst.n_pairs(); ++i) {
    if (bw[i] <= 0.0) continue;
    pairs.push_back(i);
    rates.push_back(in.rates[i]);
    hints.push_back(in.offload_bits[i]);
  }
  return recover_from_rates(inst, bw, pairs, rates, hints, in.local_bits, opt);
}

StageResult solve_p21_scaled(const Instance& inst, const std::vector<double>& bw, const DualSolveOptions& opt) {
  if (static_cast<int>(bw.size()) != inst.n_pairs()) {
    throw Error(ErrorKind::DimensionMismatch, "bandwidths", "one bandwidth per pair expected");
  }
  std::vector<bool> ok(inst.n_pairs());
  for (int i = 0; i < inst.n_pairs(); ++i) ok[i] = bw[i] > 0.0;
  detail::DualLayout L;
  L.active = detail::active_set(inst, ok);
  L.with_rho = !opt.eliminate_time_prices;
  L.with_gamma = !inst.fixed_cov.has_value();
  L.n_ets = inst.n_ets;
  const int U = L.n_users(), P = L.n_pairs();
  const double T = inst.T, T2 = T * T, te = T * inst.eta;

  StageResult res;
  res.alloc = ScaledAllocation::zero(inst);
  for (int i = 0; i < inst.n_pairs(); ++i) res.alloc.bandwidth[i] = std::max(0.0, bw[i]);
  res.duals.lambda.assign(inst.n_users, 0.0);
  res.duals.mu.assign(inst.n_pairs(), 0.0);
  res.duals.rho.assign(inst.n_pairs(), 0.0);
  if (L.with_gamma) res.duals.gamma.assign(inst.n_ets, 0.0);
  if (U == 0) {
    res.converged = true;
    if (L.with_gamma) res.alloc.S = Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
    else res.alloc.S = *inst.fixed_cov;
    return res;
  }

  std::vector<PairParams> params;
  std::vector<int> owner;  // layout index of the pair's user
  for (int i : L.active.pairs) {
    params.push_back(params_of(inst, i, bw[i]));
    owner.push_back(static_cast<int>(std::find(L.active.users.begin(), L.active.users.end(), inst.pairs[i].user) -
                                     L.active.users.begin()));
  }
  std::vector<double> user_h(U), pair_h(P);
  for (int j = 0; j < U; ++j) user_h[j] = detail::dual_harvest(inst, inst.g_user[L.active.users[j]]);
  for (int j = 0; j < P; ++j) pair_h[j] = detail::dual_harvest(inst, inst.pairs[L.active.pairs[j]].g);

  const int n = L.dim();
  Eigen::VectorXd center(n), scale(n);
  for (int j = 0; j < U; ++j) center[L.lambda_at(j)] = 1.0;
  for (int j = 0; j < P; ++j) center[L.mu_at(j)] = 1.0;
  if (L.with_rho)
    for (int j = 0; j < P; ++j) center[L.rho_at(j)] = 1.0 / T;
  if (L.with_gamma)
    for (int m = 0; m < inst.n_ets; ++m) center[L.gamma_at(m)] = 1.0 / inst.power[m];
  scale = center;

  struct Eval {
    double value = 0.0;
    Eigen::VectorXd grad;
    std::vector<double> local;
    std::vector<PairInner> pairs;
    std::vector<double> rho;
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    Eval e;
    e.grad = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < U; ++j) {
      const int k = L.active.users[j];
      const double lam = x[L.lambda_at(j)];
      const double l0 = local_bits_scaled(inst, k, lam);
      const double comp = inst.user_cubic[k] * l0 * l0 * l0 / T2;
      e.local.push_back(l0);
      e.value += l0 - lam * comp + lam * user_h[j];
      e.grad[L.lambda_at(j)] += user_h[j] - comp;
    }
    for (int j = 0; j < P; ++j) {
      const PairParams& p = params[j];
      const double lam = x[L.lambda_at(owner[j])];
      const double mu = x[L.mu_at(j)];
      double rho = 0.0;
      PairInner pi;
      if (L.with_rho) {
        rho = x[L.rho_at(j)];
        pi = pair_inner(p, lam, mu, rho);
      } else {
        pi = pair_inner_min_rho(p, lam, mu, &rho);
      }
      e.value += pi.value + mu * pair_h[j];
      double e1 = 0.0, e23 = 0.0;
      if (pi.bits > 0.0) {
        e1 = p.noise * pi.times[0] * p.b / p.h * std::expm1(pi.bits / (pi.times[0] * p.b) * kLn2);
        e23 = p.cubic * pi.bits * pi.bits * pi.bits / (pi.times[1] * pi.times[1]);
        if (p.beta > 0.0) {
          e23 += p.noise * pi.times[2] * p.b / p.h * std::expm1(p.beta * pi.bits / (pi.times[2] * p.b) * kLn2);
        }
      }
      e.grad[L.lambda_at(owner[j])] -= e1;
      e.grad[L.mu_at(j)] = pair_h[j] - e23;
      if (L.with_rho) e.grad[L.rho_at(j)] = T - (pi.times[0] + pi.times[1] + pi.times[2]);
      e.pairs.push_back(pi);
      e.rho.push_back(rho);
    }
    if (L.with_gamma) {
      for (int m = 0; m < inst.n_ets; ++m) {
        e.value += x[L.gamma_at(m)] * inst.power[m];
        e.grad[L.gamma_at(m)] = inst.power[m];
      }
    }
    return e;
  };

  auto build_F = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
    auto view = F.selfadjointView<Eigen::Lower>();
    for (int j = 0; j < U; ++j) view.rankUpdate(inst.g_user[L.active.users[j]], te * x[L.lambda_at(j)]);
    for (int j = 0; j < P; ++j) view.rankUpdate(inst.pairs[L.active.pairs[j]].g, te * x[L.mu_at(j)]);
    for (int m = 0; m < inst.n_ets; ++m) {
      F.diagonal().segment(m * inst.antennas, inst.antennas).array() -= x[L.gamma_at(m)];
    }
    return F;
  };

  const CutOracle oracle = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j) {
      const bool positive = j < U + P;  // lambda and mu
      const double floor = positive ? DualPoint::kPositiveFloor : 0.0;
      if (x[j] < floor) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g[j] = -1.0;
        return CutOracleResponse::feasibility(g);
      }
    }
    if (L.with_gamma) {
      const Eigen::MatrixXcd F = build_F(x);
      Eigen::MatrixXcd shifted = -F;
      shifted.diagonal().array() += kLmiTol;
      Eigen::LLT<Eigen::MatrixXcd> llt(shifted);
      if (llt.info() != Eigen::Success) {
        Eigen::MatrixXcd full = F.selfadjointView<Eigen::Lower>();
        const EigPair top = hermitian_max_eigpair(full);
        if (top.value > kLmiTol) {
          Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
          for (int j = 0; j < U; ++j) g[L.lambda_at(j)] = te * std::norm(top.vector.dot(inst.g_user[L.active.users[j]]));
          for (int j = 0; j < P; ++j) g[L.mu_at(j)] = te * std::norm(top.vector.dot(inst.pairs[L.active.pairs[j]].g));
          for (int m = 0; m < inst.n_ets; ++m) {
            g[L.gamma_at(m)] = -top.vector.segment(m * inst.antennas, inst.antennas).squaredNorm();
          }
          return CutOracleResponse::feasibility(g);
        }
      }
    }
    Eval e = evaluate(x);
    return CutOracleResponse::objective(e.value, std::move(e.grad));
  };

  EllipsoidOptions eo = opt.ellipsoid;
  eo.scale = scale;
  const EllipsoidResult er = ellipsoid_minimize(oracle, center, eo);
  const Eval best = evaluate(er.point);
  res.dual = er.best_value;
  res.iterations = er.iterations;
  res.converged = er.converged;

  for (int j = 0; j < U; ++j) res.duals.lambda[L.active.users[j]] = er.point[L.lambda_at(j)];
  std::vector<RateTriple> rates;
  std::vector<double> hints;
  for (int j = 0; j < P; ++j) {
    const int i = L.active.pairs[j];
    res.duals.mu[i] = er.point[L.mu_at(j)];
    res.duals.rho[i] = best.rho[j];
    rates.push_back(best.pairs[j].rates);
    hints.push_back(best.pairs[j].bits);
  }
  if (L.with_gamma)
    for (int m = 0; m < inst.n_ets; ++m) res.duals.gamma[m] = er.point[L.gamma_at(m)];

  std::vector<double> local_hint(inst.n_users, 0.0);
  for (int j = 0; j < U; ++j) local_hint[L.active.users[j]] = best.local[j];
  res.alloc = recover_from_rates(inst, bw, L.active.pairs, rates, hints, local_hint, opt);
  res.primal = res.alloc.objective();
  return res;
}

SolveReport make_report(const Instance& inst, const StageResult& r, double gap_tol) {
  SolveReport rep;
  rep.allocation = to_public(inst, r.alloc);
  rep.objective_bits = rep.allocation.total_bits();
  rep.dual_value = r.dual * units::kBitsPerUnit;
  rep.rel_gap = r.rel_gap();
  rep.iterations = r.iterations;
  rep.status = r.converged && rep.rel_gap <= gap_tol ? SolveStatus::Converged : SolveStatus::IterLimit;
  const Eigen::VectorXd flat = r.duals.flatten();
  rep.duals.assign(flat.data(), flat.data() + flat.size());
  return rep;
}

SolveReport solve_p21(const Instance& inst, const std::vector<double>& bw, const DualSolveOptions& opt) {
  return make_report(inst, solve_p21_scaled(inst, bw, opt), opt.gap_tol);
}

}  // namespace wpmec
