// SPDX-License-Identifier: Apache-2.0

#include "wpmec/p22.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "stage_common.hpp"
#include "wpmec/radio.hpp"

namespace wpmec {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLmiTol = 1e-9;

// (noise t b / h)(2^{s l / (t b)} - 1)
double slot_energy(double l, double t, double b, double h, double noise, double s) {
  if (l <= 0.0 || s == 0.0) return 0.0;
  return noise * t * b / h * std::expm1(s * l / (t * b) * kLn2);
}

bool usable(const std::array<double, 3>& t, double beta) {
  return t[0] > 0.0 && t[1] > 0.0 && (beta == 0.0 || t[2] > 0.0);
}

}  // namespace

double spectral_kernel(double x) {
  const double y = x * kLn2;
  if (std::abs(y) < 1e-2) {
    // sum_{n >= 2} (n - 1) y^n / n!
    double term = y * y / 2.0, sum = 0.0;
    for (int n = 2; n < 12; ++n) {
      sum += (n - 1) * term;
      term *= y / (n + 1);
    }
    return sum;
  }
  const double em = std::expm1(y);
  return y * (1.0 + em) - em;
}

double pair_bandwidth_lagrangian(double l, double b, double a, double c, double d, const std::array<double, 3>& t,
                                 double h, double N0, double beta, double xi, double C) {
  if (l > 0.0 && !(b > 0.0)) return -std::numeric_limits<double>::infinity();
  const double cubic = xi * C * C * C;
  const double comp = l > 0.0 ? cubic * l * l * l / (t[1] * t[1]) : 0.0;
  return l - a * slot_energy(l, t[0], b, h, N0, 1.0) - c * comp - c * slot_energy(l, t[2], b, h, N0, beta) - d * b;
}

PairStationaryPoint pair_bandwidth_inner(double a, double c, double d, const std::array<double, 3>& t, double h,
                                         double N0, double beta, double cubic, double band_cap) {
  PairStationaryPoint out;
  const double k1 = a * N0 / h;
  const double k3 = c * N0 / h;
  const bool dl = beta > 0.0;
  // Marginal communication cost per bit at spectral load E.
  auto marginal = [&](double E) {
    double m = k1 * kLn2 * std::exp2(E / t[0]);
    if (dl) m += k3 * beta * kLn2 * std::exp2(beta * E / t[2]);
    return m;
  };
  auto bits_at_cap = [&](double b) {
    // Solve 1 - k1 ln2 2^{l/(t1 b)} - 3 c cubic l^2/t2^2 - k3 beta ln2 2^{beta l/(t3 b)} = 0.
    const double q = 3.0 * c * cubic / (t[1] * t[1]);
    auto f = [&](double l) { return 1.0 - marginal(l / b) - q * l * l; };
    auto df = [&](double l) {
      const double E = l / b;
      double v = k1 * kLn2 * kLn2 / (t[0] * b) * std::exp2(E / t[0]) + 2.0 * q * l;
      if (dl) v += k3 * beta * beta * kLn2 * kLn2 / (t[2] * b) * std::exp2(beta * E / t[2]);
      return v;
    };
    if (!(f(0.0) > 0.0)) return 0.0;
    // f is concave and decreasing: Newton from the right of the root stays right.
    // Each term alone bounds the root, so start at the tightest of them.
    double l = 1.0 / std::sqrt(q);
    if (k1 * kLn2 < 1.0) l = std::min(l, t[0] * b * std::log2(1.0 / (k1 * kLn2)));
    if (dl && k3 * beta * kLn2 < 1.0) l = std::min(l, t[2] * b / beta * std::log2(1.0 / (k3 * beta * kLn2)));
    double lo = 0.0;
    bool done = false;
    for (int it = 0; it < 200 && !done; ++it) {
      const double r = f(l);
      if (r > 0.0) {
        lo = l;
        break;
      }
      const double next = l + r / df(l);
      if (!(next > lo) || !(next < l)) break;
      done = l - next <= 1e-15 * l;
      l = next;
    }
    if (!done && f(l) < 0.0) {
      for (int it = 0; it < 200 && l - lo > 1e-15 * l; ++it) {
        const double mid = 0.5 * (lo + l);
        (f(mid) > 0.0 ? lo : l) = mid;
      }
    }
    return std::max(lo, l);
  };

  double E = 0.0;
  if (d > 0.0) {
    // Psi(E) = k1 t1 phi(E/t1) + k3 t3 phi(beta E/t3) = d; Psi is convex and increasing.
    auto psi = [&](double x) {
      double v = k1 * t[0] * spectral_kernel(x / t[0]);
      if (dl) v += k3 * t[2] * spectral_kernel(beta * x / t[2]);
      return v;
    };
    auto dpsi = [&](double x) {
      double v = k1 * (x / t[0]) * kLn2 * kLn2 * std::exp2(x / t[0]);
      if (dl) v += k3 * beta * (beta * x / t[2]) * kLn2 * kLn2 * std::exp2(beta * x / t[2]);
      return v;
    };
    double hi = t[0];
    for (int it = 0; it < 2000 && psi(hi) < d; ++it) hi *= 2.0;
    double lo = 0.0;
    // Newton from the right of the root stays on the right for a convex increasing function.
    E = hi;
    for (int it = 0; it < 200; ++it) {
      const double r = psi(E) - d;
      if (r < 0.0) {
        lo = E;
        E = 0.5 * (lo + hi);
        continue;
      }
      hi = E;
      if (r <= 1e-16 * d) break;
      const double g = dpsi(E);
      const double next = g > 0.0 ? E - r / g : 0.5 * (lo + hi);
      if (!(next > lo) || !(next <= hi)) {
        E = 0.5 * (lo + hi);
      } else {
        E = next;
      }
      if (hi - lo <= 1e-15 * hi) break;
    }
  }
  const double D = 1.0 - marginal(E);
  if (!(D > 0.0)) {
    out.priced_out = true;
    out.spectral_load = E;
    return out;
  }
  double l = t[1] * std::sqrt(D / (3.0 * c * cubic));
  double b = E > 0.0 ? l / E : std::numeric_limits<double>::infinity();
  if (b > band_cap) {
    out.capped = true;
    b = band_cap;
    l = bits_at_cap(b);
    if (l <= 0.0) {
      out.priced_out = true;
      return out;
    }
    E = l / b;
  }
  out.bits = l;
  out.bandwidth = b;
  out.spectral_load = E;
  out.value = l - a * slot_energy(l, t[0], b, h, N0, 1.0) - c * cubic * l * l * l / (t[1] * t[1]) -
              c * slot_energy(l, t[2], b, h, N0, beta) - d * b;
  return out;
}

PairStationaryPoint pair_stationary_point(double a, double c, double d, const std::array<double, 3>& t, double h,
                                          double N0, double beta, double xi, double C, double band_cap) {
  if (!(a > 0.0) || !(c > 0.0) || d < 0.0) {
    throw Error(ErrorKind::DomainError, "duals", "need a, c > 0 and d >= 0");
  }
  if (!usable(t, beta)) throw Error(ErrorKind::DegenerateSlot, "times", "slot times must be positive");
  const PairStationaryPoint p = pair_bandwidth_inner(a, c, d, t, h, N0, beta, xi * C * C * C, band_cap);
  if (p.priced_out) {
    throw Error(ErrorKind::NoInteriorSolution, "pair", "net gain is negative for every positive task size");
  }
  return p;
}

StageResult solve_p22_scaled(const Instance& inst, const std::vector<std::array<double, 3>>& times,
                             const DualSolveOptions& opt) {
  if (static_cast<int>(times.size()) != inst.n_pairs()) {
    throw Error(ErrorKind::DimensionMismatch, "times", "one time triple per pair expected");
  }
  std::vector<bool> ok(inst.n_pairs());
  for (int i = 0; i < inst.n_pairs(); ++i) ok[i] = usable(times[i], inst.beta);
  detail::DualLayout L;
  L.active = detail::active_set(inst, ok);
  L.with_band = L.n_pairs() > 0;
  L.with_gamma = !inst.fixed_cov.has_value();
  L.n_ets = inst.n_ets;
  const int U = L.n_users(), P = L.n_pairs();
  const double T2 = inst.T * inst.T, te = inst.T * inst.eta;

  StageResult res;
  res.alloc = ScaledAllocation::zero(inst);
  res.alloc.times = times;
  res.duals.lambda.assign(inst.n_users, 0.0);
  res.duals.mu.assign(inst.n_pairs(), 0.0);
  res.duals.rho.assign(inst.n_pairs(), 0.0);
  if (L.with_gamma) res.duals.gamma.assign(inst.n_ets, 0.0);
  if (U == 0) {
    res.converged = true;
    res.alloc.S = inst.fixed_cov ? *inst.fixed_cov : Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
    return res;
  }

  std::vector<int> owner;
  for (int i : L.active.pairs) {
    owner.push_back(static_cast<int>(std::find(L.active.users.begin(), L.active.users.end(), inst.pairs[i].user) -
                                     L.active.users.begin()));
  }
  std::vector<double> user_h(U), pair_h(P);
  for (int j = 0; j < U; ++j) user_h[j] = detail::dual_harvest(inst, inst.g_user[L.active.users[j]]);
  for (int j = 0; j < P; ++j) pair_h[j] = detail::dual_harvest(inst, inst.pairs[L.active.pairs[j]].g);

  const int n = L.dim();
  Eigen::VectorXd center(n), scale(n);
  for (int j = 0; j < U; ++j) center[L.lambda_at(j)] = scale[L.lambda_at(j)] = 1.0;
  for (int j = 0; j < P; ++j) center[L.mu_at(j)] = scale[L.mu_at(j)] = 1.0;
  if (L.with_band) {
    center[L.band_at()] = 1e-2;
    scale[L.band_at()] = 1.0;
  }
  if (L.with_gamma) {
    for (int m = 0; m < inst.n_ets; ++m) center[L.gamma_at(m)] = scale[L.gamma_at(m)] = 1.0 / inst.power[m];
  }

  struct Eval {
    double value = 0.0;
    Eigen::VectorXd grad;
    std::vector<double> local;
    std::vector<PairStationaryPoint> pairs;
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    Eval e;
    e.grad = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < U; ++j) {
      const int k = L.active.users[j];
      const double lam = x[L.lambda_at(j)];
      const double l0 = inst.T / std::sqrt(3.0 * lam * inst.user_cubic[k]);
      const double comp = inst.user_cubic[k] * l0 * l0 * l0 / T2;
      e.local.push_back(l0);
      e.value += l0 - lam * comp + lam * user_h[j];
      e.grad[L.lambda_at(j)] += user_h[j] - comp;
    }
    const double d = L.with_band ? x[L.band_at()] : 0.0;
    double used = 0.0;
    for (int j = 0; j < P; ++j) {
      const int i = L.active.pairs[j];
      const auto& sp = inst.pairs[i];
      const auto& t = times[i];
      const double lam = x[L.lambda_at(owner[j])];
      const double mu = x[L.mu_at(j)];
      const PairStationaryPoint ps =
          pair_bandwidth_inner(lam, mu, d, t, sp.gain, inst.noise, inst.beta, sp.cubic, inst.B);
      e.value += ps.value + mu * pair_h[j];
      const double e1 = slot_energy(ps.bits, t[0], ps.bandwidth, sp.gain, inst.noise, 1.0);
      const double e2 = ps.bits > 0.0 ? sp.cubic * ps.bits * ps.bits * ps.bits / (t[1] * t[1]) : 0.0;
      const double e3 = slot_energy(ps.bits, t[2], ps.bandwidth, sp.gain, inst.noise, inst.beta);
      e.grad[L.lambda_at(owner[j])] -= e1;
      e.grad[L.mu_at(j)] = pair_h[j] - e2 - e3;
      used += ps.bandwidth;
      e.pairs.push_back(ps);
    }
    if (L.with_band) {
      e.value += d * inst.B;
      e.grad[L.band_at()] = inst.B - used;
    }
    if (L.with_gamma) {
      for (int m = 0; m < inst.n_ets; ++m) {
        e.value += x[L.gamma_at(m)] * inst.power[m];
        e.grad[L.gamma_at(m)] = inst.power[m];
      }
    }
    return e;
  };

  const CutOracle oracle = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j) {
      const double floor = j < U + P ? DualPoint::kPositiveFloor : 0.0;
      if (x[j] < floor) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g[j] = -1.0;
        return CutOracleResponse::feasibility(g);
      }
    }
    if (L.with_gamma) {
      Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
      auto view = F.selfadjointView<Eigen::Lower>();
      for (int j = 0; j < U; ++j) view.rankUpdate(inst.g_user[L.active.users[j]], te * x[L.lambda_at(j)]);
      for (int j = 0; j < P; ++j) view.rankUpdate(inst.pairs[L.active.pairs[j]].g, te * x[L.mu_at(j)]);
      for (int m = 0; m < inst.n_ets; ++m) {
        F.diagonal().segment(m * inst.antennas, inst.antennas).array() -= x[L.gamma_at(m)];
      }
      Eigen::MatrixXcd shifted = -F;
      shifted.diagonal().array() += kLmiTol;
      Eigen::LLT<Eigen::MatrixXcd> llt(shifted);
      if (llt.info() != Eigen::Success) {
        const Eigen::MatrixXcd full = F.selfadjointView<Eigen::Lower>();
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
  res.bandwidth_price = L.with_band ? er.point[L.band_at()] : 0.0;
  for (int j = 0; j < U; ++j) res.duals.lambda[L.active.users[j]] = er.point[L.lambda_at(j)];
  for (int j = 0; j < P; ++j) res.duals.mu[L.active.pairs[j]] = er.point[L.mu_at(j)];
  if (L.with_gamma)
    for (int m = 0; m < inst.n_ets; ++m) res.duals.gamma[m] = er.point[L.gamma_at(m)];

  detail::RecoveryInput in;
  in.band_budget = inst.B;
  in.local_hint.assign(inst.n_users, 0.0);
  for (int j = 0; j < U; ++j) in.local_hint[L.active.users[j]] = best.local[j];
  for (int j = 0; j < P; ++j) {
    const PairStationaryPoint& ps = best.pairs[j];
    if (ps.priced_out || !(ps.bits > 0.0) || !(ps.spectral_load > 0.0)) continue;
    const int i = L.active.pairs[j];
    const auto& sp = inst.pairs[i];
    const auto& t = times[i];
    const double E = ps.spectral_load;
    detail::RecoveryPair rp;
    rp.index = i;
    rp.user_cost = inst.noise * t[0] / (sp.gain * E) * std::expm1(E / t[0] * kLn2);
    rp.helper_cost = inst.beta > 0.0 ? inst.noise * t[2] / (sp.gain * E) * std::expm1(inst.beta * E / t[2] * kLn2) : 0.0;
    rp.helper_cubic = sp.cubic / (t[1] * t[1]);
    rp.band_coef = 1.0 / E;
    rp.hint = ps.bits;
    in.pairs.push_back(rp);
  }
  const detail::RecoveryOutput rec = detail::recover(inst, in, opt.sdp, opt.recovery_rounds);
  res.alloc.S = rec.S;
  res.alloc.local = rec.local;
  for (std::size_t j = 0; j < in.pairs.size(); ++j) {
    const int i = in.pairs[j].index;
    res.alloc.offload[i] = rec.offload[j];
    res.alloc.bandwidth[i] = rec.offload[j] * in.pairs[j].band_coef;
  }
  res.primal = res.alloc.objective();
  return res;
}

SolveReport solve_p22(const Instance& inst, const std::vector<std::array<double, 3>>& times,
                      const DualSolveOptions& opt) {
  return make_report(inst, solve_p22_scaled(inst, times, opt), opt.gap_tol);
}

}  // namespace wpmec
