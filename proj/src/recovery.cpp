// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "stage_common.hpp"

namespace wpmec::detail {

double harvest_upper_bound(const Instance& inst, const Eigen::VectorXcd& g) {
  if (inst.fixed_cov) return inst.harvest(*inst.fixed_cov, g);
  // Coherent rank-one beam with full power on every ET.
  double amp = 0.0;
  for (int n = 0; n < inst.n_ets; ++n) {
    amp += std::sqrt(inst.power[n]) * g.segment(n * inst.antennas, inst.antennas).norm();
  }
  return inst.T * inst.eta * amp * amp;
}

double dual_harvest(const Instance& inst, const Eigen::VectorXcd& g) {
  return inst.fixed_cov ? inst.harvest(*inst.fixed_cov, g) : 0.0;
}

ActiveSet active_set(const Instance& inst, const std::vector<bool>& pair_ok) {
  ActiveSet a;
  std::vector<bool> user_on(inst.n_users, false);
  for (int k = 0; k < inst.n_users; ++k) {
    if (harvest_upper_bound(inst, inst.g_user[k]) > 0.0) {
      user_on[k] = true;
      a.users.push_back(k);
    }
  }
  for (int i = 0; i < inst.n_pairs(); ++i) {
    const auto& p = inst.pairs[i];
    if (pair_ok[i] && user_on[p.user] && harvest_upper_bound(inst, p.g) > 0.0) a.pairs.push_back(i);
  }
  return a;
}

double max_bits_within(double w, double v, double H) {
  if (!(H > 0.0)) return 0.0;
  if (w <= 0.0) return v > 0.0 ? H / v : INFINITY;
  double hi = std::cbrt(H / w);
  if (v > 0.0) hi = std::min(hi, H / v);
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (w * mid * mid * mid + v * mid <= H ? lo : hi) = mid;
  }
  return lo;
}

namespace {

Eigen::MatrixXcd outer(const Eigen::VectorXcd& g, double scale) { return scale * g * g.adjoint(); }

Eigen::MatrixXcd clean_covariance(const Instance& inst, const Eigen::MatrixXcd& S0) {
  const Eigen::MatrixXcd H = 0.5 * (S0 + S0.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  Eigen::MatrixXcd S =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().adjoint();
  S = 0.5 * (S + S.adjoint()).eval();
  double factor = 1.0;
  for (int n = 0; n < inst.n_ets; ++n) {
    const double used = inst.et_power(S, n);
    if (used > inst.power[n]) factor = std::min(factor, inst.power[n] / used);
  }
  return S * factor;
}

}  // namespace

namespace {

RecoveryOutput recover_live(const Instance& inst, const RecoveryInput& in, const SdpOptions& sdp_opt, int rounds) {
  const int K = inst.n_users;
  const int P = static_cast<int>(in.pairs.size());
  const bool variable_S = !inst.fixed_cov.has_value();
  const double te = inst.T * inst.eta;
  const double T2 = inst.T * inst.T;

  // Users that cannot harvest compute nothing and get no variables.
  std::vector<int> slot(K, -1);
  int U = 0;
  for (int k = 0; k < K; ++k) {
    if (harvest_upper_bound(inst, inst.g_user[k]) > 0.0) slot[k] = U++;
  }

  // Scalar layout: l0 (U), e0 (U), l (P), e (cubic pairs).
  std::vector<int> e_index(P, -1);
  int n_scalars = 2 * U + P;
  for (int j = 0; j < P; ++j) {
    if (in.pairs[j].helper_cubic > 0.0) e_index[j] = n_scalars++;
  }
  auto l0_at = [&](int k) { return slot[k]; };
  auto e0_at = [&](int k) { return U + slot[k]; };
  auto l_at = [U](int j) { return 2 * U + j; };

  LinearSdp base;
  base.psd_dim = variable_S ? inst.dim : 0;
  base.n_scalars = n_scalars;
  base.objective_scalars = Eigen::VectorXd::Zero(n_scalars);
  for (int k = 0; k < K; ++k)
    if (slot[k] >= 0) base.objective_scalars[l0_at(k)] = 1.0;
  for (int j = 0; j < P; ++j) base.objective_scalars[l_at(j)] = 1.0;

  auto row = [&] { return Eigen::VectorXd::Zero(n_scalars).eval(); };
  for (int k = 0; k < K; ++k) {
    if (slot[k] < 0) continue;
    SdpConstraint c;
    c.scalars = row();
    c.scalars[e0_at(k)] = 1.0;
    for (int j = 0; j < P; ++j) {
      if (inst.pairs[in.pairs[j].index].user == k) c.scalars[l_at(j)] = in.pairs[j].user_cost;
    }
    if (variable_S) {
      c.matrix = outer(inst.g_user[k], -te);
    } else {
      c.rhs = inst.harvest(*inst.fixed_cov, inst.g_user[k]);
    }
    base.add(std::move(c));
  }
  for (int j = 0; j < P; ++j) {
    const auto& rp = in.pairs[j];
    const auto& pair = inst.pairs[rp.index];
    SdpConstraint c;
    c.scalars = row();
    c.scalars[l_at(j)] = rp.helper_cost;
    if (e_index[j] >= 0) c.scalars[e_index[j]] = 1.0;
    if (variable_S) {
      c.matrix = outer(pair.g, -te);
    } else {
      c.rhs = inst.harvest(*inst.fixed_cov, pair.g);
    }
    base.add(std::move(c));
    if (rp.time_coef > 0.0) {
      SdpConstraint t;
      t.scalars = row();
      t.scalars[l_at(j)] = rp.time_coef;
      t.rhs = inst.T;
      base.add(std::move(t));
    }
  }
  {
    SdpConstraint c;
    c.scalars = row();
    bool any = false;
    for (int j = 0; j < P; ++j) {
      if (in.pairs[j].band_coef > 0.0) {
        c.scalars[l_at(j)] = in.pairs[j].band_coef;
        any = true;
      }
    }
    c.rhs = in.band_budget;
    if (any) base.add(std::move(c));
  }
  if (variable_S) {
    for (int n = 0; n < inst.n_ets; ++n) {
      SdpConstraint c;
      c.matrix = Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
      c.matrix.diagonal().segment(n * inst.antennas, inst.antennas).setOnes();
      c.rhs = inst.power[n];
      base.add(std::move(c));
    }
  }

  // Tangent cuts e >= a (3 z^2 l - 2 z^3) of the convex cubic terms.
  auto local_cut = [&](int k, double z) {
    const double a = inst.user_cubic[k] / T2;
    SdpConstraint c;
    c.scalars = row();
    c.scalars[l0_at(k)] = 3.0 * a * z * z;
    c.scalars[e0_at(k)] = -1.0;
    c.rhs = 2.0 * a * z * z * z;
    base.add(std::move(c));
  };
  auto helper_cut = [&](int j, double z) {
    const double w = in.pairs[j].helper_cubic;
    SdpConstraint c;
    c.scalars = row();
    c.scalars[l_at(j)] = 3.0 * w * z * z;
    c.scalars[e_index[j]] = -1.0;
    c.rhs = 2.0 * w * z * z * z;
    base.add(std::move(c));
  };
  for (int k = 0; k < K; ++k) {
    if (slot[k] < 0) continue;
    const double ub = harvest_upper_bound(inst, inst.g_user[k]);
    const double cap = std::cbrt(ub * T2 / inst.user_cubic[k]);
    local_cut(k, std::max(cap, 1e-12));
    const double hint = k < static_cast<int>(in.local_hint.size()) ? in.local_hint[k] : 0.0;
    if (hint > 0.0 && hint < cap) local_cut(k, hint);
  }
  for (int j = 0; j < P; ++j) {
    if (e_index[j] < 0) continue;
    const double ub = harvest_upper_bound(inst, inst.pairs[in.pairs[j].index].g);
    const double cap = std::cbrt(ub / in.pairs[j].helper_cubic);
    helper_cut(j, std::max(cap, 1e-12));
    if (in.pairs[j].hint > 0.0 && in.pairs[j].hint < cap) helper_cut(j, in.pairs[j].hint);
  }

  RecoveryOutput out;
  for (int round = 0; round < std::max(1, rounds); ++round) {
    const SdpSolution sol = solve_linear_sdp(base, sdp_opt);

    // Polish into an exactly feasible allocation.
    RecoveryOutput cur;
    cur.relaxed = sol.objective;
    cur.S = variable_S ? clean_covariance(inst, sol.S) : *inst.fixed_cov;
    cur.offload.assign(P, 0.0);
    for (int j = 0; j < P; ++j) {
      const auto& rp = in.pairs[j];
      const double H = inst.harvest(cur.S, inst.pairs[rp.index].g);
      double l = std::max(0.0, sol.scalars[l_at(j)]);
      l = std::min(l, max_bits_within(rp.helper_cubic, rp.helper_cost, H));
      if (rp.time_coef > 0.0) l = std::min(l, inst.T / rp.time_coef);
      cur.offload[j] = l;
    }
    double band = 0.0;
    for (int j = 0; j < P; ++j) band += in.pairs[j].band_coef * cur.offload[j];
    if (band > in.band_budget && band > 0.0) {
      const double f = in.band_budget / band;
      for (double& l : cur.offload) l *= f;
    }
    cur.local.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
      const double E = inst.harvest(cur.S, inst.g_user[k]);
      double tx = 0.0;
      for (int j = 0; j < P; ++j) {
        if (inst.pairs[in.pairs[j].index].user == k) tx += in.pairs[j].user_cost * cur.offload[j];
      }
      if (tx > E) {
        const double f = tx > 0.0 ? E / tx : 0.0;
        for (int j = 0; j < P; ++j) {
          if (inst.pairs[in.pairs[j].index].user == k) cur.offload[j] *= f;
        }
        tx = E;
      }
      cur.local[k] = std::cbrt(std::max(0.0, E - tx) * T2 / inst.user_cubic[k]);
    }
    cur.objective = 0.0;
    for (double v : cur.local) cur.objective += v;
    for (double v : cur.offload) cur.objective += v;
    if (round == 0 || cur.objective > out.objective) out = cur;
    out.relaxed = sol.objective;

    // New cuts where the relaxation undercounts a cubic term.
    bool added = false;
    const double slack_tol = 1e-9 * (1.0 + std::abs(sol.objective));
    for (int k = 0; k < K; ++k) {
      if (slot[k] < 0) continue;
      const double l0 = sol.scalars[l0_at(k)];
      const double need = inst.user_cubic[k] * l0 * l0 * l0 / T2;
      if (need - sol.scalars[e0_at(k)] > slack_tol && l0 > 0.0) {
        local_cut(k, l0);
        added = true;
      }
    }
    for (int j = 0; j < P; ++j) {
      if (e_index[j] < 0) continue;
      const double l = sol.scalars[l_at(j)];
      const double need = in.pairs[j].helper_cubic * l * l * l;
      if (need - sol.scalars[e_index[j]] > slack_tol && l > 0.0) {
        helper_cut(j, l);
        added = true;
      }
    }
    if (!added || out.relaxed - out.objective <= 1e-9 * (1.0 + out.relaxed)) break;
  }
  return out;
}

}  // namespace

RecoveryOutput recover(const Instance& inst, const RecoveryInput& in, const SdpOptions& sdp_opt, int rounds) {
  // Pairs whose user or helper cannot harvest stay idle.
  RecoveryInput live = in;
  live.pairs.clear();
  std::vector<int> from;
  for (std::size_t j = 0; j < in.pairs.size(); ++j) {
    const auto& pair = inst.pairs[in.pairs[j].index];
    if (harvest_upper_bound(inst, inst.g_user[pair.user]) > 0.0 && harvest_upper_bound(inst, pair.g) > 0.0) {
      live.pairs.push_back(in.pairs[j]);
      from.push_back(static_cast<int>(j));
    }
  }
  if (from.size() == in.pairs.size()) return recover_live(inst, in, sdp_opt, rounds);
  RecoveryOutput out = recover_live(inst, live, sdp_opt, rounds);
  std::vector<double> offload(in.pairs.size(), 0.0);
  for (std::size_t j = 0; j < from.size(); ++j) offload[from[j]] = out.offload[j];
  out.offload = std::move(offload);
  return out;
}

}  // namespace wpmec::detail
