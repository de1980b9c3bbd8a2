// SPDX-License-Identifier: Apache-2.0

#include "wpmec/instance.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "wpmec/radio.hpp"

namespace wpmec {

namespace {

constexpr double kChannelScale = 31.622776601683793;  // sqrt(J -> mJ)

double cubic_coefficient(const ComputeProfile& p) {
  // xi C^3 [J / bit^3] -> [mJ / Mbit^3]
  const double c3 = p.cycles_per_bit * p.cycles_per_bit * p.cycles_per_bit;
  return p.switch_capacitance * c3 * std::pow(units::kBitsPerUnit, 3) / units::kJoulesPerUnit;
}

// Degenerate slots (bits with no time or bandwidth) cost infinite energy.
template <class F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

Instance Instance::build(const SystemConfig& c, const ChannelSet& ch, const Pairing& p) {
  validate(c, ch, p);
  Instance inst;
  inst.n_users = c.n_users;
  inst.n_ets = c.n_ets;
  inst.antennas = c.antennas_per_et;
  inst.dim = c.dim();
  inst.T = c.block_duration;
  inst.B = c.total_bandwidth / units::kHzPerUnit;
  inst.noise = c.noise_psd * units::kHzPerUnit / units::kJoulesPerUnit;
  inst.eta = c.eh_efficiency;
  inst.beta = c.result_ratio;
  inst.power = c.power_budget;
  for (const auto& u : c.user_compute) inst.user_cubic.push_back(cubic_coefficient(u));
  for (const auto& g : ch.et_user) inst.g_user.push_back(g * kChannelScale);
  for (const auto& [k, m] : p.pairs()) {
    ScaledPair sp;
    sp.user = k;
    sp.helper = m;
    sp.gain = ch.d2d_gain(k, m);
    sp.cubic = cubic_coefficient(c.helper_compute[m]);
    sp.g = ch.et_helper[m] * kChannelScale;
    inst.pairs.push_back(std::move(sp));
  }
  return inst;
}

double Instance::harvest(const Eigen::MatrixXcd& S, const Eigen::VectorXcd& g) const {
  return harvested_energy(S, g, T, eta);
}

double Instance::et_power(const Eigen::MatrixXcd& S, int n) const {
  return S.diagonal().segment(n * antennas, antennas).real().sum();
}

Eigen::MatrixXcd Instance::uniform_covariance() const {
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n < n_ets; ++n) {
    for (int a = 0; a < antennas; ++a) {
      S(n * antennas + a, n * antennas + a) = power[n] / antennas;
    }
  }
  return S;
}

Instance Instance::subset(const std::vector<int>& keep) const {
  Instance out = *this;
  out.pairs.clear();
  for (int i : keep) out.pairs.push_back(pairs.at(i));
  return out;
}

ScaledAllocation ScaledAllocation::zero(const Instance& inst) {
  ScaledAllocation a;
  a.S = Eigen::MatrixXcd::Zero(inst.dim, inst.dim);
  a.local.assign(inst.n_users, 0.0);
  a.offload.assign(inst.pairs.size(), 0.0);
  a.bandwidth.assign(inst.pairs.size(), 0.0);
  a.times.assign(inst.pairs.size(), {0.0, 0.0, 0.0});
  return a;
}

double ScaledAllocation::objective() const {
  return std::accumulate(local.begin(), local.end(), 0.0) +
         std::accumulate(offload.begin(), offload.end(), 0.0);
}

EnergyLedger energy_ledger(const Instance& inst, const ScaledAllocation& a) {
  EnergyLedger e;
  e.user_harvest.assign(inst.n_users, 0.0);
  e.user_tx.assign(inst.n_users, 0.0);
  e.user_comp.assign(inst.n_users, 0.0);
  for (int k = 0; k < inst.n_users; ++k) {
    e.user_harvest[k] = inst.harvest(a.S, inst.g_user[k]);
    e.user_comp[k] = inst.user_cubic[k] * a.local[k] * a.local[k] * a.local[k] / (inst.T * inst.T);
  }
  for (int i = 0; i < inst.n_pairs(); ++i) {
    const auto& p = inst.pairs[i];
    const double l = a.offload[i];
    const double b = a.bandwidth[i];
    const auto& t = a.times[i];
    e.user_tx[p.user] += guarded([&] { return offload_energy(l, t[0], b, p.gain, inst.noise); });
    e.helper_harvest.push_back(inst.harvest(a.S, p.g));
    e.helper_comp.push_back(guarded([&] { return helper_compute_energy(l, t[1], p.cubic, 1.0); }));
    e.helper_tx.push_back(
        guarded([&] { return download_energy(l, t[2], b, p.gain, inst.noise, inst.beta); }));
  }
  return e;
}

PrimalAllocation to_public(const Instance& inst, const ScaledAllocation& a) {
  PrimalAllocation out;
  out.energy_cov = a.S;
  for (double v : a.local) out.local_bits.push_back(v * units::kBitsPerUnit);
  for (int i = 0; i < inst.n_pairs(); ++i) {
    out.pairs.push_back({inst.pairs[i].user, inst.pairs[i].helper});
    out.offload_bits.push_back(a.offload[i] * units::kBitsPerUnit);
    out.bandwidths.push_back(a.bandwidth[i] * units::kHzPerUnit);
    out.slot_times.push_back(a.times[i]);
  }
  return out;
}

ScaledAllocation from_public(const Instance& inst, const PrimalAllocation& a) {
  if (a.local_bits.size() != static_cast<std::size_t>(inst.n_users) ||
      a.offload_bits.size() != inst.pairs.size() || a.bandwidths.size() != inst.pairs.size() ||
      a.slot_times.size() != inst.pairs.size() || a.energy_cov.rows() != inst.dim ||
      a.energy_cov.cols() != inst.dim) {
    throw Error(ErrorKind::DimensionMismatch, "allocation", "does not match the instance");
  }
  ScaledAllocation out;
  out.S = a.energy_cov;
  for (double v : a.local_bits) out.local.push_back(v / units::kBitsPerUnit);
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
    out.offload.push_back(a.offload_bits[i] / units::kBitsPerUnit);
    out.bandwidth.push_back(a.bandwidths[i] / units::kHzPerUnit);
    out.times.push_back(a.slot_times[i]);
  }
  return out;
}

}  // namespace wpmec
