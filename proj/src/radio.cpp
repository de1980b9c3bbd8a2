// SPDX-License-Identifier: Apache-2.0

#include "wpmec/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wpmec/mathkit.hpp"

namespace wpmec {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based stream: draw i of stream (seed, tag, index) is a pure
// function of its coordinates, so realizations never share state.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
      : key_(splitmix(splitmix(seed) ^ splitmix(tag * 0x632BE59BD9B4E019ull + index))) {}

  double uniform() {
    const std::uint64_t bits = splitmix(key_ ^ splitmix(counter_++));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;  // (0, 1)
  }

  // Box-Muller; caches nothing so each call consumes exactly two draws.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::complex<double> complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum StreamTag : std::uint64_t { kUserChannel = 1, kHelperChannel = 2, kD2d = 3, kUserPos = 4, kHelperPos = 5 };

Point2 disc_point(CounterStream& s, const Point2& c, double radius) {
  const double r = radius * std::sqrt(s.uniform());
  const double a = 2.0 * std::numbers::pi * s.uniform();
  return {c.x + r * std::cos(a), c.y + r * std::sin(a)};
}

double exp2m1(double x) { return std::expm1(x * std::numbers::ln2); }

}  // namespace

double Topology::mean_gain(const Point2& a, const Point2& b) const {
  const double d = std::max(min_distance, std::hypot(a.x - b.x, a.y - b.y));
  return std::pow(10.0, pathloss_ref_db / 10.0) * std::pow(d, -pathloss_exponent);
}

Topology make_topology(const TopologySpec& spec, int n_users, int n_helpers, std::uint64_t seed) {
  if (!(spec.pathloss_exponent > 0.0) || !(spec.min_distance > 0.0)) {
    throw Error(ErrorKind::NonPositiveParameter, "topology", "pathloss exponent and min distance must be > 0");
  }
  Topology t;
  t.et_positions = spec.et_positions;
  t.pathloss_ref_db = spec.pathloss_ref_db;
  t.pathloss_exponent = spec.pathloss_exponent;
  t.min_distance = spec.min_distance;
  for (int k = 0; k < n_users; ++k) {
    CounterStream s(seed, kUserPos, k);
    t.user_positions.push_back(disc_point(s, spec.center, spec.user_radius));
  }
  for (int m = 0; m < n_helpers; ++m) {
    CounterStream s(seed, kHelperPos, m);
    t.helper_positions.push_back(disc_point(s, spec.center, spec.helper_radius));
  }
  return t;
}

ChannelSet generate_channels(const Topology& topo, const SystemConfig& config, std::uint64_t seed) {
  if (static_cast<int>(topo.et_positions.size()) != config.n_ets ||
      static_cast<int>(topo.user_positions.size()) != config.n_users ||
      static_cast<int>(topo.helper_positions.size()) != config.n_helpers) {
    throw Error(ErrorKind::DimensionMismatch, "topology", "node counts differ from the system config");
  }
  const int nt = config.antennas_per_et;
  auto et_vector = [&](const Point2& rx, StreamTag tag, int index) {
    CounterStream s(seed, tag, index);
    Eigen::VectorXcd g(config.dim());
    for (int n = 0; n < config.n_ets; ++n) {
      const double pl = topo.mean_gain(topo.et_positions[n], rx);
      for (int a = 0; a < nt; ++a) g[n * nt + a] = s.complex_normal(pl);
    }
    return g;
  };
  ChannelSet ch;
  for (int k = 0; k < config.n_users; ++k) ch.et_user.push_back(et_vector(topo.user_positions[k], kUserChannel, k));
  for (int m = 0; m < config.n_helpers; ++m)
    ch.et_helper.push_back(et_vector(topo.helper_positions[m], kHelperChannel, m));
  ch.d2d_gain.resize(config.n_users, config.n_helpers);
  for (int k = 0; k < config.n_users; ++k) {
    for (int m = 0; m < config.n_helpers; ++m) {
      CounterStream s(seed, kD2d, static_cast<std::uint64_t>(k) * 1000003ull + m);
      const double pl = topo.mean_gain(topo.user_positions[k], topo.helper_positions[m]);
      ch.d2d_gain(k, m) = std::norm(s.complex_normal(pl));
    }
  }
  return ch;
}

double harvested_energy(const Eigen::MatrixXcd& S, const Eigen::VectorXcd& g, double T, double eta) {
  if (S.rows() != g.size() || S.cols() != g.size()) {
    throw Error(ErrorKind::DimensionMismatch, "g", "channel length must match the covariance dimension");
  }
  const double q = g.dot(S * g).real();  // g^H S g
  return std::max(0.0, T * eta * q);
}

double offload_bits(double t, double b, double h, double q, double N0) {
  if (t <= 0.0 || b <= 0.0) return 0.0;
  return t * b * std::log2(1.0 + h * q / (N0 * b));
}

double offload_energy(double bits, double t, double b, double h, double N0) {
  if (bits <= 0.0) return 0.0;
  if (!(t * b > 0.0)) {
    throw Error(ErrorKind::DegenerateSlot, "offload", "positive bits need a slot with t b > 0");
  }
  return N0 * t * b / h * exp2m1(bits / (t * b));
}

double helper_compute_energy(double bits, double t2, double xi, double C) {
  if (bits <= 0.0) return 0.0;
  if (!(t2 > 0.0)) {
    throw Error(ErrorKind::DegenerateSlot, "compute", "positive bits need t2 > 0");
  }
  const double cycles = C * bits;
  return xi * cycles * cycles * cycles / (t2 * t2);
}

double download_energy(double bits, double t3, double b, double h, double N0, double beta) {
  return offload_energy(beta * bits, t3, b, h, N0);
}

double local_compute_energy(double bits, double T, double xi, double C) {
  const double cycles = C * bits;
  return xi * cycles * cycles * cycles / (T * T);
}

ConstraintAudit audit(const Instance& inst, const ScaledAllocation& a) {
  ConstraintAudit r;
  double worst = 0.0;
  auto track = [&](double slack) {
    if (!(slack >= -worst)) worst = std::isnan(slack) ? INFINITY : -slack;
  };
  for (int n = 0; n < inst.n_ets; ++n) {
    r.power.push_back(inst.power[n] - inst.et_power(a.S, n));
    track(r.power.back());
  }
  double bw = 0.0;
  for (double b : a.bandwidth) bw += b;
  r.bandwidth = inst.B - bw;
  track(r.bandwidth);
  for (const auto& t : a.times) {
    r.time.push_back(inst.T - (t[0] + t[1] + t[2]));
    track(r.time.back());
  }
  const EnergyLedger e = energy_ledger(inst, a);
  for (int k = 0; k < inst.n_users; ++k) {
    r.user_energy.push_back(e.user_harvest[k] - e.user_comp[k] - e.user_tx[k]);
    track(r.user_energy.back());
  }
  for (int i = 0; i < inst.n_pairs(); ++i) {
    r.helper_energy.push_back(e.helper_harvest[i] - e.helper_comp[i] - e.helper_tx[i]);
    track(r.helper_energy.back());
  }
  const Eigen::MatrixXcd H = 0.5 * (a.S + a.S.adjoint());
  r.psd = hermitian_min_eigpair(H).value;
  track(r.psd);
  double most_negative = 0.0;
  auto scan = [&](double v) { most_negative = std::min(most_negative, v); };
  for (double v : a.local) scan(v);
  for (double v : a.offload) scan(v);
  for (double v : a.bandwidth) scan(v);
  for (const auto& t : a.times)
    for (double v : t) scan(v);
  r.nonnegativity = most_negative;
  track(most_negative);
  r.worst_violation = worst;
  return r;
}

ConstraintAudit audit(const SystemConfig& config, const ChannelSet& channels, const Pairing& pairing,
                      const PrimalAllocation& alloc) {
  const Instance inst = Instance::build(config, channels, pairing);
  return audit(inst, from_public(inst, alloc));
}

}  // namespace wpmec
