// SPDX-License-Identifier: Apache-2.0

#include "wpmec/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace wpmec {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorKind::OverlappingPairing: return "OverlappingPairing";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DegenerateSlot: return "DegenerateSlot";
    case ErrorKind::NoFeasiblePointFound: return "NoFeasiblePointFound";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::DualInfeasible: return "DualInfeasible";
    case ErrorKind::NoInteriorSolution: return "NoInteriorSolution";
    case ErrorKind::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string field, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + (field.empty() ? "" : " [" + field + "]") +
                         ": " + message),
      kind_(kind),
      field_(std::move(field)) {}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

SystemConfig SystemConfig::uniform(int n_ets, int antennas_per_et, int n_users, int n_helpers,
                                   double power_per_et) {
  SystemConfig c;
  c.n_ets = n_ets;
  c.antennas_per_et = antennas_per_et;
  c.n_users = n_users;
  c.n_helpers = n_helpers;
  c.power_budget.assign(n_ets, power_per_et);
  c.user_compute.assign(n_users, ComputeProfile{});
  c.helper_compute.assign(n_helpers, ComputeProfile{});
  return c;
}

Pairing Pairing::empty(int n_users) {
  Pairing p;
  p.helper_sets.assign(n_users, {});
  return p;
}

Pairing Pairing::all_to_first(int n_users, int n_helpers) {
  Pairing p = empty(n_users);
  if (n_users > 0) {
    p.helper_sets[0].resize(n_helpers);
    std::iota(p.helper_sets[0].begin(), p.helper_sets[0].end(), 0);
  }
  return p;
}

Pairing Pairing::from_assignment(int n_users, std::span<const int> assignment) {
  Pairing p = empty(n_users);
  for (std::size_t m = 0; m < assignment.size(); ++m) {
    const int k = assignment[m];
    if (k < 0) continue;
    if (k >= n_users) {
      throw Error(ErrorKind::DimensionMismatch, "assignment", "user index out of range");
    }
    p.helper_sets[k].push_back(static_cast<int>(m));
  }
  return p;
}

int Pairing::n_pairs() const {
  int n = 0;
  for (const auto& s : helper_sets) n += static_cast<int>(s.size());
  return n;
}

std::vector<PairIndex> Pairing::pairs() const {
  std::vector<PairIndex> out;
  for (int k = 0; k < static_cast<int>(helper_sets.size()); ++k) {
    for (int m : helper_sets[k]) out.push_back({k, m});
  }
  return out;
}

std::string Pairing::key() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < helper_sets.size(); ++k) {
    if (k) os << '|';
    for (std::size_t i = 0; i < helper_sets[k].size(); ++i) {
      if (i) os << ',';
      os << helper_sets[k][i];
    }
  }
  return os.str();
}

PrimalAllocation PrimalAllocation::zero(const SystemConfig& config, const Pairing& pairing) {
  PrimalAllocation a;
  a.energy_cov = Eigen::MatrixXcd::Zero(config.dim(), config.dim());
  a.local_bits.assign(config.n_users, 0.0);
  a.pairs = pairing.pairs();
  a.offload_bits.assign(a.pairs.size(), 0.0);
  a.bandwidths.assign(a.pairs.size(), 0.0);
  a.slot_times.assign(a.pairs.size(), {0.0, 0.0, 0.0});
  return a;
}

double PrimalAllocation::local_total_bits() const {
  return std::accumulate(local_bits.begin(), local_bits.end(), 0.0);
}

double PrimalAllocation::offloaded_bits() const {
  return std::accumulate(offload_bits.begin(), offload_bits.end(), 0.0);
}

double PrimalAllocation::total_bits() const { return local_total_bits() + offloaded_bits(); }

Eigen::VectorXd DualPoint::flatten() const {
  Eigen::VectorXd x(lambda.size() + mu.size() + rho.size() + gamma.size());
  Eigen::Index i = 0;
  for (double v : lambda) x[i++] = v;
  for (double v : mu) x[i++] = v;
  for (double v : rho) x[i++] = v;
  for (double v : gamma) x[i++] = v;
  return x;
}

DualPoint DualPoint::unflatten(std::span<const double> x, int n_users, int n_pairs, int n_ets) {
  if (static_cast<int>(x.size()) != n_users + 2 * n_pairs + n_ets) {
    throw Error(ErrorKind::DimensionMismatch, "dual", "flattened length does not match K+2P+N");
  }
  DualPoint d;
  auto it = x.begin();
  d.lambda.assign(it, it + n_users);
  it += n_users;
  d.mu.assign(it, it + n_pairs);
  it += n_pairs;
  d.rho.assign(it, it + n_pairs);
  it += n_pairs;
  d.gamma.assign(it, it + n_ets);
  return d;
}

bool DualPoint::satisfies_bounds() const {
  for (double v : lambda)
    if (!(v >= kPositiveFloor)) return false;
  for (double v : mu)
    if (!(v >= kPositiveFloor)) return false;
  for (double v : rho)
    if (!(v >= 0.0)) return false;
  for (double v : gamma)
    if (!(v >= 0.0)) return false;
  return true;
}

namespace {

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::NonPositiveParameter, field, "must be finite and strictly positive");
  }
}

void require_size(std::size_t got, int want, const std::string& field) {
  if (static_cast<int>(got) != want) {
    std::ostringstream os;
    os << "expected " << want << " entries, got " << got;
    throw Error(ErrorKind::DimensionMismatch, field, os.str());
  }
}

}  // namespace

void validate(const SystemConfig& c) {
  if (c.n_ets <= 0) throw Error(ErrorKind::NonPositiveParameter, "n_ets", "need at least one ET");
  if (c.antennas_per_et <= 0)
    throw Error(ErrorKind::NonPositiveParameter, "antennas_per_et", "need at least one antenna");
  if (c.n_users <= 0) throw Error(ErrorKind::NonPositiveParameter, "n_users", "need at least one user");
  if (c.n_helpers < 0) throw Error(ErrorKind::NonPositiveParameter, "n_helpers", "must be >= 0");
  require_positive(c.block_duration, "block_duration");
  require_positive(c.total_bandwidth, "total_bandwidth");
  require_positive(c.noise_psd, "noise_psd");
  require_positive(c.eh_efficiency, "eh_efficiency");
  if (c.eh_efficiency > 1.0) {
    throw Error(ErrorKind::NonPositiveParameter, "eh_efficiency", "must lie in (0, 1]");
  }
  if (!(c.result_ratio >= 0.0) || !std::isfinite(c.result_ratio)) {
    throw Error(ErrorKind::NonPositiveParameter, "result_ratio", "must be finite and >= 0");
  }
  require_size(c.power_budget.size(), c.n_ets, "power_budget");
  for (std::size_t n = 0; n < c.power_budget.size(); ++n) {
    require_positive(c.power_budget[n], "power_budget[" + std::to_string(n) + "]");
  }
  require_size(c.user_compute.size(), c.n_users, "user_compute");
  require_size(c.helper_compute.size(), c.n_helpers, "helper_compute");
  for (std::size_t k = 0; k < c.user_compute.size(); ++k) {
    require_positive(c.user_compute[k].switch_capacitance,
                     "user_compute[" + std::to_string(k) + "].switch_capacitance");
    require_positive(c.user_compute[k].cycles_per_bit,
                     "user_compute[" + std::to_string(k) + "].cycles_per_bit");
  }
  for (std::size_t m = 0; m < c.helper_compute.size(); ++m) {
    require_positive(c.helper_compute[m].switch_capacitance,
                     "helper_compute[" + std::to_string(m) + "].switch_capacitance");
    require_positive(c.helper_compute[m].cycles_per_bit,
                     "helper_compute[" + std::to_string(m) + "].cycles_per_bit");
  }
}

void validate(const SystemConfig& c, const ChannelSet& ch) {
  validate(c);
  require_size(ch.et_user.size(), c.n_users, "et_user");
  require_size(ch.et_helper.size(), c.n_helpers, "et_helper");
  auto check_vec = [&](const Eigen::VectorXcd& g, const std::string& field) {
    require_size(static_cast<std::size_t>(g.size()), c.dim(), field);
    if (!g.allFinite()) throw Error(ErrorKind::NonPositiveParameter, field, "non-finite entry");
  };
  for (std::size_t k = 0; k < ch.et_user.size(); ++k) check_vec(ch.et_user[k], "et_user[" + std::to_string(k) + "]");
  for (std::size_t m = 0; m < ch.et_helper.size(); ++m)
    check_vec(ch.et_helper[m], "et_helper[" + std::to_string(m) + "]");
  if (ch.d2d_gain.rows() != c.n_users || ch.d2d_gain.cols() != c.n_helpers) {
    throw Error(ErrorKind::DimensionMismatch, "d2d_gain", "expected an n_users x n_helpers matrix");
  }
  for (Eigen::Index k = 0; k < ch.d2d_gain.rows(); ++k) {
    for (Eigen::Index m = 0; m < ch.d2d_gain.cols(); ++m) {
      require_positive(ch.d2d_gain(k, m),
                       "d2d_gain[" + std::to_string(k) + "][" + std::to_string(m) + "]");
    }
  }
}

void validate(const SystemConfig& c, const ChannelSet& ch, const Pairing& p) {
  validate(c, ch);
  require_size(p.helper_sets.size(), c.n_users, "helper_sets");
  std::vector<int> owner(c.n_helpers, -1);
  for (int k = 0; k < static_cast<int>(p.helper_sets.size()); ++k) {
    for (int m : p.helper_sets[k]) {
      if (m < 0 || m >= c.n_helpers) {
        throw Error(ErrorKind::DimensionMismatch, "helper_sets[" + std::to_string(k) + "]",
                    "helper index " + std::to_string(m) + " out of range");
      }
      if (owner[m] != -1) {
        throw Error(ErrorKind::OverlappingPairing, "helper_sets[" + std::to_string(k) + "]",
                    "helper " + std::to_string(m) + " already paired with user " +
                        std::to_string(owner[m]));
      }
      owner[m] = k;
    }
  }
}

}  // namespace wpmec
