// SPDX-License-Identifier: Apache-2.0

#include "wpmec/pairing.hpp"

namespace wpmec {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::Uniform: return "uniform";
    case Scheme::Local: return "local";
  }
  return "?";
}

const char* to_string(PairingScheme s) {
  switch (s) {
    case PairingScheme::Exhaustive: return "exhaustive";
    case PairingScheme::Greedy: return "greedy";
    case PairingScheme::ChannelBased: return "channel";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "proposed") return Scheme::Proposed;
  if (name == "uniform") return Scheme::Uniform;
  if (name == "local") return Scheme::Local;
  throw Error(ErrorKind::ConfigError, "scheme", "unknown scheme '" + name + "'");
}

PairingScheme parse_pairing_scheme(const std::string& name) {
  if (name == "exhaustive") return PairingScheme::Exhaustive;
  if (name == "greedy") return PairingScheme::Greedy;
  if (name == "channel") return PairingScheme::ChannelBased;
  throw Error(ErrorKind::ConfigError, "pairing", "unknown pairing scheme '" + name + "'");
}

PairingEvaluator::PairingEvaluator(const SystemConfig& config, const ChannelSet& channels, PairingOptions options)
    : config_(config), channels_(channels), options_(std::move(options)) {}

const SolveReport& PairingEvaluator::evaluate(const Pairing& pairing) {
  const std::string key = pairing.key();
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  SolveReport rep;
  switch (options_.scheme) {
    case Scheme::Proposed: rep = solve_p2(config_, channels_, pairing, options_.solve); break;
    case Scheme::Uniform:
      rep = benchmark_uniform_beamforming(config_, channels_, pairing, options_.solve);
      break;
    case Scheme::Local: rep = benchmark_local_only(config_, channels_, options_.solve); break;
  }
  return memo_.emplace(key, std::move(rep)).first->second;
}

namespace {

PairingResult finish(PairingEvaluator& ev, const Pairing& p, int candidates) {
  PairingResult r;
  r.pairing = p;
  r.report = ev.evaluate(p);
  r.rate_bits = r.report.objective_bits;
  r.candidate_evaluations = candidates;
  r.solver_calls = ev.solver_calls();
  return r;
}

}  // namespace

PairingResult pair_exhaustive(const SystemConfig& config, const ChannelSet& channels, const PairingOptions& opt) {
  validate(config, channels);
  const int K = config.n_users, M = config.n_helpers;
  long long count = 1;
  for (int m = 0; m < M; ++m) {
    count *= K;
    if (count > opt.enumeration_cap) {
      throw Error(ErrorKind::EnumerationCapExceeded, "n_helpers",
                  "K^M candidates exceed the enumeration cap of " + std::to_string(opt.enumeration_cap));
    }
  }
  PairingEvaluator ev(config, channels, opt);
  std::vector<int> assign(M, 0);
  Pairing best = Pairing::from_assignment(K, assign);
  double best_rate = ev.evaluate(best).objective_bits;
  for (long long c = 1; c < count; ++c) {
    // Odometer in lexicographic order, last helper fastest.
    for (int m = M - 1; m >= 0; --m) {
      if (++assign[m] < K) break;
      assign[m] = 0;
    }
    const Pairing cand = Pairing::from_assignment(K, assign);
    const double rate = ev.evaluate(cand).objective_bits;
    if (rate > best_rate) {
      best_rate = rate;
      best = cand;
    }
  }
  return finish(ev, best, static_cast<int>(count));
}

PairingResult pair_greedy(const SystemConfig& config, const ChannelSet& channels, const PairingOptions& opt) {
  validate(config, channels);
  const int K = config.n_users, M = config.n_helpers;
  PairingEvaluator ev(config, channels, opt);
  std::vector<int> assign(M, -1);
  double current = ev.evaluate(Pairing::from_assignment(K, assign)).objective_bits;
  std::vector<double> committed{current};
  int candidates = 0;
  for (int round = 0; round < M; ++round) {
    int best_m = -1, best_k = -1;
    double best_rate = current;
    for (int m = 0; m < M; ++m) {
      if (assign[m] >= 0) continue;
      for (int k = 0; k < K; ++k) {
        assign[m] = k;
        const double rate = ev.evaluate(Pairing::from_assignment(K, assign)).objective_bits;
        ++candidates;
        assign[m] = -1;
        if (rate > best_rate) {
          best_rate = rate;
          best_m = m;
          best_k = k;
        }
      }
    }
    if (best_m < 0) break;
    assign[best_m] = best_k;
    current = best_rate;
    committed.push_back(current);
  }
  PairingResult r = finish(ev, Pairing::from_assignment(K, assign), candidates);
  r.committed_rates = std::move(committed);
  return r;
}

std::vector<int> channel_based_assignment(const ChannelSet& channels) {
  const Eigen::MatrixXd& h = channels.d2d_gain;
  std::vector<int> assign(h.cols(), 0);
  for (Eigen::Index m = 0; m < h.cols(); ++m) {
    int best = 0;
    for (Eigen::Index k = 1; k < h.rows(); ++k) {
      if (h(k, m) > h(best, m)) best = static_cast<int>(k);
    }
    assign[m] = best;
  }
  return assign;
}

PairingResult pair_channel_based(const SystemConfig& config, const ChannelSet& channels,
                                 const PairingOptions& opt) {
  validate(config, channels);
  PairingEvaluator ev(config, channels, opt);
  const std::vector<int> assign = channel_based_assignment(channels);
  return finish(ev, Pairing::from_assignment(config.n_users, assign), 1);
}

PairingResult run_pairing(PairingScheme scheme, const SystemConfig& config, const ChannelSet& channels,
                          const PairingOptions& opt) {
  switch (scheme) {
    case PairingScheme::Exhaustive: return pair_exhaustive(config, channels, opt);
    case PairingScheme::Greedy: return pair_greedy(config, channels, opt);
    case PairingScheme::ChannelBased: return pair_channel_based(config, channels, opt);
  }
  throw Error(ErrorKind::ConfigError, "pairing", "unknown pairing scheme");
}

}  // namespace wpmec
