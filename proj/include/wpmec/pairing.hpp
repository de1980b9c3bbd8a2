// SPDX-License-Identifier: Apache-2.0
//
// User-helper pairing: exhaustive enumeration of every helper-to-user
// assignment, a greedy builder that adds one helper per round, and a
// channel-gain rule. Each returns the pairing and its achieved rate.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wpmec/model.hpp"
#include "wpmec/orchestrator.hpp"

namespace wpmec {

enum class Scheme { Proposed, Uniform, Local };
enum class PairingScheme { Exhaustive, Greedy, ChannelBased };

const char* to_string(Scheme s);
const char* to_string(PairingScheme s);
/// Throws ConfigError on unknown names.
Scheme parse_scheme(const std::string& name);
PairingScheme parse_pairing_scheme(const std::string& name);

struct PairingOptions {
  AlternatingOptions solve;
  /// How a candidate pairing is scored.
  Scheme scheme = Scheme::Proposed;
  long long enumeration_cap = 4096;
};

/// Scores pairings through the chosen scheme, memoized on Pairing::key().
class PairingEvaluator {
 public:
  PairingEvaluator(const SystemConfig& config, const ChannelSet& channels, PairingOptions options);

  const SolveReport& evaluate(const Pairing& pairing);
  /// Distinct pairings actually solved.
  int solver_calls() const { return static_cast<int>(memo_.size()); }

 private:
  const SystemConfig& config_;
  const ChannelSet& channels_;
  PairingOptions options_;
  std::map<std::string, SolveReport> memo_;
};

struct PairingResult {
  Pairing pairing;
  double rate_bits = 0.0;
  SolveReport report;
  /// Candidate pairings scored by the scheme (the greedy bound counts these).
  int candidate_evaluations = 0;
  int solver_calls = 0;
  /// Greedy only: accepted rate after the start and after every committed helper.
  std::vector<double> committed_rates;
};

PairingResult pair_exhaustive(const SystemConfig& config, const ChannelSet& channels,
                              const PairingOptions& options = {});
PairingResult pair_greedy(const SystemConfig& config, const ChannelSet& channels,
                          const PairingOptions& options = {});
PairingResult pair_channel_based(const SystemConfig& config, const ChannelSet& channels,
                                 const PairingOptions& options = {});

/// Assignment helper -> argmax_k h_{k,m}, ties to the lowest user index.
std::vector<int> channel_based_assignment(const ChannelSet& channels);

PairingResult run_pairing(PairingScheme scheme, const SystemConfig& config, const ChannelSet& channels,
                          const PairingOptions& options = {});

}  // namespace wpmec
