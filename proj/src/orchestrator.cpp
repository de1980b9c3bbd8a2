// SPDX-License-Identifier: Apache-2.0

#include "wpmec/orchestrator.hpp"

#include <cmath>

#include "wpmec/p22.hpp"

namespace wpmec {

StageResult solve_alternating(const Instance& inst, const AlternatingOptions& opt, std::vector<double>* history,
                              int* alt_iterations, bool* alt_converged) {
  const int P = inst.n_pairs();
  std::vector<double> bw(P, P > 0 ? inst.B / P : 0.0);
  StageResult best = solve_p21_scaled(inst, bw, opt.stage);
  if (history) history->push_back(best.primal);
  bool converged = P == 0;
  int iters = 0;
  while (!converged && iters < opt.max_alt_iters) {
    ++iters;
    const double before = best.primal;

    // Pairs that carry no bits have zero slot times and stay idle.
    StageResult r22 = solve_p22_scaled(inst, best.alloc.times, opt.stage);
    if (r22.primal >= best.primal) best = std::move(r22);

    std::vector<double> next_bw = best.alloc.bandwidth;
    for (int i = 0; i < P; ++i) {
      if (best.alloc.offload[i] <= 0.0) next_bw[i] = 0.0;
    }
    StageResult r21 = solve_p21_scaled(inst, next_bw, opt.stage);
    if (r21.primal >= best.primal) best = std::move(r21);

    if (history) history->push_back(best.primal);
    if (best.primal - before <= opt.alt_tol * std::max(best.primal, 1e-12)) converged = true;
  }
  if (alt_iterations) *alt_iterations = iters;
  if (alt_converged) *alt_converged = converged;
  return best;
}

SolveReport solve_p2(const Instance& inst, const AlternatingOptions& opt) {
  std::vector<double> history;
  int iters = 0;
  bool converged = false;
  const StageResult r = solve_alternating(inst, opt, &history, &iters, &converged);
  SolveReport rep = make_report(inst, r, opt.stage.gap_tol);
  rep.iterations = iters;
  if (!converged) rep.status = SolveStatus::IterLimit;
  for (double h : history) rep.history.push_back(h * units::kBitsPerUnit);
  return rep;
}

SolveReport solve_p2(const SystemConfig& config, const ChannelSet& channels, const Pairing& pairing,
                     const AlternatingOptions& opt) {
  return solve_p2(Instance::build(config, channels, pairing), opt);
}

SolveReport benchmark_local_only(const SystemConfig& config, const ChannelSet& channels,
                                 const AlternatingOptions& opt) {
  return solve_p2(Instance::build(config, channels, Pairing::empty(config.n_users)), opt);
}

SolveReport benchmark_uniform_beamforming(const SystemConfig& config, const ChannelSet& channels,
                                          const Pairing& pairing, const AlternatingOptions& opt) {
  Instance inst = Instance::build(config, channels, pairing);
  inst.fixed_cov = inst.uniform_covariance();
  return solve_p2(inst, opt);
}

double single_user_local_bits(const SystemConfig& config, const ChannelSet& channels, int user) {
  validate(config, channels);
  const Eigen::VectorXcd& g = channels.et_user.at(user);
  double amp = 0.0;
  for (int n = 0; n < config.n_ets; ++n) {
    amp += std::sqrt(config.power_budget[n]) *
           g.segment(n * config.antennas_per_et, config.antennas_per_et).norm();
  }
  const ComputeProfile& c = config.user_compute.at(user);
  const double T = config.block_duration;
  const double cubic = c.switch_capacitance * std::pow(c.cycles_per_bit, 3);
  return std::cbrt(config.eh_efficiency * T * T * T * amp * amp / cubic);
}

}  // namespace wpmec
