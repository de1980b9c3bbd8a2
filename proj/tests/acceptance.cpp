// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wpmec/instance.hpp"
#include "wpmec/orchestrator.hpp"
#include "wpmec/p21.hpp"
#include "wpmec/p22.hpp"
#include "wpmec/pairing.hpp"
#include "wpmec/radio.hpp"
#include "wpmec/sweep.hpp"

using namespace wpmec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Evidence gathered along the way for the monotonicity and feasibility checks.
struct Evidence {
  int histories = 0;
  int non_monotone = 0;
  int audits = 0;
  double worst = 0.0;

  void history(const std::vector<double>& h) {
    ++histories;
    for (std::size_t i = 1; i < h.size(); ++i) {
      if (h[i] < h[i - 1] - 1e-8 * std::max(1.0, std::abs(h[i - 1]))) {
        ++non_monotone;
        return;
      }
    }
  }
  void violation(double v) {
    ++audits;
    worst = std::max(worst, v);
  }
  void report(const SystemConfig& c, const ChannelSet& ch, const Pairing& p, const SolveReport& r) {
    history(r.history);
    violation(audit(c, ch, p, r.allocation).worst_violation);
  }
};

Evidence evidence;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome strong_duality() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto s = oracle::scenario(2, 2, 1, 2, seed);
    const Instance inst = Instance::build(s.config, s.channels, Pairing::all_to_first(1, 2));
    const StageResult r = solve_p21_scaled(inst, {inst.B / 2, inst.B / 2});
    worst = std::max(worst, std::abs(r.primal - r.dual) / r.dual);
    evidence.violation(audit(inst, r.alloc).worst_violation);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-3 && secs <= 60.0, fmt("worst gap %.2e over 50 instances in %.1f s", worst, secs)};
}

Outcome closed_forms() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  double local_err = 0.0, residual = 0.0, identity = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double lambda = logu(0.1, 5.0), xi = logu(0.1, 5.0), C = logu(0.1, 5.0), T = logu(0.1, 5.0);
    const double want = oracle::golden_max(
        [&](double l) { return l - lambda * xi * C * C * C * l * l * l / (T * T); }, 0.0,
        oracle::bracket_concave([&](double l) { return l - lambda * xi * C * C * C * l * l * l / (T * T); }, 1e-3));
    local_err = std::max(local_err, std::abs(local_bits_closed_form(lambda, xi, C, T) - want) / want);
  }
  for (int i = 0; i < 1000; ++i) {
    const double lambda = logu(0.05, 5.0), mu = logu(0.05, 5.0), rho = logu(0.01, 20.0), b = logu(0.2, 3.0);
    const double N0 = 1e-6, h = N0 * logu(10.0, 1e3), beta = logu(0.05, 1.0), cubic = logu(10.0, 1e3);
    const RateTriple r = rates_closed_form(lambda, mu, rho, b, h, N0, beta, cubic, 1.0);
    const double k1 = lambda * N0 * b / h, k3 = mu * N0 * b / h;
    residual = std::max({residual, std::abs(k1 * spectral_kernel(r.r1 / b) - rho) / rho,
                         std::abs(2.0 * mu * cubic * r.r2 * r.r2 * r.r2 - rho) / rho,
                         std::abs(k3 * spectral_kernel(beta * r.r3 / b) - rho) / rho});
    const double G = gain_G(r, lambda, mu, rho, b, h, N0, beta, cubic, 1.0);
    const double l = u(rng) * std::min({r.r1, r.r2, r.r3});
    const double v =
        pair_subproblem_objective(l, {l / r.r1, l / r.r2, l / r.r3}, lambda, mu, rho, b, h, N0, beta, cubic, 1.0);
    identity = std::max(identity, std::abs(v - l * G) / std::max(1.0, l));
  }
  return {local_err <= 1e-6 && residual <= 1e-9 && identity <= 1e-9,
          fmt("local %.1e, residuals %.1e, identity %.1e", local_err, residual, identity)};
}

Outcome brute_force() {
  const auto t0 = std::chrono::steady_clock::now();
  double e21 = 0.0, e22 = 0.0, e2 = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = oracle::scenario(1, 1, 1, 1, seed);
    const Pairing p = Pairing::all_to_first(1, 1);
    const Instance inst = Instance::build(s.config, s.channels, p);
    const oracle::SinglePair o(s.config, s.channels);
    const double joint = o.joint_optimum();
    e21 = std::max(e21, std::abs(solve_p21(inst, {inst.B}).objective_bits - joint) / joint);
    const std::array<double, 3> t{0.08, 0.15, 0.07};
    const double fixed = o.fixed_time_optimum(t);
    e22 = std::max(e22, std::abs(solve_p22(inst, {t}).objective_bits - fixed) / fixed);
    const SolveReport r = solve_p2(s.config, s.channels, p);
    evidence.report(s.config, s.channels, p, r);
    e2 = std::max(e2, std::abs(r.objective_bits - joint) / joint);
  }
  const double secs = seconds_since(t0);
  return {std::max({e21, e22, e2}) <= 2e-3 && secs <= 300.0,
          fmt("time stage %.1e, bandwidth stage %.1e, joint %.1e", e21, e22, e2) + fmt(" in %.1f s", secs)};
}

Outcome analytic() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = oracle::scenario(2, 4, 1, 0, seed);
    const SolveReport r = solve_p2(s.config, s.channels, Pairing::empty(1));
    evidence.report(s.config, s.channels, Pairing::empty(1), r);
    const double want = oracle::single_user_local_oracle(s.config, s.channels.et_user[0]);
    worst = std::max(worst, std::abs(r.objective_bits - want) / want);
  }
  const auto a = oracle::scenario(2, 4, 1, 0, 7, 6.0);
  const auto b = oracle::scenario(2, 4, 1, 0, 7, 48.0);
  const double ratio = solve_p2(b.config, b.channels, Pairing::empty(1)).objective_bits /
                       solve_p2(a.config, a.channels, Pairing::empty(1)).objective_bits;
  return {worst <= 1e-3 && std::abs(ratio - 2.0) <= 2e-3,
          fmt("worst error %.1e over 100 seeds, 8x power ratio %.5f", worst, ratio)};
}

Outcome dominance() {
  int bad = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = oracle::scenario(2, 4, 1, 3, seed);
    const Pairing p = Pairing::all_to_first(1, 3);
    const SolveReport local = benchmark_local_only(s.config, s.channels);
    const SolveReport uniform = benchmark_uniform_beamforming(s.config, s.channels, p);
    const SolveReport proposed = solve_p2(s.config, s.channels, p);
    evidence.report(s.config, s.channels, Pairing::empty(1), local);
    evidence.report(s.config, s.channels, p, uniform);
    evidence.report(s.config, s.channels, p, proposed);
    if (local.objective_bits > uniform.objective_bits * (1.0 + 1e-3) ||
        uniform.objective_bits > proposed.objective_bits * (1.0 + 1e-3)) {
      ++bad;
    }
  }
  return {bad == 0, fmt("%.0f of 100 seeds out of order", bad)};
}

Outcome trends() {
  std::string detail;
  bool pass = true;
  auto run = [&](SweepAxis axis, std::vector<double> values, bool offload_too) {
    SweepConfig c;
    c.system = SystemConfig::uniform(2, 4, 1, 3);
    c.axis = axis;
    c.values = std::move(values);
    c.schemes = {Scheme::Proposed};
    c.realizations = 20;
    const auto rows = run_sweep(c);
    std::vector<double> obj(c.values.size(), 0.0), off(c.values.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const SweepRow& r = rows[i];
      if (r.failed) {
        pass = false;
        continue;
      }
      evidence.history(r.history);
      evidence.violation(r.worst_violation);
      obj[i / 20] += r.objective_bits / 20.0;
      off[i / 20] += r.offload_bits / 20.0;
    }
    for (std::size_t p = 1; p < obj.size(); ++p) {
      if (obj[p] < obj[p - 1]) pass = false;
      if (offload_too && off[p] < off[p - 1]) pass = false;
    }
    detail += std::string(to_string(axis)) + ":";
    for (double v : obj) detail += fmt(" %.4g", v);
    detail += "; ";
    if (offload_too) {
      detail += "offload:";
      for (double v : off) detail += fmt(" %.4g", v);
      detail += "; ";
    }
  };
  run(SweepAxis::Helpers, {1, 2, 3, 4}, true);
  run(SweepAxis::BlockDuration, {0.1, 0.2, 0.3, 0.4, 0.5}, false);
  run(SweepAxis::Power, {2, 4, 6, 8, 10}, false);
  return {pass, detail};
}

Outcome pairing_quality() {
  const int K = 2, M = 4;
  int close = 0, channel_over = 0, count_over = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = oracle::scenario(2, 4, K, M, seed);
    const double cycle[3] = {1e-26, 1e-27, 1e-28};
    for (int m = 0; m < M; ++m) s.config.helper_compute[m].switch_capacitance = cycle[m % 3];
    const PairingResult e = pair_exhaustive(s.config, s.channels);
    const PairingResult g = pair_greedy(s.config, s.channels);
    const PairingResult c = pair_channel_based(s.config, s.channels);
    for (const PairingResult* r : {&e, &g, &c}) evidence.report(s.config, s.channels, r->pairing, r->report);
    if (g.rate_bits >= 0.95 * e.rate_bits) ++close;
    if (c.rate_bits > e.rate_bits * (1.0 + 1e-9)) ++channel_over;
    if (g.candidate_evaluations > K * M * (M - 1) / 2 + K * M) ++count_over;
  }
  return {close >= 18 && channel_over == 0 && count_over == 0,
          fmt("greedy within 95%% on %.0f/20, channel above exhaustive %.0f, count bound broken %.0f", close,
              channel_over, count_over)};
}

Outcome determinism() {
  SweepConfig c = read_sweep_config(WPMEC_CONFIG_DIR "/sweep_T.json");
  c.realizations = 3;
  const std::string a = rows_csv(run_sweep(c, 1));
  const std::string b = rows_csv(run_sweep(c, 2));
  return {a == b, fmt("%.0f bytes per run", static_cast<double>(a.size()))};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  // Criteria 8 and 9 read the evidence gathered by the others, so they run last.
  std::vector<std::pair<int, Criterion>> order{
      {1, {"strong duality of the time stage", strong_duality}},
      {2, {"closed-form fidelity", closed_forms}},
      {3, {"single-pair brute-force equivalence", brute_force}},
      {4, {"analytic local-only oracle", analytic}},
      {5, {"dominance chain", dominance}},
      {6, {"monotone trends in M, T and P", trends}},
      {7, {"pairing quality", pairing_quality}},
      {10, {"byte-identical sweeps", determinism}},
  };
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  auto emit = [&](int id, const char* name, const Outcome& o, double secs) {
    all = all && o.pass;
    char head[160];
    std::snprintf(head, sizeof head, "criterion %2d %s: %s (%.1f s) ", id, o.pass ? "PASS" : "FAIL", name, secs);
    lines.emplace_back(id, head + o.detail);
    std::printf("%s\n", lines.back().second.c_str());
    std::fflush(stdout);
  };
  for (auto& [id, c] : order) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    emit(id, c.name, o, seconds_since(t0));
  }
  emit(8, "alternating monotonicity",
       {evidence.non_monotone == 0, fmt("%.0f of %.0f histories decrease", evidence.non_monotone, evidence.histories)},
       0.0);
  emit(9, "feasibility audit",
       {evidence.worst <= 1e-6, fmt("worst violation %.2e over %.0f allocations", evidence.worst, evidence.audits)},
       0.0);
  std::sort(lines.begin(), lines.end());
  std::printf("\nsummary\n");
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  return all ? 0 : 1;
}
