// SPDX-License-Identifier: Apache-2.0

#include "wpmec/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <thread>

#include "wpmec/instance.hpp"
#include "wpmec/orchestrator.hpp"

namespace wpmec {

const char* const kSweepCsvHeader =
    "axis,value,seed,scheme,objective_bits,local_bits,offload_bits,user_tx_energy,user_comp_energy,"
    "helper_comp_energy,helper_tx_energy,rel_gap,iters,status,wall_ms";

const char* const kAggregateCsvHeader =
    "axis,value,scheme,n,failed,objective_bits_mean,objective_bits_se,local_bits_mean,local_bits_se,"
    "offload_bits_mean,offload_bits_se,user_tx_energy_mean,user_tx_energy_se,user_comp_energy_mean,"
    "user_comp_energy_se,helper_comp_energy_mean,helper_comp_energy_se,helper_tx_energy_mean,"
    "helper_tx_energy_se,rel_gap_mean,rel_gap_se,iters_mean,iters_se,wall_ms_mean,wall_ms_se";

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Helpers: return "M";
    case SweepAxis::BlockDuration: return "T";
    case SweepAxis::Power: return "P";
    case SweepAxis::Pairing: return "pairing";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "M") return SweepAxis::Helpers;
  if (name == "T") return SweepAxis::BlockDuration;
  if (name == "P") return SweepAxis::Power;
  if (name == "pairing") return SweepAxis::Pairing;
  throw Error(ErrorKind::ConfigError, "sweep.axis", "unknown axis '" + name + "' (M, T, P or pairing)");
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::size_t n_points(const SweepConfig& c) {
  return c.axis == SweepAxis::Pairing ? c.pairing_values.size() : c.values.size();
}

std::string point_label(const SweepConfig& c, std::size_t i) {
  return c.axis == SweepAxis::Pairing ? to_string(c.pairing_values[i]) : num(c.values[i]);
}

SystemConfig apply_xi_cycle(SystemConfig s, const std::vector<double>& cycle) {
  s.helper_compute.resize(s.n_helpers, s.helper_compute.empty() ? ComputeProfile{} : s.helper_compute.front());
  if (!cycle.empty()) {
    for (int m = 0; m < s.n_helpers; ++m) s.helper_compute[m].switch_capacitance = cycle[m % cycle.size()];
  }
  return s;
}

void fill_energies(SweepRow& row, const SystemConfig& cfg, const ChannelSet& ch, const Pairing& pairing,
                   const SolveReport& rep) {
  const Instance inst = Instance::build(cfg, ch, pairing);
  const ScaledAllocation a = from_public(inst, rep.allocation);
  const EnergyLedger e = energy_ledger(inst, a);
  auto sum = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s * units::kJoulesPerUnit;
  };
  row.user_tx_energy = sum(e.user_tx);
  row.user_comp_energy = sum(e.user_comp);
  row.helper_comp_energy = sum(e.helper_comp);
  row.helper_tx_energy = sum(e.helper_tx);
  row.worst_violation = audit(inst, a).worst_violation;
}

}  // namespace

SystemConfig config_at(const SweepConfig& c, double value) {
  SystemConfig s = c.system;
  switch (c.axis) {
    case SweepAxis::Helpers:
      if (value < 0.0 || value != std::floor(value)) {
        throw Error(ErrorKind::ConfigError, "sweep.values", "M values must be nonnegative integers");
      }
      s.n_helpers = static_cast<int>(value);
      break;
    case SweepAxis::BlockDuration: s.block_duration = value; break;
    case SweepAxis::Power: s.power_budget.assign(s.n_ets, value); break;
    case SweepAxis::Pairing: break;
  }
  return apply_xi_cycle(s, c.helper_xi_cycle);
}

std::vector<SweepRow> run_cell(const SweepConfig& c, std::size_t point, std::uint64_t seed) {
  const bool pairing_axis = c.axis == SweepAxis::Pairing;
  const SystemConfig cfg = pairing_axis ? apply_xi_cycle(c.system, c.helper_xi_cycle) : config_at(c, c.values[point]);
  const PairingScheme pairing_scheme = pairing_axis ? c.pairing_values[point] : c.pairing;
  std::vector<SweepRow> rows;
  validate(cfg);
  const ChannelSet ch = generate_channels(make_topology(c.topology, cfg.n_users, cfg.n_helpers, seed), cfg, seed);
  for (Scheme scheme : c.schemes) {
    SweepRow row;
    row.axis = to_string(c.axis);
    row.value = point_label(c, point);
    row.seed = seed;
    row.scheme = to_string(scheme);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SolveReport rep;
      Pairing pairing = Pairing::empty(cfg.n_users);
      if (scheme == Scheme::Local) {
        rep = benchmark_local_only(cfg, ch, c.options);
      } else if (cfg.n_users == 1) {
        pairing = Pairing::all_to_first(cfg.n_users, cfg.n_helpers);
        rep = scheme == Scheme::Proposed ? solve_p2(cfg, ch, pairing, c.options)
                                         : benchmark_uniform_beamforming(cfg, ch, pairing, c.options);
      } else {
        PairingOptions po;
        po.solve = c.options;
        po.scheme = scheme;
        PairingResult pr = run_pairing(pairing_scheme, cfg, ch, po);
        pairing = pr.pairing;
        rep = std::move(pr.report);
      }
      row.objective_bits = rep.objective_bits;
      row.local_bits = rep.allocation.local_total_bits();
      row.offload_bits = rep.allocation.offloaded_bits();
      row.rel_gap = rep.rel_gap;
      row.iters = rep.iterations;
      row.status = to_string(rep.status);
      row.history = rep.history;
      fill_energies(row, cfg, ch, pairing, rep);
    } catch (const Error& e) {
      row.failed = true;
      row.status = to_string(e.kind());
    }
    if (c.timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int worker_threads() {
  if (const char* env = std::getenv("WPMEC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> run_sweep(const SweepConfig& c, int threads) {
  if (c.realizations < 1) throw Error(ErrorKind::ConfigError, "realizations", "must be at least 1");
  const std::size_t P = n_points(c), R = static_cast<std::size_t>(c.realizations);
  if (P == 0) throw Error(ErrorKind::ConfigError, "sweep.values", "no sweep points");
  // Config errors surface before any work is dispatched.
  for (std::size_t p = 0; p < P; ++p) {
    validate(c.axis == SweepAxis::Pairing ? apply_xi_cycle(c.system, c.helper_xi_cycle) : config_at(c, c.values[p]));
  }
  std::vector<std::vector<SweepRow>> cells(P * R);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      cells[i] = run_cell(c, i / R, c.base_seed + i % R);
    }
  };
  const int n = std::clamp<int>(threads > 0 ? threads : worker_threads(), 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::vector<SweepRow> rows;
  for (auto& cell : cells)
    for (auto& r : cell) rows.push_back(std::move(r));
  return rows;
}

std::string rows_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& r : rows) {
    out += r.axis + "," + r.value + "," + std::to_string(r.seed) + "," + r.scheme + "," + num(r.objective_bits) + "," +
           num(r.local_bits) + "," + num(r.offload_bits) + "," + num(r.user_tx_energy) + "," +
           num(r.user_comp_energy) + "," + num(r.helper_comp_energy) + "," + num(r.helper_tx_energy) + "," +
           num(r.rel_gap) + "," + std::to_string(r.iters) + "," + r.status + "," + num(r.wall_ms) + "\n";
  }
  return out;
}

std::string aggregate_csv(const std::vector<SweepRow>& rows) {
  struct Acc {
    std::string axis, value, scheme;
    std::vector<std::array<double, 10>> samples;
    int failed = 0;
  };
  std::vector<Acc> groups;
  std::map<std::string, std::size_t> index;
  for (const SweepRow& r : rows) {
    const std::string key = r.value + "\x1f" + r.scheme;
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({r.axis, r.value, r.scheme, {}, 0});
    }
    Acc& g = groups[it->second];
    if (r.failed) {
      ++g.failed;
      continue;
    }
    g.samples.push_back({r.objective_bits, r.local_bits, r.offload_bits, r.user_tx_energy, r.user_comp_energy,
                         r.helper_comp_energy, r.helper_tx_energy, r.rel_gap, static_cast<double>(r.iters),
                         r.wall_ms});
  }
  std::string out = std::string(kAggregateCsvHeader) + "\n";
  for (const Acc& g : groups) {
    const double n = static_cast<double>(g.samples.size());
    out += g.axis + "," + g.value + "," + g.scheme + "," + std::to_string(g.samples.size()) + "," +
           std::to_string(g.failed);
    for (int c = 0; c < 10; ++c) {
      double mean = 0.0, se = 0.0;
      if (n > 0) {
        for (const auto& s : g.samples) mean += s[c];
        mean /= n;
      }
      if (n > 1) {
        double ss = 0.0;
        for (const auto& s : g.samples) ss += (s[c] - mean) * (s[c] - mean);
        se = std::sqrt(ss / (n - 1.0) / n);
      }
      out += "," + num(mean) + "," + num(se);
    }
    out += "\n";
  }
  return out;
}

SweepConfig sweep_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config", "expected an object at top level");
  SweepConfig c;
  const Json empty = Json::object();
  const Json& sys = j.contains("system") ? j["system"] : empty;
  c.system = system_config_from_json(sys, SystemConfig::uniform(2, 4, 1, 0));
  if (j.contains("topology")) c.topology = topology_spec_from_json(j["topology"]);
  const Json& sw = j.contains("sweep") ? j["sweep"] : empty;
  auto get = [&](const char* key, auto& out) {
    if (!sw.contains(key)) return;
    try {
      out = sw[key].get<std::decay_t<decltype(out)>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("sweep.") + key, std::string("wrong type: ") + e.what());
    }
  };
  std::string axis = "M";
  get("axis", axis);
  c.axis = parse_sweep_axis(axis);
  if (c.axis == SweepAxis::Pairing) {
    std::vector<std::string> names{"exhaustive", "greedy", "channel"};
    get("values", names);
    for (const auto& n : names) c.pairing_values.push_back(parse_pairing_scheme(n));
  } else {
    get("values", c.values);
  }
  if (sw.contains("schemes")) {
    std::vector<std::string> names;
    get("schemes", names);
    c.schemes.clear();
    for (const auto& n : names) c.schemes.push_back(parse_scheme(n));
  }
  std::string pairing = to_string(c.pairing);
  get("pairing", pairing);
  c.pairing = parse_pairing_scheme(pairing);
  get("base_seed", c.base_seed);
  get("realizations", c.realizations);
  get("helper_xi_cycle", c.helper_xi_cycle);
  get("timing", c.timing);
  get("alt_tol", c.options.alt_tol);
  get("max_alt_iters", c.options.max_alt_iters);
  get("gap_tol", c.options.stage.gap_tol);
  if (c.realizations < 1) throw Error(ErrorKind::ConfigError, "sweep.realizations", "must be at least 1");
  for (double xi : c.helper_xi_cycle) {
    if (!(xi > 0.0)) throw Error(ErrorKind::ConfigError, "sweep.helper_xi_cycle", "entries must be positive");
  }
  validate(c.system);
  return c;
}

SweepConfig read_sweep_config(const std::string& path) { return sweep_config_from_json(read_json_file(path)); }

}  // namespace wpmec
