// SPDX-License-Identifier: Apache-2.0
//
// wpmec: solve one instance, run a sweep, or compare pairing schemes.
// Exit codes: 0 success, 1 config error, 2 solver failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wpmec/orchestrator.hpp"
#include "wpmec/pairing.hpp"
#include "wpmec/radio.hpp"
#include "wpmec/serialize.hpp"
#include "wpmec/sweep.hpp"

using namespace wpmec;

namespace {

constexpr int kOk = 0, kConfigError = 1, kSolverFailure = 2;

// An instance file has "config" and "channels"; a scenario file has
// "system"/"topology" and gets its channels drawn from the seed.
InstanceFile load_instance(const std::string& path, std::uint64_t seed) {
  const Json j = read_json_file(path);
  if (j.is_object() && j.contains("channels")) return instance_from_json(j);
  InstanceFile f;
  const Json empty = Json::object();
  f.config = system_config_from_json(j.contains("system") ? j["system"] : empty, SystemConfig::uniform(2, 4, 1, 0));
  const TopologySpec spec = j.contains("topology") ? topology_spec_from_json(j["topology"]) : TopologySpec{};
  validate(f.config);
  f.channels = generate_channels(make_topology(spec, f.config.n_users, f.config.n_helpers, seed), f.config, seed);
  f.pairing = j.contains("pairing") ? pairing_from_json(j["pairing"])
                                    : Pairing::all_to_first(f.config.n_users, f.config.n_helpers);
  validate(f.config, f.channels, f.pairing);
  return f;
}

void emit(const std::string& text, const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  write_text_file((std::filesystem::path(out_dir) / name).string(), text);
}

int fail(const Error& e) {
  std::cerr << "wpmec: " << e.what() << "\n";
  return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::DimensionMismatch ||
                 e.kind() == ErrorKind::NonPositiveParameter || e.kind() == ErrorKind::OverlappingPairing
             ? kConfigError
             : kSolverFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum computation rate optimization for wirelessly powered D2D offloading"};
  app.require_subcommand(1);

  std::string config, out_dir, scheme_name = "proposed", pairing_name = "greedy";
  std::uint64_t seed = 1;
  std::optional<int> realizations;
  std::optional<std::uint64_t> seed_override;
  bool timing = false;

  auto* solve = app.add_subcommand("solve", "Solve one instance and print the report");
  solve->add_option("--config", config, "Instance or scenario file")->required();
  solve->add_option("--seed", seed, "Channel seed for scenario files");
  solve->add_option("--scheme", scheme_name, "proposed | uniform | local");
  solve->add_option("--out-dir", out_dir, "Write report.json here instead of stdout");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSVs");
  sweep->add_option("--config", config, "Sweep config file")->required();
  sweep->add_option("--seed", seed_override, "Base seed (overrides the config)");
  sweep->add_option("--realizations", realizations, "Realizations per point (overrides the config)");
  sweep->add_option("--out-dir", out_dir, "Output directory (default: current directory)");
  sweep->add_flag("--timing", timing, "Record wall time per row");

  auto* pair = app.add_subcommand("pair", "Pair helpers with users and report the rate");
  pair->add_option("--config", config, "Instance or scenario file")->required();
  pair->add_option("--seed", seed, "Channel seed for scenario files");
  pair->add_option("--pairing", pairing_name, "exhaustive | greedy | channel");
  pair->add_option("--scheme", scheme_name, "proposed | uniform | local");
  pair->add_option("--out-dir", out_dir, "Write pairing.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve) {
      const Scheme scheme = parse_scheme(scheme_name);
      const InstanceFile f = load_instance(config, seed);
      SolveReport rep;
      Pairing used = f.pairing;
      switch (scheme) {
        case Scheme::Proposed: rep = solve_p2(f.config, f.channels, f.pairing); break;
        case Scheme::Uniform: rep = benchmark_uniform_beamforming(f.config, f.channels, f.pairing); break;
        case Scheme::Local:
          rep = benchmark_local_only(f.config, f.channels);
          used = Pairing::empty(f.config.n_users);
          break;
      }
      const ConstraintAudit a = audit(f.config, f.channels, used, rep.allocation);
      Json j = to_json(rep, a);
      j["scheme"] = to_string(scheme);
      emit(j.dump(2) + "\n", out_dir, "report.json");
      return kOk;
    }
    if (*sweep) {
      if (out_dir.empty()) out_dir = ".";
      SweepConfig cfg = read_sweep_config(config);
      if (seed_override) cfg.base_seed = *seed_override;
      if (realizations) cfg.realizations = *realizations;
      if (timing) cfg.timing = true;
      const std::vector<SweepRow> rows = run_sweep(cfg);
      emit(rows_csv(rows), out_dir, "rows.csv");
      emit(aggregate_csv(rows), out_dir, "aggregate.csv");
      int failed = 0;
      for (const auto& r : rows) failed += r.failed ? 1 : 0;
      std::cerr << "wpmec: " << rows.size() << " rows, " << failed << " failed, written to " << out_dir << "\n";
      return kOk;
    }
    if (*pair) {
      const InstanceFile f = load_instance(config, seed);
      PairingOptions po;
      po.scheme = parse_scheme(scheme_name);
      const PairingResult r = run_pairing(parse_pairing_scheme(pairing_name), f.config, f.channels, po);
      Json j;
      j["pairing_scheme"] = pairing_name;
      j["scheme"] = scheme_name;
      j["rate_bits"] = r.rate_bits;
      j["pairing"] = to_json(r.pairing);
      j["candidate_evaluations"] = r.candidate_evaluations;
      j["solver_calls"] = r.solver_calls;
      if (!r.committed_rates.empty()) j["committed_rates"] = r.committed_rates;
      const Pairing used = po.scheme == Scheme::Local ? Pairing::empty(f.config.n_users) : r.pairing;
      j["report"] = to_json(r.report, audit(f.config, f.channels, used, r.report.allocation));
      emit(j.dump(2) + "\n", out_dir, "pairing.json");
      return kOk;
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "wpmec: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kOk;
}
