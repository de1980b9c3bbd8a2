// SPDX-License-Identifier: Apache-2.0

#include "wpmec/serialize.hpp"

#include <fstream>
#include <sstream>

namespace wpmec {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, field, msg);
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

template <class T>
T as(const Json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(field, std::string("wrong type: ") + e.what());
  }
}

template <class T>
void read_opt(const Json& j, const char* key, T& out, const std::string& where = "") {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it != j.end()) out = as<T>(*it, where.empty() ? key : where + "." + key);
}

Json complex_vec(const Eigen::VectorXcd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
  return a;
}

Eigen::VectorXcd complex_vec_from(const Json& j, const std::string& field) {
  if (!j.is_array()) bad(field, "expected an array of [re, im] pairs");
  Eigen::VectorXcd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) bad(f, "expected [re, im]");
    v[i] = {as<double>(j[i][0], f), as<double>(j[i][1], f)};
  }
  return v;
}

Json complex_mat(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(complex_vec(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXcd complex_mat_from(const Json& j, const std::string& field) {
  if (!j.is_array()) bad(field, "expected an array of rows");
  const Eigen::Index n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXcd row = complex_vec_from(j[r], field + "[" + std::to_string(r) + "]");
    if (row.size() != n) bad(field, "matrix must be square");
    m.row(r) = row.transpose();
  }
  return m;
}

Json profile(const ComputeProfile& p) {
  return {{"switch_capacitance", p.switch_capacitance}, {"cycles_per_bit", p.cycles_per_bit}};
}

std::vector<ComputeProfile> profiles_from(const Json& j, const std::string& field) {
  if (!j.is_array()) bad(field, "expected an array");
  std::vector<ComputeProfile> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ComputeProfile p;
    const std::string f = field + "[" + std::to_string(i) + "]";
    read_opt(j[i], "switch_capacitance", p.switch_capacitance, f);
    read_opt(j[i], "cycles_per_bit", p.cycles_per_bit, f);
    out.push_back(p);
  }
  return out;
}

template <class T>
void fit(std::vector<T>& v, int n, const T& fallback) {
  const T fill = v.empty() ? fallback : v.front();
  v.resize(std::max(n, 0), fill);
}

Json point(const Point2& p) { return {p.x, p.y}; }

Point2 point_from(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) bad(field, "expected [x, y]");
  return {as<double>(j[0], field), as<double>(j[1], field)};
}

}  // namespace

Json to_json(const SystemConfig& c) {
  Json j;
  j["n_ets"] = c.n_ets;
  j["antennas_per_et"] = c.antennas_per_et;
  j["n_users"] = c.n_users;
  j["n_helpers"] = c.n_helpers;
  j["block_duration"] = c.block_duration;
  j["total_bandwidth"] = c.total_bandwidth;
  j["noise_psd"] = c.noise_psd;
  j["eh_efficiency"] = c.eh_efficiency;
  j["result_ratio"] = c.result_ratio;
  j["power_budget"] = c.power_budget;
  j["user_compute"] = Json::array();
  for (const auto& p : c.user_compute) j["user_compute"].push_back(profile(p));
  j["helper_compute"] = Json::array();
  for (const auto& p : c.helper_compute) j["helper_compute"].push_back(profile(p));
  return j;
}

SystemConfig system_config_from_json(const Json& j, const SystemConfig& base) {
  SystemConfig c = base;
  read_opt(j, "n_ets", c.n_ets);
  read_opt(j, "antennas_per_et", c.antennas_per_et);
  read_opt(j, "n_users", c.n_users);
  read_opt(j, "n_helpers", c.n_helpers);
  read_opt(j, "block_duration", c.block_duration);
  read_opt(j, "total_bandwidth", c.total_bandwidth);
  read_opt(j, "noise_psd", c.noise_psd);
  read_opt(j, "eh_efficiency", c.eh_efficiency);
  read_opt(j, "result_ratio", c.result_ratio);
  if (j.contains("power_budget")) {
    const Json& p = j["power_budget"];
    c.power_budget = p.is_number() ? std::vector<double>(std::max(c.n_ets, 0), p.get<double>())
                                   : as<std::vector<double>>(p, "power_budget");
  } else {
    fit(c.power_budget, c.n_ets, 6.0);
  }
  if (j.contains("user_compute")) {
    c.user_compute = profiles_from(j["user_compute"], "user_compute");
  } else {
    fit(c.user_compute, c.n_users, ComputeProfile{});
  }
  if (j.contains("helper_compute")) {
    c.helper_compute = profiles_from(j["helper_compute"], "helper_compute");
  } else {
    fit(c.helper_compute, c.n_helpers, ComputeProfile{});
  }
  return c;
}

Json to_json(const ChannelSet& ch) {
  Json j;
  j["et_user"] = Json::array();
  for (const auto& g : ch.et_user) j["et_user"].push_back(complex_vec(g));
  j["et_helper"] = Json::array();
  for (const auto& g : ch.et_helper) j["et_helper"].push_back(complex_vec(g));
  j["d2d_gain"] = Json::array();
  for (Eigen::Index k = 0; k < ch.d2d_gain.rows(); ++k) {
    Json row = Json::array();
    for (Eigen::Index m = 0; m < ch.d2d_gain.cols(); ++m) row.push_back(ch.d2d_gain(k, m));
    j["d2d_gain"].push_back(row);
  }
  return j;
}

ChannelSet channels_from_json(const Json& j) {
  ChannelSet ch;
  const Json& u = require(j, "et_user", "channels");
  if (!u.is_array()) bad("channels.et_user", "expected an array");
  for (std::size_t k = 0; k < u.size(); ++k) {
    ch.et_user.push_back(complex_vec_from(u[k], "channels.et_user[" + std::to_string(k) + "]"));
  }
  if (j.contains("et_helper")) {
    const Json& h = j["et_helper"];
    if (!h.is_array()) bad("channels.et_helper", "expected an array");
    for (std::size_t m = 0; m < h.size(); ++m) {
      ch.et_helper.push_back(complex_vec_from(h[m], "channels.et_helper[" + std::to_string(m) + "]"));
    }
  }
  const auto rows = j.contains("d2d_gain") ? as<std::vector<std::vector<double>>>(j["d2d_gain"], "channels.d2d_gain")
                                           : std::vector<std::vector<double>>(ch.et_user.size());
  const std::size_t cols = ch.et_helper.size();
  ch.d2d_gain.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != cols) bad("channels.d2d_gain", "row " + std::to_string(k) + " must have one entry per helper");
    for (std::size_t m = 0; m < cols; ++m) ch.d2d_gain(k, m) = rows[k][m];
  }
  return ch;
}

Json to_json(const Pairing& p) { return {{"helper_sets", p.helper_sets}}; }

Pairing pairing_from_json(const Json& j) {
  Pairing p;
  p.helper_sets = as<std::vector<std::vector<int>>>(require(j, "helper_sets", "pairing"), "pairing.helper_sets");
  return p;
}

Json to_json(const PrimalAllocation& a) {
  Json j;
  j["energy_cov"] = complex_mat(a.energy_cov);
  j["local_bits"] = a.local_bits;
  j["pairs"] = Json::array();
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    j["pairs"].push_back({{"user", a.pairs[i].user},
                          {"helper", a.pairs[i].helper},
                          {"offload_bits", a.offload_bits[i]},
                          {"bandwidth", a.bandwidths[i]},
                          {"slot_times", a.slot_times[i]}});
  }
  return j;
}

PrimalAllocation allocation_from_json(const Json& j) {
  PrimalAllocation a;
  a.energy_cov = complex_mat_from(require(j, "energy_cov", "allocation"), "allocation.energy_cov");
  a.local_bits = as<std::vector<double>>(require(j, "local_bits", "allocation"), "allocation.local_bits");
  if (j.contains("pairs")) {
    for (std::size_t i = 0; i < j["pairs"].size(); ++i) {
      const Json& p = j["pairs"][i];
      const std::string f = "allocation.pairs[" + std::to_string(i) + "]";
      a.pairs.push_back({as<int>(require(p, "user", f), f + ".user"), as<int>(require(p, "helper", f), f + ".helper")});
      a.offload_bits.push_back(as<double>(require(p, "offload_bits", f), f + ".offload_bits"));
      a.bandwidths.push_back(as<double>(require(p, "bandwidth", f), f + ".bandwidth"));
      a.slot_times.push_back(as<std::array<double, 3>>(require(p, "slot_times", f), f + ".slot_times"));
    }
  }
  return a;
}

Json to_json(const ConstraintAudit& a) {
  Json j;
  j["power"] = a.power;
  j["bandwidth"] = a.bandwidth;
  j["time"] = a.time;
  j["user_energy"] = a.user_energy;
  j["helper_energy"] = a.helper_energy;
  j["psd"] = a.psd;
  j["nonnegativity"] = a.nonnegativity;
  j["worst_violation"] = a.worst_violation;
  return j;
}

Json to_json(const TopologySpec& s) {
  Json j;
  j["et_positions"] = Json::array();
  for (const auto& p : s.et_positions) j["et_positions"].push_back(point(p));
  j["center"] = point(s.center);
  j["user_radius"] = s.user_radius;
  j["helper_radius"] = s.helper_radius;
  j["pathloss_ref_db"] = s.pathloss_ref_db;
  j["pathloss_exponent"] = s.pathloss_exponent;
  j["min_distance"] = s.min_distance;
  return j;
}

TopologySpec topology_spec_from_json(const Json& j, const TopologySpec& base) {
  TopologySpec s = base;
  if (j.contains("et_positions")) {
    const Json& e = j["et_positions"];
    if (!e.is_array()) bad("topology.et_positions", "expected an array");
    s.et_positions.clear();
    for (std::size_t i = 0; i < e.size(); ++i) {
      s.et_positions.push_back(point_from(e[i], "topology.et_positions[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("center")) s.center = point_from(j["center"], "topology.center");
  read_opt(j, "user_radius", s.user_radius, "topology");
  read_opt(j, "helper_radius", s.helper_radius, "topology");
  read_opt(j, "pathloss_ref_db", s.pathloss_ref_db, "topology");
  read_opt(j, "pathloss_exponent", s.pathloss_exponent, "topology");
  read_opt(j, "min_distance", s.min_distance, "topology");
  if (!(s.pathloss_exponent > 0.0)) bad("topology.pathloss_exponent", "must be positive");
  if (!(s.min_distance > 0.0)) bad("topology.min_distance", "must be positive");
  return s;
}

Json to_json(const InstanceFile& f) {
  return {{"config", to_json(f.config)}, {"channels", to_json(f.channels)}, {"pairing", to_json(f.pairing)}};
}

InstanceFile instance_from_json(const Json& j) {
  InstanceFile f;
  f.config = system_config_from_json(require(j, "config", ""));
  f.channels = channels_from_json(require(j, "channels", ""));
  f.pairing = j.contains("pairing") ? pairing_from_json(j["pairing"]) : Pairing::empty(f.config.n_users);
  validate(f.config, f.channels, f.pairing);
  return f;
}

Json to_json(const SolveReport& r, const ConstraintAudit& audit) {
  Json j;
  j["objective_bits"] = r.objective_bits;
  j["local_bits"] = r.allocation.local_total_bits();
  j["offload_bits"] = r.allocation.offloaded_bits();
  j["dual_value"] = r.dual_value;
  j["rel_gap"] = r.rel_gap;
  j["iterations"] = r.iterations;
  j["status"] = to_string(r.status);
  j["history"] = r.history;
  j["duals"] = r.duals;
  j["allocation"] = to_json(r.allocation);
  j["audit"] = to_json(audit);
  return j;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
    bad(source, "line " + std::to_string(line) + ": " + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad(path, "cannot write file");
  out << text;
}

}  // namespace wpmec
