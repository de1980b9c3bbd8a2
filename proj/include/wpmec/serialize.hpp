// SPDX-License-Identifier: Apache-2.0
//
// Structured-text (JSON) encoding of configs, channel realizations,
// pairings, allocations and reports. Complex numbers are [re, im] pairs.
// Decoding failures raise ConfigError naming the field, and parse errors
// carry the line number.

#pragma once

#include <string>

#include <json.hpp>

#include "wpmec/model.hpp"
#include "wpmec/radio.hpp"

namespace wpmec {

using Json = nlohmann::ordered_json;

/// One self-contained problem: parameters, a channel realization and a pairing.
struct InstanceFile {
  SystemConfig config;
  ChannelSet channels;
  Pairing pairing;
};

Json to_json(const SystemConfig& config);
Json to_json(const ChannelSet& channels);
Json to_json(const Pairing& pairing);
Json to_json(const PrimalAllocation& alloc);
Json to_json(const ConstraintAudit& audit);
Json to_json(const TopologySpec& spec);
Json to_json(const InstanceFile& instance);
/// Report plus the audit of its allocation.
Json to_json(const SolveReport& report, const ConstraintAudit& audit);

/// Missing keys keep the defaults of `base`; counts resize per-node vectors
/// by repeating their first entry when the vector itself is not given.
SystemConfig system_config_from_json(const Json& j, const SystemConfig& base = {});
ChannelSet channels_from_json(const Json& j);
Pairing pairing_from_json(const Json& j);
PrimalAllocation allocation_from_json(const Json& j);
TopologySpec topology_spec_from_json(const Json& j, const TopologySpec& base = {});
InstanceFile instance_from_json(const Json& j);

/// Parses text; syntax errors become ConfigError with "line N".
Json parse_json_text(const std::string& text, const std::string& source = "input");
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace wpmec
