#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "memsim/scenario.hpp"

namespace memsim {

/// Canonical JSON: keys keep declaration order so dumps are stable.
using Json = nlohmann::ordered_json;

/// Parses text, turning syntax errors into ParseError.
Json parse_json(std::string_view text);

Json to_json(const AttackConfig& cfg);
Json to_json(const ScenarioConfig& cfg);

/// Decoders accept partial documents (missing keys keep defaults) but reject
/// unknown keys and wrong types with ParseError. They do not check domain
/// invariants; call validate() for that.
AttackConfig attack_from_json(const Json& j);
ScenarioConfig scenario_from_json(const Json& j);

std::string to_string(ScenarioKind kind);
std::string to_string(AttackerType type);

/// Stable 64-bit digest (hex) of the canonical config JSON.
std::string config_digest(const ScenarioConfig& cfg);

}  // namespace memsim
