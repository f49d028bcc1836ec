#pragma once

// JSON mappings for the configuration structs. Missing keys keep their
// defaults; unknown keys raise ConfigError.

#include "boxtrack/geometry.hpp"
#include "boxtrack/lmb.hpp"
#include "boxtrack/scenario.hpp"

#include <json.hpp>

namespace boxtrack {

void to_json(nlohmann::json& j, const FilterConfig& c);
void from_json(const nlohmann::json& j, FilterConfig& c);

void to_json(nlohmann::json& j, const SrtsParams& p);
void from_json(const nlohmann::json& j, SrtsParams& p);

void to_json(nlohmann::json& j, const ScenarioConfig& c);
void from_json(const nlohmann::json& j, ScenarioConfig& c);

}  // namespace boxtrack
