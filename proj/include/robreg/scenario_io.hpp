#pragma once

#include <iosfwd>
#include <string>

#include "robreg/sim.hpp"

namespace robreg {

/// Parses a flat `key = value` scenario document. Blank lines and text after
/// '#' are ignored. Unknown or malformed keys raise ConfigError naming every
/// offending key. The result is validated.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace robreg
