#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formfind/model.hpp"

namespace formfind {

enum class ScenarioKind {
    cable_net,
    simplex_tensegrity,
    ring_tensegrity,
    handkerchief,
    cantilever,
    buckling_bar,
    cable_membrane_mixed,
};

std::string_view to_string(ScenarioKind kind) noexcept;
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) noexcept;
std::vector<ScenarioKind> all_scenario_kinds();

/// Kind plus named numeric parameters. Parameters not given take the
/// defaults listed by scenario_defaults().
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::cable_net;
    std::map<std::string, double> params;
};

std::map<std::string, double> scenario_defaults(ScenarioKind kind);

struct GeneratedScenario {
    Model model;
    std::map<std::string, double> metadata;  // node / element counts etc.
};

/// Builds the model for `spec`. Throws ValidationError for unknown or
/// out-of-range parameters.
GeneratedScenario generate(const ScenarioSpec& spec);

}  // namespace formfind
