#pragma once

#include <string_view>
#include <vector>

namespace leafhol::cli {

struct BuiltinScenario {
  std::string_view name;
  std::string_view json;
};

/// Scenario files shipped in scenarios/, sorted by name.
const std::vector<BuiltinScenario>& builtin_scenarios();

}  // namespace leafhol::cli
