// Scenario files: JSON objects whose keys are the Scenario field names.
// Omitted fields keep their defaults; unknown fields are rejected.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "adrsim/sim.hpp"

namespace adrsim::cli {

/// Parse or validation failure. `what()` carries "source:line:col: ..." for
/// syntax errors and "source: field: ..." for field errors.
class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

sim::Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
sim::Scenario load_scenario(const std::filesystem::path& path);

/// Serialises every field, so parse_scenario(scenario_to_json(s)) == s.
std::string scenario_to_json(const sim::Scenario& s);

}  // namespace adrsim::cli
