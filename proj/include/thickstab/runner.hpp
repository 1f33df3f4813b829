#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace thickstab {

struct ScenarioInfo {
  std::string name;
  std::vector<std::string> required_keys;
  std::string summary;
  std::string anchor;  // the classical result the scenario exercises
};

const std::vector<ScenarioInfo>& scenario_catalog();
std::string list_scenarios(bool json);

struct RunRequest {
  std::string scenario;
  std::filesystem::path config;
  std::vector<std::string> overrides;  // "section.key=value"
  std::filesystem::path out_dir;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// Runs one scenario end to end; returns the process exit code.
int run_scenario(const RunRequest& request, std::ostream& log, std::ostream& err);

}  // namespace thickstab
