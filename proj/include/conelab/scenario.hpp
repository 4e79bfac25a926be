#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conelab/group.hpp"

namespace conelab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kConfigSchema = "conelab-scenario/1";
inline constexpr const char* kReportSchema = "conelab-report/1";

/// A config that does not resolve: unknown id, bad field, unsupported value.
class ConfigError : public GroupError {
 public:
  using GroupError::GroupError;
};

enum class ExitStatus { AllCertified, ViolationsFound, TruncationLimited };
std::string to_string(ExitStatus s);
/// 0, 1 and 2 in the order of the enum.
int exit_code(ExitStatus s);

/// A validated scenario document. Groups, families, collections, finite-index
/// pairs and maps are declared by id; analyses refer to them.
struct ScenarioConfig {
  Json doc;
  std::string name;
  std::uint64_t seed = 1;
  std::size_t max_vertices = 0;
  std::string output_dir;

  /// Resolves every reference and checks radii and seeds; throws ConfigError.
  static ScenarioConfig from_json(const Json& doc);
  static ScenarioConfig load(const std::filesystem::path& path);
};

struct AnalysisOutcome {
  std::string id, type;
  std::string verdict;  ///< certified, violation or truncation-limited
  std::string headline;
  Json result;
  Json expect;
  std::vector<std::string> mismatches;
};

struct ScenarioReport {
  std::string name;
  std::uint64_t seed = 1;
  std::vector<AnalysisOutcome> analyses;
  ExitStatus status = ExitStatus::AllCertified;

  Json to_json() const;
  /// Aligned text table, one row per analysis.
  std::string summary() const;
};

ScenarioReport run_scenario(const ScenarioConfig& config);

/// Writes <dir>/<name>.json and <dir>/<name>.txt; returns the JSON path.
std::filesystem::path write_report(const ScenarioReport& report, const std::filesystem::path& dir);

std::vector<std::string> builtin_names();
/// Throws ConfigError for an unknown name.
ScenarioConfig builtin_scenario(const std::string& name);

/// Group from its JSON description, e.g. {"kind": "free", "rank": 2}.
Group group_from_json(const Json& j);

}  // namespace conelab
