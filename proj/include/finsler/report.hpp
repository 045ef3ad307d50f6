#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finsler::report {

struct CheckResult {
  std::string name;
  std::string verdict;  // pass | fail | reported
  double value = 0.0;
  std::optional<double> tolerance;
  std::string comparison;  // "<=", ">", ">=", "monotone", ""
  std::string detail;

  bool passed() const { return verdict != "fail"; }
};

struct BlowUpInfo {
  std::string message;
  std::size_t node = 0;
  double time = 0.0;
};

struct ScenarioReport {
  std::string name;
  std::string source;
  std::string status;  // pass | fail | blowup
  double wall_seconds = 0.0;
  long steps = 0;
  double dt = 0.0;
  double final_time = 0.0;
  std::string gauge;
  std::string scheme;
  std::vector<int> grid;
  std::vector<CheckResult> checks;
  std::optional<BlowUpInfo> blowup;
  std::map<std::string, std::string> outputs;
};

struct Environment {
  std::string compiler;
  std::string build_type;
  std::string system;
  std::string hostname;
  std::string fftw;
  std::string library_version;
  std::string timestamp;  // UTC, ISO 8601
  unsigned workers = 1;
};

Environment fingerprint();

/// JSON text of a report set, keys in a fixed order.
std::string to_json(const std::vector<ScenarioReport>& reports, const Environment& env);
void write_json(const std::filesystem::path& path, const std::vector<ScenarioReport>& reports,
                const Environment& env);

}  // namespace finsler::report
