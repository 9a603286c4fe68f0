#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gxm/extension.hpp"
#include "gxm/group.hpp"
#include "gxm/potential.hpp"
#include "gxm/shift.hpp"

namespace gxm {

struct TaskSpec {
  std::string verb;
  nlohmann::json params = nlohmann::json::object();
};

/// A parsed and cross-checked scenario file.
struct Scenario {
  std::string name;
  std::optional<Shift> shift;
  std::optional<Potential> potential;
  std::optional<Group> group;
  std::optional<GroupExtension> extension;
  std::vector<TaskSpec> tasks;
  std::string output = "json";
};

/// The fixed task vocabulary, in documentation order.
const std::vector<std::string>& valid_verbs();

/// Checks every task's parameters; throws InputError naming the bad key.
void validate_tasks(const Scenario& scenario);

/// Parses and validates scenario JSON. Errors are InputError with the line
/// and column for syntax errors and the offending key for schema errors.
Scenario parse_scenario(const std::string& text, const std::string& default_name);
/// Same, reading a file; the default name is the file stem.
Scenario load_scenario(const std::filesystem::path& path);

/// Bundled scenario files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir);

struct RunOptions {
  std::filesystem::path out_dir = "results";
  /// Overrides the scenario's output format when set.
  std::optional<std::string> output;
  bool strict = false;
  /// Overrides every task's tolerance when set.
  std::optional<double> tolerance;
  std::size_t threads = 1;
  /// Echoed into the manifest.
  std::string source;
};

struct TaskOutcome {
  std::string verb;
  /// "ok", "audit-failed" or "error".
  std::string status;
  std::string message;
  nlohmann::json result;
  double seconds = 0.0;
  std::vector<std::filesystem::path> files;
};

struct RunReport {
  std::vector<TaskOutcome> tasks;
  int exit_code = 0;
};

/// Executes one task and returns its result; `audit_ok` turns false when an
/// audit inside the task fails.
nlohmann::json run_task(const Scenario& scenario, const TaskSpec& task, const RunOptions& options, bool& audit_ok);

/// Runs every task in order, writes <out>/<name>/<task>.<ext> and
/// run-manifest.json, and prints a one-line summary per task to `log`.
/// exit_code is 0 only when every task completed and every audit passed.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& log);

/// Rounds to 12 significant digits; non-finite values become strings.
nlohmann::json number12(double v);

}  // namespace gxm
