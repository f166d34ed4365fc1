#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace ifsrecur::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "ifs-recur/1";

enum class KeyType { Int, Real, String, Bool, IntList, RealList };

struct KeySpec {
  std::string name;  ///< snake_case; the flag is --name with '_' -> '-'
  KeyType type;
  Json default_value;  ///< null means "no default"
  bool required = false;
  std::string help;
};

struct RunContext {
  std::filesystem::path out_dir;
  std::ostream* console = nullptr;
};

struct Experiment {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  std::function<Json(const Json& config, RunContext& ctx)> run;
};

const std::vector<Experiment>& experiments();
const Experiment* find_experiment(const std::string& name);

/// Keys every experiment accepts.
const std::vector<KeySpec>& common_keys();

/// Defaults, then `file_config`, then `overrides` (raw flag strings), checked
/// against the schema. Unknown keys and type mismatches throw Config errors.
Json resolve_config(const Experiment& exp, const Json& file_config,
                    const std::vector<std::pair<std::string, std::string>>& overrides);

struct Outcome {
  int exit_code = 0;
  Json results;
};

/// Runs a resolved config, writes <out>/results.json and the timing sidecar
/// <out>/results.meta.json, and returns the exit code.
Outcome run_experiment(const Json& resolved, std::ostream& console);

/// Exit code for a failure kind name, as written to results.json.
int exit_code_for(const std::string& kind);

/// Full command line entry point.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ifsrecur::cli
