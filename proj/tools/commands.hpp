#pragma once

// Subcommands of the mapgroups tool. Each builds a report of named checks,
// writes it under the output directory and maps the outcome to an exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mapgroups/io.hpp"

namespace mapgroups::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

struct RunConfig {
  std::uint64_t seed = 1;
  int modes = 32;
  int grid = 0;  // nodes per axis for full-torus probes; 0 means 4N + 1
  std::string atlas = "circle2";
  std::string group = "SO3";
  WeightConvention convention = WeightConvention::Paper;
  std::filesystem::path out = "out";
  std::map<std::string, double> tolerances;
  Json params = Json::object();  // command-specific keys from the config file
  std::filesystem::path config_dir;  // relative paths in params resolve against this

  int grid_nodes() const { return grid > 0 ? grid : 4 * modes + 1; }
  double tol(const std::string& key) const;
};

/// Defaults for every tolerance key; config files may override but not add keys.
const std::map<std::string, double>& default_tolerances();

/// Reads a config document; InputError on unknown keys or bad values.
RunConfig load_config(const Json& j, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});
void validate(const RunConfig& c);

struct Check {
  std::string name;
  std::string anchor;
  double value = 0;
  std::string relation;  // "<=", ">=", ">"
  double limit = 0;
  bool passed = false;
};

Check at_most(std::string name, std::string anchor, double value, double limit);
Check at_least(std::string name, std::string anchor, double value, double limit);
Check above(std::string name, std::string anchor, double value, double limit);

struct Report {
  std::string command;
  std::vector<Check> checks;
  Json data = Json::object();

  bool passed() const;
  Json to_json(const RunConfig& c) const;
};

Report cmd_verify_axioms(const RunConfig& c);
Report cmd_norms(const RunConfig& c);
Report cmd_extend(const RunConfig& c);
Report cmd_group_demo(const RunConfig& c);
Report cmd_evolve(const RunConfig& c);
Report cmd_ladder(const RunConfig& c);
Report cmd_shrink_domain(const RunConfig& c);

/// Full front end: parses argv, runs one subcommand, returns 0, 1 or 2.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mapgroups::cli
