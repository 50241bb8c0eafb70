#pragma once

#include "iterlab/iterates.hpp"
#include "iterlab/polynomial.hpp"
#include "iterlab/weight.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace iterlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

struct SamplingConfig {
  std::size_t radii = 40;
  std::size_t directions = 256;
  double r_min = 10.0;
  double r_max = 1e6;
  long snap_den = 12;
  double snap_tol = 0.05;
  int alpha_max = 0;  // 0: use the system order
};

struct Task {
  std::string op;
  Json params;  // validated task keys, minus `op`
  std::size_t line = 0;
};

struct Scenario {
  std::uint64_t seed = 0;
  SamplingConfig sampling;
  std::map<std::string, OperatorSystem> systems;
  std::map<std::string, WeightFunction> weights;
  std::map<std::string, TestFunction> functions;
  std::optional<Box> box;
  std::vector<Task> tasks;
};

/// All validation problems found in a config, each with line context.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Task operations understood by the runner, in CLI spelling.
const std::vector<std::string>& task_ops();

/// Parses and validates a TOML scenario. Relative `file` paths of tabulated
/// weights resolve against base_dir. Throws ConfigError listing every problem.
Scenario parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_config(const std::filesystem::path& path);

/// Checks one task against the scenario's declarations; returns the problems.
std::vector<std::string> validate_task(const Scenario& s, const Task& task);

struct RunResult {
  Json report;                               // canonical, reproducible
  std::string summary;                       // human readable, includes wall times
  std::map<std::string, std::string> files;  // extra CSV outputs by file name
  int exit_code = 0;
};

/// Runs the tasks in order; a failing task is recorded and does not stop the others.
RunResult run_scenario(const Scenario& s);

std::string dump_report(const Json& report);
/// Writes report.json, summary.txt and the CSV files into dir.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace iterlab
