#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mines/core.hpp"
#include "mines/optimizer.hpp"
#include "mines/problems.hpp"

namespace mines::cli {

/// Invalid or missing configuration; maps to exit code 1. The message starts
/// with the offending field name.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// "kind:key=value,key=value", e.g. "quadratic:d=5,kappa=100".
struct ProblemSpec {
  std::string kind;
  std::map<std::string, std::string> params;

  std::string to_string() const;
};

ProblemSpec parse_problem_spec(const std::string& text);
Problem build_problem(const ProblemSpec& spec);

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<Algo> algos{Algo::Mines};
  MinesConfig mines;
  std::optional<double> baseline_eta;  // step size of the rgf / nes baselines
  int replicates = 1;
  std::string output_dir = "mines_out";
  int jobs = 1;
  bool gnuplot = false;
  std::uint64_t budget = 100000;  // compare: matched query budget
};

/// Builds the configuration from a merged JSON object (file < MINES_SEED <
/// flags, merged by the caller). Throws ConfigError naming the field.
ExperimentConfig resolve_config(const nlohmann::json& merged);

/// Full effective configuration, defaults included; resolve_config of the
/// result reproduces the same experiment.
nlohmann::json to_json(const ExperimentConfig& config);

/// Reads a JSON config file; ConfigError when unreadable or malformed.
nlohmann::json load_config_file(const std::string& path);

/// Applies MINES_SEED from the environment to `merged` (overwrites "seed").
void apply_seed_env(nlohmann::json& merged);

/// Step size used for a baseline: baseline_eta, else a numeric eta1, else
/// 0.25/L from known smoothness. ConfigError when none is available.
double baseline_step(const ExperimentConfig& config);

}  // namespace mines::cli
