#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "reservelab/harness.hpp"

namespace reservelab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  std::vector<long> horizons;
  int replications = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  RecordMode records = RecordMode::kAuto;
  int jobs = 1;
  bool dump_snapshots = false;
};

// One file fully determines a run given the master seed.
struct ExperimentConfig {
  Scenario scenario;
  RunSpec run;
};

// Parses and validates. Unknown keys are rejected; market invariants are
// checked via validate_market; strategy parameters are checked against
// a_max / v_max. Throws ConfigError with the full violation list.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

std::string serialize_experiment_config(const ExperimentConfig& config);

const char* regret_mode_name(RegretMode mode);
const char* record_mode_name(RecordMode mode);

}  // namespace reservelab
