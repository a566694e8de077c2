#pragma once

#include <string>
#include <vector>

#include "reservelab/config.hpp"
#include "reservelab/harness.hpp"

namespace reservelab {

// Exit codes: 0 success, 2 validation failure, 1 runtime error.
int run_cli(const std::vector<std::string>& args);

// Subcommand bodies, callable directly from tests.
int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> jobs, std::optional<std::string> out_dir,
                 std::optional<std::string> mode, bool dump_snapshots = false);
int cmd_scaling(const std::string& in_dir, const std::string& out_file);
int cmd_diagnose(const std::string& run_file, const std::string& out_file);

// Pinned round-file schema (golden-file tested).
extern const char* kRoundsCsvHeader;
extern const char* kSummaryCsvHeader;

std::string rounds_csv(const RunResult& run);
std::string run_json(const ExperimentConfig& config, const RunResult& run);
RunResult run_from_json(const std::string& text, ExperimentConfig& config_out);

}  // namespace reservelab
