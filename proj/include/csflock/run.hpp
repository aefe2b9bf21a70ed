#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "csflock/config.hpp"
#include "csflock/dynamics.hpp"

namespace csf {

struct RunResult {
    int exit_code = 0;  // 0: all selected invariants pass, 1: some failed, 2: integration failure
    std::vector<std::pair<std::string, std::string>> report;  // ordered key/value pairs
    std::filesystem::path series_path;
    std::filesystem::path report_path;
    Trajectory trajectory;
};

/// Number formatting used everywhere in emitted files: 12 significant digits.
std::string format_sig(double v);

/// Resolves an output directory against the CSFLOCK_OUTPUT_ROOT environment
/// variable (absolute paths pass through) and creates it.
std::filesystem::path resolve_output_dir(const std::string& dir);

/// Integrates the configured scenario, writes series.csv and report.txt into
/// the output directory, and evaluates the selected invariants.
RunResult run(const RunConfig& cfg);

/// Solves the configured opinion game and writes the equilibrium report
/// (certificates, multistart agreement, deviation check, sigma sweep).
int run_nash(const GameConfig& cfg);

/// Runs the base config once per sweep value, each into its own
/// subdirectory, and writes a summary sweep.csv.
int run_sweep(const SweepConfig& cfg);

}  // namespace csf
