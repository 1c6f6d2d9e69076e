#pragma once
// Command orchestration shared by the CLI: batch scoring with a bounded
// worker pool, diagnostics sweeps over a subprocess agent, suite simulation,
// and score-file merging for reports.

#include <filesystem>
#include <string>
#include <vector>

#include "trace/config.hpp"
#include "trace/reporting.hpp"
#include "trace/simharness.hpp"

namespace trace::pipeline {

struct EvalOptions {
    std::string tasks_path;
    std::string trajectories_path;
    bool lenient = false;
    int parallelism = 1;
    std::filesystem::path out_dir;
};

// Scores every trajectory against its task (workers fan out, outputs stay in
// input order) and writes scores.jsonl plus leaderboard.md.
void run_eval(const EvalOptions& options, const EngineConfig& config);

struct DiagnoseOptions {
    std::string tasks_path;
    std::string agent_command;
    std::uint64_t seed = 0;
    int k_runs = 5;
    int trials_per_level = 10;
    std::filesystem::path out_dir;
};

// Per task with an oracle: minimum-hint-rate sweep, reproducibility over
// k_runs unhinted runs, and mean entropy adaptability. Tasks without an
// oracle are recorded as skipped. Throws ProviderError when the agent never
// produces a single valid trajectory.
void run_diagnose(const DiagnoseOptions& options, const EngineConfig& config);

struct SimulateOptions {
    std::uint64_t seed = 0;
    int n_tasks = 1;
    sim::GenParams params;
    std::vector<std::string> policy_specs;
    std::filesystem::path out_dir;
};

// Writes tasks.jsonl, trajectories.jsonl, and manifest.json; byte-identical
// for identical inputs.
void run_simulate(const SimulateOptions& options, const EngineConfig& config);

// Merges score files (identical duplicate (agent, task) records collapse;
// conflicting ones throw) and emits one leaderboard document.
std::string run_report(const std::vector<std::string>& scores_paths,
                       reporting::LeaderboardFormat format);

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace trace::pipeline
