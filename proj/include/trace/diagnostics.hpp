#pragma once
// Latent-capability and policy-profile diagnostics: minimum hint rate over
// oracle prefixes, entropy adaptability, and run-to-run reproducibility.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trace/model.hpp"
#include "trace/providers.hpp"

namespace trace {

// Executes one agent attempt on a task. Implementations must be
// deterministic given (task, hint, seed) and honor max_tool_calls.
class AgentRunner {
public:
    virtual ~AgentRunner() = default;
    virtual Trajectory run(const Task& task, std::span<const Step> hint,
                           std::uint64_t seed) = 0;
    // Whether run() may be invoked from multiple threads at once.
    virtual bool thread_safe() const { return false; }
};

// Spawns a configured command per trial; writes one JSON request
// {task, hint_steps, seed, max_tool_calls} to its stdin and reads one
// trajectory JSON object from its stdout. Nonzero exit, timeout, or
// malformed output fails the trial.
class SubprocessAgent final : public AgentRunner {
public:
    SubprocessAgent(std::string command, int max_tool_calls,
                    int timeout_ms = 30000);
    Trajectory run(const Task& task, std::span<const Step> hint,
                   std::uint64_t seed) override;

private:
    std::string command_;
    int max_tool_calls_;
    int timeout_ms_;
};

}  // namespace trace

namespace trace::diagnostics {

struct ScaffoldResult {
    double lambda_min = 1.0;
    bool attainable = false;
    std::map<double, double> success_curve;  // evaluated grid levels
    int trials_per_level = 0;
    std::vector<std::string> warnings;
};

// First ceil(lambda · T_gt) oracle steps. Throws when the task has no
// oracle trajectory.
std::vector<Step> hint_prefix(const Trajectory& oracle, double lambda);

// Fraction of n_trials runs (seeds seed..seed+n-1) whose final answer the
// judge accepts; a runner failure counts the trial as failed with a warning.
double estimate_success(AgentRunner& agent, const Task& task,
                        std::span<const Step> hint, int n_trials,
                        JudgeProvider& judge, std::uint64_t seed,
                        std::vector<std::string>* warnings = nullptr);

struct MinHintOptions {
    int trials_per_level = 10;
    std::uint64_t seed = 1;
    // Grid bisection; valid only when success is monotone non-decreasing in
    // lambda, where it returns the same level as the linear sweep.
    bool use_bisection = false;
};

// Ascending sweep of the lambda grid {0, step, ..., 1}; smallest level whose
// success rate reaches theta_succ. Unattainable: lambda_min = 1, attainable
// = false, full curve reported.
ScaffoldResult min_hint_rate(AgentRunner& agent, const Task& task,
                             JudgeProvider& judge, const TraceConfig& config,
                             const MinHintOptions& options = {});

// Shannon entropy (natural log) of each step's action distribution; nullopt
// for steps without one.
std::vector<std::optional<double>> step_entropies(const Trajectory& trajectory);

// Pearson correlation between per-step gain and the subsequent drop in
// policy entropy. Null (with a warning) when any distribution is missing,
// T < 3, or either sequence has zero variance.
std::optional<double> entropy_adaptability(
    const Trajectory& trajectory, std::span<const double> gain,
    std::vector<std::string>* warnings = nullptr);

// Canonical "kind:normalized-payload" form used for reproducibility.
std::vector<std::string> canonical_action_sequence(const Trajectory& trajectory);

// Levenshtein distance over whole action strings.
std::size_t edit_distance(std::span<const std::string> a,
                          std::span<const std::string> b);

// Mean pairwise (1 - normalized edit distance) over K >= 2 runs of one
// (task, agent) pair.
double trajectory_reproducibility(std::span<const Trajectory> runs);

}  // namespace trace::diagnostics
