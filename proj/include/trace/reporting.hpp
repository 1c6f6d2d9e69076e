#pragma once
// Per-agent aggregation of trajectory scores and leaderboard emission.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trace/model.hpp"

namespace trace::reporting {

// Diagnostics attached to an agent summary when a diagnose run exists.
struct AgentDiagnostics {
    std::optional<double> mean_lambda_min;
    std::optional<double> trs;
    std::optional<double> mean_entropy_adaptability;
};

struct AgentSummary {
    std::string agent_id;
    int n_tasks = 0;
    double pass_at_1 = 0.0;
    // Unconditional means are over all trajectories with the metric present;
    // conditional means restrict to judged-correct trajectories and are null
    // when nothing was correct.
    std::optional<double> mean_utility;
    std::optional<double> mean_efficiency;
    std::optional<double> mean_cognitive;
    std::optional<double> mean_grounding;
    std::optional<double> mean_robustness;
    std::optional<double> mean_utility_correct;
    std::optional<double> mean_efficiency_correct;
    std::optional<double> mean_cognitive_correct;
    std::optional<double> mean_grounding_correct;
    std::optional<double> mean_robustness_correct;
    std::optional<double> mean_lambda_min;
    std::optional<double> trs;
    std::optional<double> mean_entropy_adaptability;
};

struct TaskScore {
    std::string task_id;
    TraceScores scores;
};

// One agent's scores, one per task. Duplicate task ids or an empty input
// throw. Order-independent: results are identical for any permutation.
AgentSummary aggregate(const std::string& agent_id,
                       std::vector<TaskScore> scores,
                       const std::optional<AgentDiagnostics>& diagnostics =
                           std::nullopt);

enum class LeaderboardFormat {
    Markdown,
    Csv,
    Json,
};

std::optional<LeaderboardFormat> leaderboard_format_from_string(
    std::string_view name);

// Rows sorted by unconditional mean utility (desc), ties by pass@1 (desc)
// then agent id (asc); fixed 4-decimal formatting; byte-stable for equal
// input.
std::string emit_leaderboard(std::span<const AgentSummary> summaries,
                             LeaderboardFormat format);

}  // namespace trace::reporting
