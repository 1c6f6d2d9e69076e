#pragma once
// Canonical data model: tasks, trajectories, per-trajectory scores, and the
// engine configuration. Values are immutable after parse/validation and safe
// to share across worker threads.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trace {

// Raised for malformed or invariant-violating input records.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ActionKind {
    Search,
    Fetch,
    Reason,
    Finish,
};

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> action_kind_from_string(std::string_view s);

struct Action {
    ActionKind kind = ActionKind::Search;
    std::string payload;
    // Absent means "use the configured cost table for this kind".
    std::optional<double> intrinsic_cost;
};

struct Step {
    int index = 1;  // 1-based, contiguous within a trajectory
    Action action;
    std::string observation_text;
    std::optional<std::string> observation_content_id;
    bool is_trap_hit = false;
    std::optional<std::vector<double>> action_distribution;
};

struct Claim {
    std::string text;
    std::vector<std::string> evidence;  // may be empty: an uncited claim
};

struct Trajectory {
    std::string task_id;
    std::string agent_id;
    std::string run_id;
    std::vector<Step> steps;  // length T >= 1, last step is Finish
    std::string final_answer;
    std::vector<Claim> claims;

    std::size_t length() const { return steps.size(); }
};

struct Task {
    std::string id;
    std::string question;
    std::string ground_truth_answer;
    double complexity = 0.0;  // opaque non-negative score
    std::shared_ptr<const Trajectory> oracle_trajectory;  // optional
    std::vector<std::string> trap_ids;

    bool has_oracle() const { return oracle_trajectory != nullptr; }
};

// Per-trajectory metric vector. Metric fields are optional because a failed
// provider nulls that metric (with a warning) instead of aborting a batch.
struct TraceScores {
    bool correct = false;
    std::optional<double> efficiency;         // E, (0,1]
    std::optional<double> grounding;          // G_E, (0,1]
    std::optional<double> robustness;         // R_R, (0,1]
    std::optional<double> cognitive_quality;  // C, (0,1]
    std::optional<double> utility;            // U, [0,1]; 0 whenever !correct
    std::optional<double> entropy_adaptability;  // E_A, [-1,1]
    std::vector<double> relevance_series;        // r_t
    std::vector<double> gain_series;             // g_t
    std::vector<double> penalty_series;          // p_t
    std::vector<std::string> warnings;

    bool operator==(const TraceScores&) const = default;
};

// A scores-file line: trajectory identity plus its metric vector.
struct ScoreRecord {
    std::string task_id;
    std::string agent_id;
    std::string run_id;
    TraceScores scores;

    bool operator==(const ScoreRecord&) const = default;
};

struct CostTable {
    double search = 1.0;
    double fetch = 1.0;
    double reason = 0.25;
    double finish = 0.1;  // nonzero so total raw cost stays positive

    double cost_of(ActionKind kind) const;
};

// Recovery-latency cap for traps the agent never escapes: either the number
// of remaining steps (default) or a fixed positive step count.
struct RecoveryCap {
    std::optional<int> fixed;  // nullopt = remaining-steps

    int resolve(int trap_index, int trajectory_length) const {
        const int cap = fixed ? *fixed : trajectory_length - trap_index;
        return cap < 1 ? 1 : cap;
    }
};

// Metric hyperparameters. Defaults are the engine's fixed reference values;
// validate() enforces the documented ranges.
struct TraceConfig {
    double omega_e = 0.5;
    double omega_c = 0.5;
    double alpha = 0.5;
    double gamma = 0.05;
    double beta = 0.5;
    double lambda_decay = 0.1;
    double theta_succ = 0.9;
    int k_runs = 5;
    double hint_grid_step = 0.1;
    double nli_floor = 1e-6;
    RecoveryCap recovery_cap;
    CostTable cost_table;
    int max_tool_calls = 60;

    void validate() const;
};

// Structural validation shared by the parsers and the simulator.
// Throws ValidationError naming the offending field.
void validate_step(const Step& step, int expected_index, bool is_last);
void validate_trajectory(const Trajectory& trajectory);
void validate_task(const Task& task);

}  // namespace trace
