#include "trace/model.hpp"

#include <cmath>

#include "trace/providers.hpp"

namespace trace {

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::Search: return "search";
        case ActionKind::Fetch: return "fetch";
        case ActionKind::Reason: return "reason";
        case ActionKind::Finish: return "finish";
    }
    return "unknown";
}

std::optional<ActionKind> action_kind_from_string(std::string_view s) {
    if (s == "search") return ActionKind::Search;
    if (s == "fetch") return ActionKind::Fetch;
    if (s == "reason") return ActionKind::Reason;
    if (s == "finish") return ActionKind::Finish;
    return std::nullopt;
}

double CostTable::cost_of(ActionKind kind) const {
    switch (kind) {
        case ActionKind::Search: return search;
        case ActionKind::Fetch: return fetch;
        case ActionKind::Reason: return reason;
        case ActionKind::Finish: return finish;
    }
    return 0.0;
}

void TraceConfig::validate() const {
    if (std::abs(omega_e + omega_c - 1.0) > 1e-9) {
        throw ValidationError(
            "config: omega_e + omega_c must equal 1 (got " +
            std::to_string(omega_e + omega_c) + ")");
    }
    if (!(omega_e >= 0.0) || !(omega_c >= 0.0))
        throw ValidationError("config: omega_e and omega_c must be non-negative");
    if (!(alpha > 0.0)) throw ValidationError("config: alpha must be > 0");
    if (!(gamma >= 0.0)) throw ValidationError("config: gamma must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw ValidationError("config: beta must be in [0,1]");
    if (!(lambda_decay > 0.0))
        throw ValidationError("config: lambda_decay must be > 0");
    if (!(theta_succ > 0.0 && theta_succ <= 1.0))
        throw ValidationError("config: theta_succ must be in (0,1]");
    if (k_runs < 2) throw ValidationError("config: k_runs must be >= 2");
    if (!(hint_grid_step > 0.0 && hint_grid_step <= 1.0))
        throw ValidationError("config: hint_grid_step must be in (0,1]");
    if (!(nli_floor > 0.0 && nli_floor <= 1e-3))
        throw ValidationError("config: nli_floor must be in (0, 1e-3]");
    if (recovery_cap.fixed && *recovery_cap.fixed < 1)
        throw ValidationError("config: recovery_cap must be >= 1");
    for (ActionKind k : {ActionKind::Search, ActionKind::Fetch,
                         ActionKind::Reason, ActionKind::Finish}) {
        if (!(cost_table.cost_of(k) > 0.0))
            throw ValidationError("config: cost table entries must be > 0");
    }
    if (max_tool_calls < 1)
        throw ValidationError("config: max_tool_calls must be >= 1");
}

void validate_step(const Step& step, int expected_index, bool is_last) {
    if (step.index != expected_index) {
        throw ValidationError("step " + std::to_string(step.index) +
                              ": indices must be contiguous 1..T (expected " +
                              std::to_string(expected_index) + ")");
    }
    if (step.action.intrinsic_cost && !(*step.action.intrinsic_cost > 0.0)) {
        throw ValidationError("step " + std::to_string(step.index) +
                              ": intrinsic_cost must be > 0");
    }
    const bool is_finish = step.action.kind == ActionKind::Finish;
    if (is_finish && !is_last) {
        throw ValidationError("step " + std::to_string(step.index) +
                              ": finish action before the last step");
    }
    if (!is_finish && is_last) {
        throw ValidationError("step " + std::to_string(step.index) +
                              ": last step action must be finish");
    }
    if (step.action_distribution) {
        double sum = 0.0;
        for (double p : *step.action_distribution) {
            if (p < 0.0) {
                throw ValidationError("step " + std::to_string(step.index) +
                                      ": action_distribution has a negative entry");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ValidationError("step " + std::to_string(step.index) +
                                  ": action_distribution sums to " +
                                  std::to_string(sum) + ", expected 1");
        }
    }
}

void validate_trajectory(const Trajectory& trajectory) {
    if (trajectory.task_id.empty())
        throw ValidationError("trajectory: task_id must be non-empty");
    if (trajectory.steps.empty())
        throw ValidationError("trajectory: needs at least one step");
    for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
        validate_step(trajectory.steps[i], static_cast<int>(i) + 1,
                      i + 1 == trajectory.steps.size());
    }
    for (const Claim& claim : trajectory.claims) {
        if (claim.text.empty())
            throw ValidationError("trajectory: claim text must be non-empty");
    }
}

void validate_task(const Task& task) {
    if (task.id.empty()) throw ValidationError("task: id must be non-empty");
    if (!(task.complexity >= 0.0))
        throw ValidationError("task " + task.id +
                              ": complexity must be non-negative");
    if (task.oracle_trajectory) {
        validate_trajectory(*task.oracle_trajectory);
        StubJudge judge;
        if (!judge.judge(task.oracle_trajectory->final_answer,
                         task.ground_truth_answer)) {
            throw ValidationError(
                "task " + task.id +
                ": oracle_trajectory final answer does not match ground truth");
        }
    }
}

}  // namespace trace
