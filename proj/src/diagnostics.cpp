#include "trace/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trace/io.hpp"

namespace trace::diagnostics {

std::vector<Step> hint_prefix(const Trajectory& oracle, double lambda) {
    if (oracle.steps.empty())
        throw ValidationError("task has no oracle trajectory");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("lambda must be in [0,1]");
    const double steps = lambda * static_cast<double>(oracle.steps.size());
    // Tolerance guards grid values like 0.3 whose product lands a hair
    // above the intended integer.
    const auto count = static_cast<std::size_t>(
        std::max(0.0, std::ceil(steps - 1e-9)));
    return {oracle.steps.begin(),
            oracle.steps.begin() + static_cast<std::ptrdiff_t>(
                                       std::min(count, oracle.steps.size()))};
}

double estimate_success(AgentRunner& agent, const Task& task,
                        std::span<const Step> hint, int n_trials,
                        JudgeProvider& judge, std::uint64_t seed,
                        std::vector<std::string>* warnings) {
    if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
    int successes = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
        try {
            const Trajectory result =
                agent.run(task, hint, seed + static_cast<std::uint64_t>(trial));
            if (judge.judge(result.final_answer, task.ground_truth_answer))
                ++successes;
        } catch (const std::exception& e) {
            if (warnings)
                warnings->push_back("trial " + std::to_string(trial) +
                                    " failed: " + e.what());
        }
    }
    return static_cast<double>(successes) / static_cast<double>(n_trials);
}

namespace {

std::vector<double> lambda_grid(double step) {
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        // Rounded so grid levels compare cleanly against decimal literals.
        const double lambda =
            std::round(static_cast<double>(i) * step * 1e12) / 1e12;
        if (lambda >= 1.0 - 1e-12) break;
        grid.push_back(lambda);
    }
    grid.push_back(1.0);
    return grid;
}

}  // namespace

ScaffoldResult min_hint_rate(AgentRunner& agent, const Task& task,
                             JudgeProvider& judge, const TraceConfig& config,
                             const MinHintOptions& options) {
    if (!task.has_oracle())
        throw ValidationError("task has no oracle trajectory");
    const std::vector<double> grid = lambda_grid(config.hint_grid_step);
    ScaffoldResult result;
    result.trials_per_level = options.trials_per_level;

    auto rate_at = [&](double lambda) {
        const std::vector<Step> hint =
            hint_prefix(*task.oracle_trajectory, lambda);
        const double rate =
            estimate_success(agent, task, hint, options.trials_per_level,
                             judge, options.seed, &result.warnings);
        result.success_curve[lambda] = rate;
        return rate;
    };

    if (options.use_bisection) {
        // Assumes success is monotone non-decreasing in lambda.
        std::size_t lo = 0;
        std::size_t hi = grid.size() - 1;
        if (rate_at(grid[lo]) >= config.theta_succ) {
            hi = lo;
        } else if (rate_at(grid[hi]) < config.theta_succ) {
            result.lambda_min = 1.0;
            result.attainable = false;
            return result;
        } else {
            while (hi - lo > 1) {
                const std::size_t mid = lo + (hi - lo) / 2;
                if (rate_at(grid[mid]) >= config.theta_succ)
                    hi = mid;
                else
                    lo = mid;
            }
        }
        result.lambda_min = grid[hi];
        result.attainable = true;
        return result;
    }

    for (double lambda : grid) {
        if (rate_at(lambda) >= config.theta_succ) {
            result.lambda_min = lambda;
            result.attainable = true;
            return result;
        }
    }
    result.lambda_min = 1.0;
    result.attainable = false;
    return result;
}

std::vector<std::optional<double>> step_entropies(
    const Trajectory& trajectory) {
    std::vector<std::optional<double>> out;
    out.reserve(trajectory.steps.size());
    for (const Step& step : trajectory.steps) {
        if (!step.action_distribution) {
            out.push_back(std::nullopt);
            continue;
        }
        double h = 0.0;
        for (double p : *step.action_distribution) {
            if (p > 0.0) h -= p * std::log(p);
        }
        out.push_back(h);
    }
    return out;
}

namespace {

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::optional<double> entropy_adaptability(
    const Trajectory& trajectory, std::span<const double> gain,
    std::vector<std::string>* warnings) {
    const std::size_t length = trajectory.steps.size();
    if (length < 3) {
        if (warnings)
            warnings->push_back(
                "entropy_adaptability undefined: needs at least 3 steps");
        return std::nullopt;
    }
    const auto entropies = step_entropies(trajectory);
    for (const auto& h : entropies) {
        if (!h) {
            if (warnings)
                warnings->push_back(
                    "entropy_adaptability undefined: a step has no "
                    "action_distribution");
            return std::nullopt;
        }
    }
    std::vector<double> gains(gain.begin(), gain.begin() + (length - 1));
    std::vector<double> entropy_drops;
    entropy_drops.reserve(length - 1);
    for (std::size_t t = 0; t + 1 < length; ++t)
        entropy_drops.push_back(-(*entropies[t + 1] - *entropies[t]));
    const std::optional<double> rho = pearson(gains, entropy_drops);
    if (!rho && warnings)
        warnings->push_back(
            "entropy_adaptability undefined: zero variance in gain or "
            "entropy-drop sequence");
    return rho;
}

std::vector<std::string> canonical_action_sequence(
    const Trajectory& trajectory) {
    std::vector<std::string> out;
    out.reserve(trajectory.steps.size());
    for (const Step& step : trajectory.steps) {
        out.push_back(std::string(to_string(step.action.kind)) + ":" +
                      normalize_text(step.action.payload));
    }
    return out;
}

std::size_t edit_distance(std::span<const std::string> a,
                          std::span<const std::string> b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> previous(m + 1);
    std::vector<std::size_t> current(m + 1);
    std::iota(previous.begin(), previous.end(), std::size_t{0});
    for (std::size_t i = 1; i <= n; ++i) {
        current[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t substitution =
                previous[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            current[j] = std::min({previous[j] + 1, current[j - 1] + 1,
                                   substitution});
        }
        std::swap(previous, current);
    }
    return previous[m];
}

double trajectory_reproducibility(std::span<const Trajectory> runs) {
    if (runs.size() < 2)
        throw std::invalid_argument(
            "trajectory_reproducibility needs at least 2 runs");
    for (const Trajectory& t : runs) {
        if (t.task_id != runs[0].task_id || t.agent_id != runs[0].agent_id)
            throw std::invalid_argument(
                "trajectory_reproducibility: runs must share task and agent");
    }
    std::vector<std::vector<std::string>> sequences;
    sequences.reserve(runs.size());
    for (const Trajectory& t : runs)
        sequences.push_back(canonical_action_sequence(t));
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        for (std::size_t j = i + 1; j < sequences.size(); ++j) {
            const std::size_t longest =
                std::max(sequences[i].size(), sequences[j].size());
            const double normalized =
                longest == 0
                    ? 0.0
                    : static_cast<double>(
                          edit_distance(sequences[i], sequences[j])) /
                          static_cast<double>(longest);
            total += 1.0 - normalized;
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

}  // namespace trace::diagnostics
