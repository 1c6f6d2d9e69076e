#include "trace/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "trace/kernels.hpp"

namespace trace::metrics {

namespace {

std::vector<std::string> observation_texts(const Trajectory& trajectory) {
    std::vector<std::string> out;
    out.reserve(trajectory.steps.size());
    for (const Step& step : trajectory.steps)
        out.push_back(step.observation_text);
    return out;
}

}  // namespace

std::vector<double> relevance_series(const Trajectory& trajectory,
                                     const std::string& ground_truth,
                                     EmbeddingProvider& embedder) {
    const std::vector<double> target = embedder.embed(ground_truth);
    std::vector<double> out;
    out.reserve(trajectory.steps.size());
    for (const Step& step : trajectory.steps) {
        const std::vector<double> obs = embedder.embed(step.observation_text);
        out.push_back(kernels::cosine(obs, target));
    }
    return out;
}

std::vector<double> mig_series(std::span<const double> relevance) {
    std::vector<double> gain;
    gain.reserve(relevance.size());
    double frontier = 0.0;  // sup over the empty prefix
    for (double r : relevance) {
        gain.push_back(std::max(0.0, r - frontier));
        frontier = std::max(frontier, r);
    }
    return gain;
}

double redundancy_penalty(std::size_t t, std::span<const double> gain,
                          const std::vector<std::string>& observations,
                          EmbeddingProvider& embedder, double alpha) {
    if (t < 2) return 1.0;
    if (gain[t - 1] > 0.0 || gain[t - 2] > 0.0) return 1.0;
    const std::vector<double> current = embedder.embed(observations[t - 1]);
    const std::vector<double> previous = embedder.embed(observations[t - 2]);
    const double similarity =
        std::max(0.0, kernels::cosine(current, previous));
    return 1.0 + alpha * similarity;
}

std::vector<double> penalty_series(std::span<const double> gain,
                                   const std::vector<std::string>& observations,
                                   EmbeddingProvider& embedder, double alpha) {
    std::vector<double> out;
    out.reserve(gain.size());
    for (std::size_t t = 1; t <= gain.size(); ++t)
        out.push_back(redundancy_penalty(t, gain, observations, embedder, alpha));
    return out;
}

double trajectory_cost(std::span<const Step> steps,
                       std::span<const double> penalties,
                       const CostTable& cost_table) {
    double raw = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const Action& action = steps[i].action;
        const double cost = action.intrinsic_cost
                                ? *action.intrinsic_cost
                                : cost_table.cost_of(action.kind);
        raw += cost * penalties[i];
    }
    return 1.0 + std::log(std::max(1.0, raw));
}

double complexity_reward(std::size_t trajectory_length, double gamma) {
    return 1.0 + gamma * std::log(static_cast<double>(trajectory_length));
}

EfficiencyResult process_efficiency(const Trajectory& trajectory,
                                    const std::string& ground_truth,
                                    EmbeddingProvider& embedder,
                                    const TraceConfig& config) {
    EfficiencyResult result;
    result.series.relevance =
        relevance_series(trajectory, ground_truth, embedder);
    result.series.gain = mig_series(result.series.relevance);
    result.series.penalty = penalty_series(
        result.series.gain, observation_texts(trajectory), embedder,
        config.alpha);
    const double reward =
        complexity_reward(trajectory.length(), config.gamma);
    const double cost = trajectory_cost(trajectory.steps,
                                        result.series.penalty,
                                        config.cost_table);
    result.efficiency = std::min(1.0, reward / cost);
    return result;
}

double evidence_grounding(const std::vector<Claim>& claims,
                          EntailmentProvider& entailer, double nli_floor,
                          std::vector<std::string>* warnings) {
    if (claims.empty()) {
        if (warnings)
            warnings->push_back("vacuous grounding: no claims to verify");
        return 1.0;
    }
    // Geometric mean in log space; the floor keeps a zero-probability claim
    // severe but finite.
    double log_sum = 0.0;
    for (const Claim& claim : claims) {
        const double p = entailer.entail(claim.text, claim.evidence);
        log_sum += std::log(std::max(nli_floor, p));
    }
    return std::exp(log_sum / static_cast<double>(claims.size()));
}

std::vector<int> recovery_latencies(std::span<const Step> steps,
                                    std::span<const double> gain,
                                    const RecoveryCap& cap) {
    std::vector<int> latencies;
    const int length = static_cast<int>(steps.size());
    for (int t = 1; t <= length; ++t) {
        if (!steps[t - 1].is_trap_hit) continue;
        int latency = 0;
        for (int k = t + 1; k <= length; ++k) {
            if (gain[k - 1] > 0.0) {
                latency = k - t;
                break;
            }
        }
        latencies.push_back(latency > 0 ? latency : cap.resolve(t, length));
    }
    return latencies;
}

double reasoning_robustness(std::span<const int> latencies,
                            double lambda_decay,
                            std::vector<std::string>* warnings) {
    if (latencies.empty()) {
        if (warnings) warnings->push_back("no traps encountered");
        return 1.0;
    }
    double sum = 0.0;
    for (int d : latencies) sum += static_cast<double>(d);
    const double mean = sum / static_cast<double>(latencies.size());
    return std::exp(-lambda_decay * mean);
}

double cognitive_quality(double grounding, double robustness, double beta) {
    return beta * grounding + (1.0 - beta) * robustness;
}

double trajectory_utility(bool correct, double efficiency, double cognitive,
                          double omega_e, double omega_c) {
    if (!correct) return 0.0;
    return std::exp(omega_e * std::log(efficiency) +
                    omega_c * std::log(cognitive));
}

TraceScores score_trajectory(const Task& task, const Trajectory& trajectory,
                             const ProviderSuite& providers,
                             const TraceConfig& config) {
    if (trajectory.task_id != task.id) {
        throw std::invalid_argument("trajectory references task `" +
                                    trajectory.task_id + "` but task is `" +
                                    task.id + "`");
    }
    TraceScores scores;

    std::optional<bool> correct;
    try {
        correct = providers.judge->judge(trajectory.final_answer,
                                         task.ground_truth_answer);
    } catch (const ProviderUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        scores.warnings.push_back(std::string("judge failed: ") + e.what());
    }
    scores.correct = correct.value_or(false);

    try {
        EfficiencyResult eff = process_efficiency(
            trajectory, task.ground_truth_answer, *providers.embedding,
            config);
        scores.efficiency = eff.efficiency;
        scores.relevance_series = std::move(eff.series.relevance);
        scores.gain_series = std::move(eff.series.gain);
        scores.penalty_series = std::move(eff.series.penalty);
    } catch (const ProviderUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        scores.warnings.push_back(std::string("efficiency failed: ") + e.what());
    }

    try {
        scores.grounding =
            evidence_grounding(trajectory.claims, *providers.entailment,
                               config.nli_floor, &scores.warnings);
    } catch (const ProviderUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        scores.warnings.push_back(std::string("grounding failed: ") + e.what());
    }

    if (!scores.gain_series.empty()) {
        const std::vector<int> latencies = recovery_latencies(
            trajectory.steps, scores.gain_series, config.recovery_cap);
        scores.robustness = reasoning_robustness(latencies, config.lambda_decay,
                                                 &scores.warnings);
    } else {
        scores.warnings.push_back(
            "robustness skipped: gain series unavailable");
    }

    if (scores.grounding && scores.robustness) {
        scores.cognitive_quality =
            cognitive_quality(*scores.grounding, *scores.robustness,
                              config.beta);
    }

    if (correct && !*correct) {
        scores.utility = 0.0;  // the indicator annihilates utility
    } else if (correct && scores.efficiency && scores.cognitive_quality) {
        scores.utility =
            trajectory_utility(true, *scores.efficiency,
                               *scores.cognitive_quality, config.omega_e,
                               config.omega_c);
    } else {
        scores.warnings.push_back(
            "utility skipped: missing correctness or component metrics");
    }
    return scores;
}

}  // namespace trace::metrics
