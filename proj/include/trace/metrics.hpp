#pragma once
// Per-trajectory metric suite: relevance/gain/penalty series, process
// efficiency, evidence grounding, reasoning robustness, cognitive quality,
// and the trajectory utility that combines them. All functions are pure
// given provider results.

#include <span>
#include <string>
#include <vector>

#include "trace/model.hpp"
#include "trace/providers.hpp"

namespace trace::metrics {

// Per-step series computed once and reused across metrics.
struct SeriesBundle {
    std::vector<double> relevance;  // r_t = cos(Φ(o_t), Φ(A_gt)), in [-1,1]
    std::vector<double> gain;       // g_t >= 0
    std::vector<double> penalty;    // p_t in [1, 1+alpha]
};

// r_t per observation against the ground-truth answer embedding.
std::vector<double> relevance_series(const Trajectory& trajectory,
                                     const std::string& ground_truth,
                                     EmbeddingProvider& embedder);

// Marginal gain over the running relevance maximum. The empty-prefix
// supremum is 0, so negative relevance never produces gain.
std::vector<double> mig_series(std::span<const double> relevance);

// Redundant-exploration penalty at 1-based step t. Unity at t = 1 and
// whenever either of g_t, g_{t-1} is positive; otherwise scaled by the
// cosine of the two observations, clamped to [0,1] so a negative cosine
// cannot turn the penalty into a discount.
double redundancy_penalty(std::size_t t, std::span<const double> gain,
                          const std::vector<std::string>& observations,
                          EmbeddingProvider& embedder, double alpha);

std::vector<double> penalty_series(std::span<const double> gain,
                                   const std::vector<std::string>& observations,
                                   EmbeddingProvider& embedder, double alpha);

// J = 1 + ln(max(1, Σ_t C(a_t)·p_t)); the clamp keeps J >= 1 in the log
// regime even for sub-unit raw costs.
double trajectory_cost(std::span<const Step> steps,
                       std::span<const double> penalties,
                       const CostTable& cost_table);

// R_C = 1 + gamma·ln(T).
double complexity_reward(std::size_t trajectory_length, double gamma);

struct EfficiencyResult {
    double efficiency = 0.0;  // min(1, R_C / J), in (0,1]
    SeriesBundle series;
};

EfficiencyResult process_efficiency(const Trajectory& trajectory,
                                    const std::string& ground_truth,
                                    EmbeddingProvider& embedder,
                                    const TraceConfig& config);

// Geometric mean of per-claim entailment probabilities, each floored at
// nli_floor. An empty claim set is vacuously grounded (1.0 + warning).
double evidence_grounding(const std::vector<Claim>& claims,
                          EntailmentProvider& entailer, double nli_floor,
                          std::vector<std::string>* warnings);

// Steps-to-first-positive-gain for every trap step; unrecovered traps are
// capped (default: remaining steps, floored at 1).
std::vector<int> recovery_latencies(std::span<const Step> steps,
                                    std::span<const double> gain,
                                    const RecoveryCap& cap);

// exp(-lambda · mean latency); vacuously 1.0 when no trap was encountered.
double reasoning_robustness(std::span<const int> latencies,
                            double lambda_decay,
                            std::vector<std::string>* warnings);

// C = beta·G_E + (1-beta)·R_R.
double cognitive_quality(double grounding, double robustness, double beta);

// U = 1(correct) · exp(omega_e·ln E + omega_c·ln C).
double trajectory_utility(bool correct, double efficiency, double cognitive,
                          double omega_e, double omega_c);

// Full composition. Provider failures null the affected metric with a
// warning instead of aborting; a trajectory/task id mismatch throws.
TraceScores score_trajectory(const Task& task, const Trajectory& trajectory,
                             const ProviderSuite& providers,
                             const TraceConfig& config);

}  // namespace trace::metrics
