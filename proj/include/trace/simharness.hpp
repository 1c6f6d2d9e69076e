#pragma once
// Seeded synthetic task generator and scripted agent policies. Tasks carry a
// gold document path whose texts are prefixes of the ground-truth answer,
// near-miss trap documents, and junk distractors; scripted policies walk the
// corpus in characteristic ways so that every metric has a known-direction
// fixture. Generation and policy runs are pure functions of their seeds.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "trace/diagnostics.hpp"
#include "trace/model.hpp"

namespace trace::sim {

// Fixed 64-bit mix used everywhere a seed is derived from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// splitmix64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double next_unit();  // in [0,1)
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
};

struct GenParams {
    int depth = 4;
    int trap_count = 0;
    int distractor_count = 0;
};

struct SyntheticCorpus {
    std::map<std::string, std::string> documents;  // content_id -> text
    std::vector<std::string> gold_path;            // ordered content ids
    std::set<std::string> trap_ids;
    std::set<std::string> distractor_ids;
    // Gold-path position (1-based) after which each trap is plausible.
    std::map<std::string, int> trap_positions;
};

struct SynTask {
    Task task;
    SyntheticCorpus corpus;
    GenParams params;
    std::uint64_t seed = 0;
};

// Deterministic per (seed, params). The task id encodes both so the corpus
// can be rebuilt from the id alone (subprocess agents receive only the task).
SynTask generate_task(std::uint64_t seed, const GenParams& params);

// Reverses the id encoding of generate_task; nullopt for foreign ids.
struct SynthId {
    std::uint64_t seed = 0;
    GenParams params;
};
std::optional<SynthId> parse_synth_id(const std::string& task_id);

// Rebuild a harness task from its id. Throws for non-harness ids.
SynTask rebuild_task(const std::string& task_id);

enum class PolicyKind {
    Oracle,        // walks the gold path, answers correctly
    Wanderer,      // interleaves distractor fetches between gold steps
    TrapProne,     // falls into traps and dwells before recovering
    Hallucinator,  // answers correctly but cites no or wrong evidence
};

struct ScriptedPolicy {
    PolicyKind kind = PolicyKind::Oracle;
    std::map<std::string, double> parameters;

    double param(const std::string& name, double fallback) const;
    // Canonical lowercase form, e.g. "wanderer(wander_prob=0.5)"; used as
    // the agent id of emitted trajectories.
    std::string spec_string() const;
    // Parses "Kind" or "Kind(key=value,...)", case-insensitive kind.
    static ScriptedPolicy parse(const std::string& spec);
};

// One scripted attempt. The hint is consumed as already-executed gold-path
// progress; emitted steps continue from there and are renumbered from 1.
// Throws when the hint is longer than the oracle trajectory.
Trajectory run_policy(const ScriptedPolicy& policy, const SynTask& syn,
                      std::span<const Step> hint, std::uint64_t seed,
                      const TraceConfig& config);

struct SuiteEntry {
    Task task;
    Trajectory trajectory;
};

// n_tasks seeded tasks x one trajectory per policy, in (task, policy) order.
std::vector<SuiteEntry> run_suite(const std::vector<ScriptedPolicy>& policies,
                                  int n_tasks, std::uint64_t seed,
                                  const GenParams& params,
                                  const TraceConfig& config);

// AgentRunner over a scripted policy; rebuilds the harness corpus from the
// task id, so it also works behind the subprocess adapter.
class PolicyAgent final : public AgentRunner {
public:
    PolicyAgent(ScriptedPolicy policy, TraceConfig config)
        : policy_(std::move(policy)), config_(std::move(config)) {}
    Trajectory run(const Task& task, std::span<const Step> hint,
                   std::uint64_t seed) override;
    bool thread_safe() const override { return true; }

private:
    ScriptedPolicy policy_;
    TraceConfig config_;
};

// Succeeds exactly when the hint covers at least `threshold` of the oracle
// trajectory (by step count, rounded up). The scaffolding-protocol fixture.
class ThresholdAgent final : public AgentRunner {
public:
    explicit ThresholdAgent(double threshold) : threshold_(threshold) {}
    Trajectory run(const Task& task, std::span<const Step> hint,
                   std::uint64_t seed) override;
    bool thread_safe() const override { return true; }

private:
    double threshold_;
};

}  // namespace trace::sim
