#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracle.hpp"
#include "trace/io.hpp"
#include "trace/metrics.hpp"
#include "trace/simharness.hpp"

using namespace trace;
using namespace trace::sim;

namespace {

const TraceConfig kConfig;

TraceScores score_with_stubs(const Task& task, const Trajectory& trajectory) {
    return metrics::score_trajectory(task, trajectory, ProviderSuite::stubs(),
                                     kConfig);
}

}  // namespace

TEST_CASE("generation is a pure function of the seed") {
    const GenParams params{4, 2, 3};
    const SynTask a = generate_task(123, params);
    const SynTask b = generate_task(123, params);
    CHECK(task_to_json(a.task) == task_to_json(b.task));
    CHECK(a.corpus.documents == b.corpus.documents);
    const SynTask c = generate_task(124, params);
    CHECK(c.task.id != a.task.id);
    CHECK(c.task.ground_truth_answer != a.task.ground_truth_answer);
}

TEST_CASE("a depth-1 task is minimal: one content step plus finish") {
    const SynTask syn = generate_task(44, GenParams{1, 0, 0});
    REQUIRE(syn.task.has_oracle());
    CHECK(syn.task.oracle_trajectory->length() == 2);
    CHECK(syn.task.complexity == 1.0);
    CHECK_THROWS_AS(generate_task(44, GenParams{0, 0, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_task(44, GenParams{2, -1, 0}),
                    std::invalid_argument);
}

TEST_CASE("depth controls the gold path, answer, and oracle shape") {
    const SynTask syn = generate_task(5, GenParams{3, 0, 0});
    CHECK(syn.corpus.gold_path.size() == 3);
    CHECK(syn.task.complexity == 3.0);
    CHECK(syn.task.trap_ids.empty());
    REQUIRE(syn.task.has_oracle());
    CHECK(syn.task.oracle_trajectory->length() == 4);  // 3 content + finish
    // Answer accumulates one token per gold document.
    std::stringstream stream(syn.task.ground_truth_answer);
    std::string token;
    int tokens = 0;
    while (stream >> token) ++tokens;
    CHECK(tokens == 3);
    // Gold documents are growing prefixes of the answer.
    for (std::size_t i = 0; i < syn.corpus.gold_path.size(); ++i) {
        const std::string& doc =
            syn.corpus.documents.at(syn.corpus.gold_path[i]);
        CHECK(syn.task.ground_truth_answer.rfind(doc, 0) == 0);
    }
}

TEST_CASE("corpus id classes are disjoint") {
    const SynTask syn = generate_task(9, GenParams{4, 3, 5});
    for (const std::string& id : syn.corpus.gold_path) {
        CHECK_FALSE(syn.corpus.trap_ids.count(id));
        CHECK_FALSE(syn.corpus.distractor_ids.count(id));
    }
    for (const std::string& id : syn.corpus.trap_ids)
        CHECK_FALSE(syn.corpus.distractor_ids.count(id));
    // Task trap ids point into the corpus.
    for (const std::string& id : syn.task.trap_ids)
        CHECK(syn.corpus.documents.count(id));
}

TEST_CASE("task ids round-trip through the id parser") {
    const GenParams params{5, 2, 7};
    const SynTask syn = generate_task(42, params);
    const auto parsed = parse_synth_id(syn.task.id);
    REQUIRE(parsed.has_value());
    CHECK(parsed->seed == 42);
    CHECK(parsed->params.depth == 5);
    CHECK(parsed->params.trap_count == 2);
    CHECK(parsed->params.distractor_count == 7);
    CHECK_FALSE(parse_synth_id("task-1").has_value());
    const SynTask rebuilt = rebuild_task(syn.task.id);
    CHECK(task_to_json(rebuilt.task) == task_to_json(syn.task));
}

TEST_CASE("the oracle policy walks the gold path and answers correctly") {
    const SynTask syn = generate_task(7, GenParams{4, 2, 2});
    const Trajectory t =
        run_policy(ScriptedPolicy{PolicyKind::Oracle, {}}, syn, {}, 1, kConfig);
    CHECK(t.length() == 5);
    CHECK(t.final_answer == syn.task.ground_truth_answer);
    for (const Step& step : t.steps) CHECK_FALSE(step.is_trap_hit);
    const TraceScores scores = score_with_stubs(syn.task, t);
    CHECK(scores.correct);
    CHECK(*scores.robustness == 1.0);
    CHECK(*scores.grounding == 1.0);
    // Every gold step is informative: no penalties anywhere.
    for (double p : scores.penalty_series) CHECK(p == 1.0);
    for (std::size_t i = 0; i + 1 < scores.gain_series.size(); ++i)
        CHECK(scores.gain_series[i] > 0.0);
}

TEST_CASE("policies are deterministic given (task, hint, seed)") {
    const SynTask syn = generate_task(11, GenParams{4, 2, 3});
    for (PolicyKind kind : {PolicyKind::Wanderer, PolicyKind::TrapProne}) {
        const ScriptedPolicy policy{kind, {{"wander_prob", 0.7},
                                           {"trap_prob", 1.0}}};
        const Trajectory a = run_policy(policy, syn, {}, 99, kConfig);
        const Trajectory b = run_policy(policy, syn, {}, 99, kConfig);
        CHECK(trajectory_to_json(a) == trajectory_to_json(b));
        const Trajectory c = run_policy(policy, syn, {}, 100, kConfig);
        CHECK(a.agent_id == c.agent_id);
    }
}

TEST_CASE("trap-prone recovery latencies match the brute-force oracle") {
    const ScriptedPolicy policy{
        PolicyKind::TrapProne, {{"trap_prob", 1.0}, {"dwell", 2.0}}};
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const SynTask syn = generate_task(seed, GenParams{4, 2, 0});
        const Trajectory t = run_policy(policy, syn, {}, seed * 17, kConfig);
        bool any_trap = false;
        for (const Step& step : t.steps) any_trap |= step.is_trap_hit;
        CHECK(any_trap);
        const TraceScores scores = score_with_stubs(syn.task, t);
        const oracle::Scores expected = oracle::score(syn.task, t, kConfig);
        CHECK(*scores.robustness ==
              doctest::Approx(expected.robustness).epsilon(1e-12));
        CHECK(*scores.robustness < 1.0);
        CHECK(*scores.efficiency ==
              doctest::Approx(expected.efficiency).epsilon(1e-12));
        // Dwelling on a trap re-reads the same document: the redundancy
        // penalty must fire at least once at full strength.
        bool saturated = false;
        for (double p : scores.penalty_series)
            if (p == doctest::Approx(1.0 + kConfig.alpha).epsilon(1e-9))
                saturated = true;
        CHECK(saturated);
    }
}

TEST_CASE("hallucinator grounds nothing under stub entailment") {
    const SynTask syn = generate_task(21, GenParams{3, 0, 2});
    const Trajectory t = run_policy(ScriptedPolicy{PolicyKind::Hallucinator, {}},
                                    syn, {}, 4, kConfig);
    CHECK(t.final_answer == syn.task.ground_truth_answer);
    REQUIRE(!t.claims.empty());
    const TraceScores scores = score_with_stubs(syn.task, t);
    CHECK(scores.correct);
    // Every claim bottoms out at the floor.
    CHECK(*scores.grounding ==
          doctest::Approx(kConfig.nli_floor).epsilon(1e-9));
}

TEST_CASE("oracle dominance over the wanderer") {
    const ScriptedPolicy oracle_policy{PolicyKind::Oracle, {}};
    const ScriptedPolicy wanderer{PolicyKind::Wanderer, {{"wander_prob", 0.5}}};
    int wandered_tasks = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SynTask syn = generate_task(mix_seed(400, seed),
                                          GenParams{4, 0, 4});
        const Trajectory base =
            run_policy(oracle_policy, syn, {}, seed, kConfig);
        const Trajectory wandering =
            run_policy(wanderer, syn, {}, seed, kConfig);
        const double oracle_e =
            *score_with_stubs(syn.task, base).efficiency;
        const double wanderer_e =
            *score_with_stubs(syn.task, wandering).efficiency;
        CHECK(oracle_e >= wanderer_e);
        if (wandering.length() > base.length()) {
            ++wandered_tasks;
            CHECK(oracle_e > wanderer_e);
        }
    }
    CHECK(wandered_tasks > 0);
}

TEST_CASE("hint consumption resumes the gold walk") {
    const SynTask syn = generate_task(33, GenParams{4, 0, 0});
    const auto& oracle_steps = syn.task.oracle_trajectory->steps;
    const ScriptedPolicy policy{PolicyKind::Oracle, {}};
    // Half the oracle consumed: two gold steps remain plus finish.
    const std::span<const Step> half(oracle_steps.data(), 2);
    const Trajectory resumed = run_policy(policy, syn, half, 5, kConfig);
    CHECK(resumed.length() == 3);
    CHECK(resumed.steps[0].action.payload == syn.corpus.gold_path[2]);
    // Full oracle consumed: only the finish remains.
    const Trajectory finish_only =
        run_policy(policy, syn, oracle_steps, 5, kConfig);
    CHECK(finish_only.length() == 1);
    CHECK(finish_only.final_answer == syn.task.ground_truth_answer);
    // Oversized hints are rejected.
    std::vector<Step> too_long(oracle_steps.begin(), oracle_steps.end());
    too_long.push_back(oracle_steps.back());
    CHECK_THROWS_AS(run_policy(policy, syn, too_long, 5, kConfig),
                    std::invalid_argument);
}

TEST_CASE("fail_prob makes scripted policies miss deterministically") {
    const ScriptedPolicy flaky{PolicyKind::Oracle, {{"fail_prob", 0.5}}};
    int failures = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const SynTask syn = generate_task(mix_seed(500, seed), GenParams{3, 0, 0});
        const Trajectory t = run_policy(flaky, syn, {}, seed, kConfig);
        if (t.final_answer != syn.task.ground_truth_answer) ++failures;
        const Trajectory again = run_policy(flaky, syn, {}, seed, kConfig);
        CHECK(again.final_answer == t.final_answer);
    }
    CHECK(failures > 5);
    CHECK(failures < 35);
}

TEST_CASE("run_suite yields one trajectory per policy per task") {
    const std::vector<ScriptedPolicy> policies = {
        ScriptedPolicy{PolicyKind::Oracle, {}},
        ScriptedPolicy{PolicyKind::Wanderer, {{"wander_prob", 0.5}}},
    };
    const auto entries = run_suite(policies, 3, 2024, GenParams{3, 1, 2},
                                   kConfig);
    CHECK(entries.size() == 6);
    std::set<std::string> task_ids;
    for (const auto& entry : entries) task_ids.insert(entry.task.id);
    CHECK(task_ids.size() == 3);

    const auto repeat = run_suite(policies, 3, 2024, GenParams{3, 1, 2},
                                  kConfig);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CHECK(trajectory_to_json(entries[i].trajectory) ==
              trajectory_to_json(repeat[i].trajectory));
    }
}

TEST_CASE("policy spec strings parse and round-trip") {
    const ScriptedPolicy p = ScriptedPolicy::parse("Wanderer(wander_prob=0.75)");
    CHECK(p.kind == PolicyKind::Wanderer);
    CHECK(p.param("wander_prob", 0.0) == 0.75);
    CHECK(p.spec_string() == "wanderer(wander_prob=0.75)");
    CHECK(ScriptedPolicy::parse("oracle").spec_string() == "oracle");
    CHECK_THROWS_AS(ScriptedPolicy::parse("teleport"), std::invalid_argument);
    CHECK_THROWS_AS(ScriptedPolicy::parse("oracle(fail_prob)"),
                    std::invalid_argument);
}

TEST_CASE("threshold agent succeeds exactly at its hint fraction") {
    const SynTask syn = generate_task(77, GenParams{9, 0, 0});  // oracle T=10
    ThresholdAgent agent(0.4);
    const auto& oracle_steps = syn.task.oracle_trajectory->steps;
    StubJudge judge;
    for (std::size_t hint_length = 0; hint_length <= 10; ++hint_length) {
        const std::span<const Step> hint(oracle_steps.data(), hint_length);
        const Trajectory t = agent.run(syn.task, hint, 1);
        const bool ok = judge.judge(t.final_answer,
                                    syn.task.ground_truth_answer);
        CHECK(ok == (hint_length >= 4));  // ceil(0.4 * 10)
    }
}

TEST_CASE("policy agent rebuilds the corpus from the task id") {
    const SynTask syn = generate_task(88, GenParams{3, 1, 1});
    PolicyAgent agent(ScriptedPolicy{PolicyKind::Oracle, {}}, kConfig);
    const Trajectory t = agent.run(syn.task, {}, 3);
    CHECK(t.final_answer == syn.task.ground_truth_answer);
    Task foreign;
    foreign.id = "external-1";
    foreign.question = "q";
    foreign.ground_truth_answer = "a";
    CHECK_THROWS_AS(agent.run(foreign, {}, 3), std::invalid_argument);
}
