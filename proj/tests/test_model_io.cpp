#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "trace/io.hpp"

using namespace trace;

namespace {

std::string kTaskLine =
    R"({"id":"t1","question":"who?","ground_truth_answer":"the answer","complexity":2.0,"trap_ids":["x1"]})";

std::string kTrajectoryLine =
    R"({"task_id":"t1","agent_id":"a1","run_id":"r1","steps":[)"
    R"({"index":1,"action":{"kind":"search","payload":"who"},"observation_text":"clue","is_trap_hit":false},)"
    R"({"index":2,"action":{"kind":"fetch","payload":"d1","intrinsic_cost":0.5},"observation_text":"more","observation_content_id":"d1"},)"
    R"({"index":3,"action":{"kind":"finish","payload":"the answer"},"observation_text":"the answer","action_distribution":[0.7,0.3]}],)"
    R"("final_answer":"the answer","claims":[{"text":"a claim","evidence":["clue"]}]})";

Trajectory make_valid_trajectory(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> step_count(1, 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Trajectory t;
    t.task_id = "task-" + std::to_string(rng() % 1000);
    t.agent_id = "agent-" + std::to_string(rng() % 10);
    t.run_id = "run-" + std::to_string(rng());
    const int steps = step_count(rng);
    for (int i = 1; i <= steps; ++i) {
        Step step;
        step.index = i;
        const bool last = i == steps;
        step.action.kind = last ? ActionKind::Finish
                                : (rng() % 2 ? ActionKind::Search
                                             : ActionKind::Reason);
        step.action.payload = "payload " + std::to_string(rng() % 50);
        if (rng() % 2) step.action.intrinsic_cost = 0.1 + unit(rng);
        step.observation_text = "obs " + std::to_string(rng() % 50);
        if (rng() % 3 == 0)
            step.observation_content_id = "c" + std::to_string(rng() % 9);
        step.is_trap_hit = rng() % 5 == 0;
        if (rng() % 2) {
            const double p = 0.1 + 0.8 * unit(rng);
            step.action_distribution = std::vector<double>{p, 1.0 - p};
        }
        t.steps.push_back(std::move(step));
    }
    t.final_answer = "answer " + std::to_string(rng() % 50);
    if (rng() % 2)
        t.claims.push_back(Claim{"claim " + std::to_string(rng() % 50),
                                 {"evidence a", "evidence b"}});
    if (rng() % 3 == 0) t.claims.push_back(Claim{"uncited", {}});
    return t;
}

Task make_valid_task(std::mt19937_64& rng) {
    Task task;
    task.id = "task-" + std::to_string(rng());
    task.question = "q " + std::to_string(rng() % 100);
    task.ground_truth_answer = "answer " + std::to_string(rng() % 50);
    task.complexity = static_cast<double>(rng() % 10);
    task.trap_ids = {"x1", "x2"};
    if (rng() % 2) {
        auto oracle = std::make_shared<Trajectory>(make_valid_trajectory(rng));
        oracle->task_id = task.id;
        oracle->final_answer = task.ground_truth_answer;
        oracle->steps.back().action.payload = task.ground_truth_answer;
        task.oracle_trajectory = std::move(oracle);
    }
    return task;
}

TraceScores make_valid_scores(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TraceScores s;
    s.correct = rng() % 2 == 0;
    s.efficiency = unit(rng);
    s.grounding = unit(rng);
    s.robustness = unit(rng);
    s.cognitive_quality = unit(rng);
    s.utility = s.correct ? std::optional<double>(unit(rng))
                          : std::optional<double>(0.0);
    if (rng() % 2) s.entropy_adaptability = 2.0 * unit(rng) - 1.0;
    const int t = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < t; ++i) {
        s.relevance_series.push_back(2.0 * unit(rng) - 1.0);
        s.gain_series.push_back(unit(rng));
        s.penalty_series.push_back(1.0 + 0.5 * unit(rng));
    }
    s.warnings = {"w1", "w2"};
    return s;
}

}  // namespace

TEST_CASE("one valid task line parses with matching fields") {
    std::istringstream in(kTaskLine);
    const auto parsed = parse_tasks(in);
    REQUIRE(parsed.values.size() == 1);
    const Task& task = parsed.values[0];
    CHECK(task.id == "t1");
    CHECK(task.question == "who?");
    CHECK(task.ground_truth_answer == "the answer");
    CHECK(task.complexity == 2.0);
    CHECK_FALSE(task.has_oracle());
    CHECK(task.trap_ids == std::vector<std::string>{"x1"});
}

TEST_CASE("missing ground_truth_answer is a schema error naming the line") {
    std::istringstream in(
        R"({"id":"t1","question":"q","complexity":1,"trap_ids":[]})");
    CHECK_THROWS_WITH_AS(parse_tasks(in),
                         doctest::Contains("ground_truth_answer"),
                         ValidationError);
    std::istringstream in2(
        "\n" R"({"id":"t1","question":"q","complexity":1,"trap_ids":[]})");
    CHECK_THROWS_WITH_AS(parse_tasks(in2), doctest::Contains("line 2"),
                         ValidationError);
}

TEST_CASE("duplicate task ids are rejected") {
    std::istringstream in(kTaskLine + "\n" + kTaskLine);
    CHECK_THROWS_WITH_AS(parse_tasks(in), doctest::Contains("duplicate"),
                         ValidationError);
}

TEST_CASE("a valid 3-step trajectory parses with T = 3") {
    std::istringstream in(kTrajectoryLine);
    const auto parsed = parse_trajectories(in);
    REQUIRE(parsed.values.size() == 1);
    CHECK(parsed.values[0].length() == 3);
    CHECK(parsed.values[0].steps[1].action.intrinsic_cost == 0.5);
    CHECK(parsed.values[0].steps[2].action.kind == ActionKind::Finish);
}

TEST_CASE("non-contiguous step indices are rejected") {
    std::string line = kTrajectoryLine;
    const auto pos = line.find(R"("index":2)");
    line.replace(pos, 9, R"("index":3)");
    std::istringstream in(line);
    CHECK_THROWS_WITH_AS(parse_trajectories(in), doctest::Contains("contiguous"),
                         ValidationError);
}

TEST_CASE("an action distribution that does not sum to 1 is rejected") {
    std::string line = kTrajectoryLine;
    const auto pos = line.find("[0.7,0.3]");
    line.replace(pos, 9, "[0.6,0.5]");
    std::istringstream in(line);
    CHECK_THROWS_WITH_AS(parse_trajectories(in),
                         doctest::Contains("action_distribution"),
                         ValidationError);
}

TEST_CASE("finish must be last and only last") {
    std::string line = kTrajectoryLine;
    const auto pos = line.find(R"("kind":"search")");
    std::string early_finish = line;
    early_finish.replace(pos, 15, R"("kind":"finish")");
    std::istringstream in(early_finish);
    CHECK_THROWS_AS(parse_trajectories(in), ValidationError);
}

TEST_CASE("unknown fields reject in strict mode and warn in lenient mode") {
    std::string line = kTaskLine;
    line.insert(line.size() - 1, R"(,"surprise":1)");
    {
        std::istringstream in(line);
        CHECK_THROWS_WITH_AS(parse_tasks(in), doctest::Contains("surprise"),
                             ValidationError);
    }
    {
        std::istringstream in(line);
        const auto parsed = parse_tasks(in, ParseOptions{.lenient = true});
        CHECK(parsed.values.size() == 1);
        REQUIRE(parsed.warnings.size() == 1);
        CHECK(parsed.warnings[0].find("surprise") != std::string::npos);
    }
}

TEST_CASE("duplicate trajectory identity is rejected") {
    std::istringstream in(kTrajectoryLine + "\n" + kTrajectoryLine);
    CHECK_THROWS_WITH_AS(parse_trajectories(in), doctest::Contains("duplicate"),
                         ValidationError);
}

TEST_CASE("task round-trip is exact over generated values") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const Task task = make_valid_task(rng);
        std::stringstream buffer;
        write_tasks(buffer, {task});
        const auto parsed = parse_tasks(buffer);
        REQUIRE(parsed.values.size() == 1);
        const Task& back = parsed.values[0];
        CHECK(back.id == task.id);
        CHECK(back.question == task.question);
        CHECK(back.ground_truth_answer == task.ground_truth_answer);
        CHECK(back.complexity == task.complexity);
        CHECK(back.trap_ids == task.trap_ids);
        CHECK(back.has_oracle() == task.has_oracle());
        if (task.has_oracle()) {
            CHECK(trajectory_to_json(*back.oracle_trajectory) ==
                  trajectory_to_json(*task.oracle_trajectory));
        }
    }
}

TEST_CASE("trajectory round-trip is exact over generated values") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 200; ++i) {
        const Trajectory t = make_valid_trajectory(rng);
        std::stringstream buffer;
        write_trajectories(buffer, {t});
        const auto parsed = parse_trajectories(buffer);
        REQUIRE(parsed.values.size() == 1);
        CHECK(trajectory_to_json(parsed.values[0]) == trajectory_to_json(t));
    }
}

TEST_CASE("score record round-trip is bit-exact over generated values") {
    std::mt19937_64 rng(4096);
    for (int i = 0; i < 200; ++i) {
        ScoreRecord record{"t" + std::to_string(i), "a", "r",
                           make_valid_scores(rng)};
        std::stringstream buffer;
        write_score_records(buffer, {record});
        const auto parsed = parse_score_records(buffer);
        REQUIRE(parsed.values.size() == 1);
        CHECK(parsed.values[0] == record);
    }
}

TEST_CASE("score serialization keeps enough digits for exact reparse") {
    TraceScores s;
    s.correct = true;
    s.utility = 0.12345678912345678;  // needs > 9 significant digits
    s.efficiency = 1.0 / 3.0;
    const ordered_json j = scores_to_json(s);
    const TraceScores back = scores_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.utility == s.utility);
    CHECK(back.efficiency == s.efficiency);
}

TEST_CASE("warnings survive serialization in order") {
    TraceScores s;
    s.correct = true;
    s.utility = 0.5;
    s.warnings = {"first", "second", "third"};
    const TraceScores back =
        scores_from_json(nlohmann::json::parse(scores_to_json(s).dump()));
    CHECK(back.warnings == s.warnings);
}

TEST_CASE("utility must be zero on incorrect records") {
    std::string line =
        R"({"task_id":"t","agent_id":"a","run_id":"r","correct":false,)"
        R"("efficiency":0.5,"grounding":null,"robustness":null,)"
        R"("cognitive_quality":null,"utility":0.5,"entropy_adaptability":null,)"
        R"("relevance_series":[],"gain_series":[],"penalty_series":[],)"
        R"("warnings":[]})";
    std::istringstream in(line);
    CHECK_THROWS_WITH_AS(parse_score_records(in),
                         doctest::Contains("utility"), ValidationError);
}

TEST_CASE("oracle trajectory must end in the ground-truth answer") {
    std::string line =
        R"({"id":"t1","question":"q","ground_truth_answer":"right","complexity":1,)"
        R"("oracle_trajectory":{"steps":[{"index":1,"action":{"kind":"finish","payload":"wrong"},)"
        R"("observation_text":"wrong"}],"final_answer":"wrong","claims":[]},"trap_ids":[]})";
    std::istringstream in(line);
    CHECK_THROWS_WITH_AS(parse_tasks(in),
                         doctest::Contains("does not match ground truth"),
                         ValidationError);
}
