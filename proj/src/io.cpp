#include "trace/io.hpp"

#include <set>
#include <unordered_set>

namespace trace {

namespace {

using json = nlohmann::json;

struct FieldContext {
    int line = 0;
    std::vector<std::string>* warnings = nullptr;
    bool lenient = false;

    [[noreturn]] void fail(const std::string& message) const {
        throw ValidationError("line " + std::to_string(line) + ": " + message);
    }

    void check_known_fields(const json& obj, const char* what,
                            std::initializer_list<const char*> allowed) const {
        for (const auto& [key, value] : obj.items()) {
            bool known = false;
            for (const char* name : allowed) {
                if (key == name) {
                    known = true;
                    break;
                }
            }
            if (known) continue;
            if (!lenient)
                fail(std::string("unknown field `") + key + "` in " + what);
            if (warnings)
                warnings->push_back("line " + std::to_string(line) +
                                    ": ignoring unknown field `" + key +
                                    "` in " + what);
        }
    }

    const json& require(const json& obj, const char* field) const {
        auto it = obj.find(field);
        if (it == obj.end())
            fail(std::string("missing field `") + field + "`");
        return *it;
    }

    std::string require_string(const json& obj, const char* field) const {
        const json& v = require(obj, field);
        if (!v.is_string())
            fail(std::string("field `") + field + "` must be a string");
        return v.get<std::string>();
    }

    double require_number(const json& obj, const char* field) const {
        const json& v = require(obj, field);
        if (!v.is_number())
            fail(std::string("field `") + field + "` must be a number");
        return v.get<double>();
    }
};

Action parse_action(const json& j, const FieldContext& ctx) {
    if (!j.is_object()) ctx.fail("field `action` must be an object");
    ctx.check_known_fields(j, "action", {"kind", "payload", "intrinsic_cost"});
    Action action;
    const std::string kind = ctx.require_string(j, "kind");
    const auto parsed = action_kind_from_string(kind);
    if (!parsed)
        ctx.fail("field `kind` has unknown action kind `" + kind + "`");
    action.kind = *parsed;
    action.payload = ctx.require_string(j, "payload");
    if (auto it = j.find("intrinsic_cost"); it != j.end()) {
        if (!it->is_number()) ctx.fail("field `intrinsic_cost` must be a number");
        action.intrinsic_cost = it->get<double>();
    }
    return action;
}

Step parse_step(const json& j, const FieldContext& ctx) {
    if (!j.is_object()) ctx.fail("each step must be an object");
    ctx.check_known_fields(j, "step",
                           {"index", "action", "observation_text",
                            "observation_content_id", "is_trap_hit",
                            "action_distribution"});
    Step step;
    const json& index = ctx.require(j, "index");
    if (!index.is_number_integer()) ctx.fail("field `index` must be an integer");
    step.index = index.get<int>();
    step.action = parse_action(ctx.require(j, "action"), ctx);
    step.observation_text = ctx.require_string(j, "observation_text");
    if (auto it = j.find("observation_content_id"); it != j.end()) {
        if (!it->is_string())
            ctx.fail("field `observation_content_id` must be a string");
        step.observation_content_id = it->get<std::string>();
    }
    if (auto it = j.find("is_trap_hit"); it != j.end()) {
        if (!it->is_boolean()) ctx.fail("field `is_trap_hit` must be a boolean");
        step.is_trap_hit = it->get<bool>();
    }
    if (auto it = j.find("action_distribution"); it != j.end()) {
        if (!it->is_array())
            ctx.fail("field `action_distribution` must be an array");
        std::vector<double> dist;
        for (const json& p : *it) {
            if (!p.is_number())
                ctx.fail("field `action_distribution` must contain numbers");
            dist.push_back(p.get<double>());
        }
        step.action_distribution = std::move(dist);
    }
    return step;
}

Claim parse_claim(const json& j, const FieldContext& ctx) {
    if (!j.is_object()) ctx.fail("each claim must be an object");
    ctx.check_known_fields(j, "claim", {"text", "evidence"});
    Claim claim;
    claim.text = ctx.require_string(j, "text");
    const json& evidence = ctx.require(j, "evidence");
    if (!evidence.is_array()) ctx.fail("field `evidence` must be an array");
    for (const json& e : evidence) {
        if (!e.is_string()) ctx.fail("field `evidence` must contain strings");
        claim.evidence.push_back(e.get<std::string>());
    }
    return claim;
}

// `embedded_in_task` relaxes the identity triple: a task-embedded oracle may
// omit it and inherits the surrounding task's id.
Trajectory parse_trajectory_object(const json& j, const FieldContext& ctx,
                                   bool embedded_in_task,
                                   const std::string& default_task_id) {
    if (!j.is_object()) ctx.fail("trajectory record must be an object");
    ctx.check_known_fields(j, "trajectory",
                           {"task_id", "agent_id", "run_id", "steps",
                            "final_answer", "claims"});
    Trajectory trajectory;
    if (embedded_in_task) {
        trajectory.task_id = j.value("task_id", default_task_id);
        trajectory.agent_id = j.value("agent_id", std::string("oracle"));
        trajectory.run_id = j.value("run_id", std::string("oracle"));
    } else {
        trajectory.task_id = ctx.require_string(j, "task_id");
        trajectory.agent_id = ctx.require_string(j, "agent_id");
        trajectory.run_id = ctx.require_string(j, "run_id");
    }
    const json& steps = ctx.require(j, "steps");
    if (!steps.is_array()) ctx.fail("field `steps` must be an array");
    for (const json& s : steps) trajectory.steps.push_back(parse_step(s, ctx));
    trajectory.final_answer = ctx.require_string(j, "final_answer");
    const json& claims = ctx.require(j, "claims");
    if (!claims.is_array()) ctx.fail("field `claims` must be an array");
    for (const json& c : claims)
        trajectory.claims.push_back(parse_claim(c, ctx));
    try {
        validate_trajectory(trajectory);
    } catch (const ValidationError& e) {
        ctx.fail(e.what());
    }
    return trajectory;
}

Task parse_task_object(const json& j, const FieldContext& ctx) {
    if (!j.is_object()) ctx.fail("task record must be an object");
    ctx.check_known_fields(j, "task",
                           {"id", "question", "ground_truth_answer",
                            "complexity", "oracle_trajectory", "trap_ids"});
    Task task;
    task.id = ctx.require_string(j, "id");
    task.question = ctx.require_string(j, "question");
    task.ground_truth_answer = ctx.require_string(j, "ground_truth_answer");
    task.complexity = ctx.require_number(j, "complexity");
    if (auto it = j.find("oracle_trajectory"); it != j.end() && !it->is_null()) {
        task.oracle_trajectory = std::make_shared<const Trajectory>(
            parse_trajectory_object(*it, ctx, /*embedded_in_task=*/true,
                                    task.id));
    }
    const json& traps = ctx.require(j, "trap_ids");
    if (!traps.is_array()) ctx.fail("field `trap_ids` must be an array");
    for (const json& t : traps) {
        if (!t.is_string()) ctx.fail("field `trap_ids` must contain strings");
        task.trap_ids.push_back(t.get<std::string>());
    }
    try {
        validate_task(task);
    } catch (const ValidationError& e) {
        ctx.fail(e.what());
    }
    return task;
}

std::optional<double> optional_number(const json& j, const char* field,
                                      const FieldContext& ctx) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number())
        ctx.fail(std::string("field `") + field + "` must be a number or null");
    return it->get<double>();
}

std::vector<double> number_array(const json& j, const char* field,
                                 const FieldContext& ctx) {
    std::vector<double> out;
    auto it = j.find(field);
    if (it == j.end()) ctx.fail(std::string("missing field `") + field + "`");
    if (!it->is_array())
        ctx.fail(std::string("field `") + field + "` must be an array");
    for (const json& v : *it) {
        if (!v.is_number())
            ctx.fail(std::string("field `") + field + "` must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

constexpr std::initializer_list<const char*> kScoresFields = {
    "correct",           "efficiency",          "grounding",
    "robustness",        "cognitive_quality",   "utility",
    "entropy_adaptability", "relevance_series", "gain_series",
    "penalty_series",    "warnings"};

TraceScores parse_scores_object(const json& j, const FieldContext& ctx) {
    if (!j.is_object()) ctx.fail("scores record must be an object");
    TraceScores scores;
    const json& correct = ctx.require(j, "correct");
    if (!correct.is_boolean()) ctx.fail("field `correct` must be a boolean");
    scores.correct = correct.get<bool>();
    scores.efficiency = optional_number(j, "efficiency", ctx);
    scores.grounding = optional_number(j, "grounding", ctx);
    scores.robustness = optional_number(j, "robustness", ctx);
    scores.cognitive_quality = optional_number(j, "cognitive_quality", ctx);
    scores.utility = optional_number(j, "utility", ctx);
    scores.entropy_adaptability = optional_number(j, "entropy_adaptability", ctx);
    scores.relevance_series = number_array(j, "relevance_series", ctx);
    scores.gain_series = number_array(j, "gain_series", ctx);
    scores.penalty_series = number_array(j, "penalty_series", ctx);
    const json& warnings = ctx.require(j, "warnings");
    if (!warnings.is_array()) ctx.fail("field `warnings` must be an array");
    for (const json& w : warnings) {
        if (!w.is_string()) ctx.fail("field `warnings` must contain strings");
        scores.warnings.push_back(w.get<std::string>());
    }
    if (!scores.correct && scores.utility && *scores.utility != 0.0)
        ctx.fail("utility must be 0 when correct is false");
    const std::size_t t = scores.relevance_series.size();
    if ((scores.gain_series.size() != t && !scores.gain_series.empty()) ||
        (scores.penalty_series.size() != t && !scores.penalty_series.empty()))
        ctx.fail("metric series must have equal lengths");
    return scores;
}

json parse_line(const std::string& line, const FieldContext& ctx) {
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) ctx.fail("not valid JSON");
    return parsed;
}

template <typename T, typename Fn>
Parsed<T> parse_stream(std::istream& in, const ParseOptions& options,
                       Fn&& parse_record) {
    Parsed<T> result;
    FieldContext ctx;
    ctx.warnings = &result.warnings;
    ctx.lenient = options.lenient;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ctx.line = line_number;
        result.values.push_back(parse_record(parse_line(line, ctx), ctx));
    }
    return result;
}

}  // namespace

Parsed<Task> parse_tasks(std::istream& in, const ParseOptions& options) {
    auto result = parse_stream<Task>(
        in, options,
        [](const json& j, const FieldContext& ctx) {
            return parse_task_object(j, ctx);
        });
    std::unordered_set<std::string> ids;
    for (const Task& task : result.values) {
        if (!ids.insert(task.id).second)
            throw ValidationError("duplicate task id `" + task.id + "`");
    }
    return result;
}

Parsed<Trajectory> parse_trajectories(std::istream& in,
                                      const ParseOptions& options) {
    auto result = parse_stream<Trajectory>(
        in, options,
        [](const json& j, const FieldContext& ctx) {
            return parse_trajectory_object(j, ctx, false, {});
        });
    std::set<std::tuple<std::string, std::string, std::string>> keys;
    for (const Trajectory& t : result.values) {
        if (!keys.insert({t.task_id, t.agent_id, t.run_id}).second)
            throw ValidationError("duplicate trajectory (" + t.task_id + ", " +
                                  t.agent_id + ", " + t.run_id + ")");
    }
    return result;
}

Parsed<ScoreRecord> parse_score_records(std::istream& in,
                                        const ParseOptions& options) {
    return parse_stream<ScoreRecord>(
        in, options, [](const json& j, const FieldContext& ctx) {
            if (!j.is_object()) ctx.fail("scores record must be an object");
            std::vector<const char*> allowed = {"task_id", "agent_id", "run_id"};
            allowed.insert(allowed.end(), kScoresFields.begin(),
                           kScoresFields.end());
            for (const auto& [key, value] : j.items()) {
                bool known = false;
                for (const char* name : allowed) {
                    if (key == name) { known = true; break; }
                }
                if (known) continue;
                if (!ctx.lenient)
                    ctx.fail("unknown field `" + key + "` in score record");
                if (ctx.warnings)
                    ctx.warnings->push_back(
                        "line " + std::to_string(ctx.line) +
                        ": ignoring unknown field `" + key +
                        "` in score record");
            }
            ScoreRecord record;
            record.task_id = ctx.require_string(j, "task_id");
            record.agent_id = ctx.require_string(j, "agent_id");
            record.run_id = ctx.require_string(j, "run_id");
            record.scores = parse_scores_object(j, ctx);
            return record;
        });
}

namespace {

ordered_json action_to_json(const Action& action) {
    ordered_json j;
    j["kind"] = to_string(action.kind);
    j["payload"] = action.payload;
    if (action.intrinsic_cost) j["intrinsic_cost"] = *action.intrinsic_cost;
    return j;
}

ordered_json step_to_json(const Step& step) {
    ordered_json j;
    j["index"] = step.index;
    j["action"] = action_to_json(step.action);
    j["observation_text"] = step.observation_text;
    if (step.observation_content_id)
        j["observation_content_id"] = *step.observation_content_id;
    j["is_trap_hit"] = step.is_trap_hit;
    if (step.action_distribution)
        j["action_distribution"] = *step.action_distribution;
    return j;
}

ordered_json claim_to_json(const Claim& claim) {
    ordered_json j;
    j["text"] = claim.text;
    j["evidence"] = claim.evidence;
    return j;
}

void set_optional(ordered_json& j, const char* field,
                  const std::optional<double>& value) {
    if (value)
        j[field] = *value;
    else
        j[field] = nullptr;
}

}  // namespace

ordered_json trajectory_to_json(const Trajectory& trajectory) {
    ordered_json j;
    j["task_id"] = trajectory.task_id;
    j["agent_id"] = trajectory.agent_id;
    j["run_id"] = trajectory.run_id;
    j["steps"] = ordered_json::array();
    for (const Step& step : trajectory.steps)
        j["steps"].push_back(step_to_json(step));
    j["final_answer"] = trajectory.final_answer;
    j["claims"] = ordered_json::array();
    for (const Claim& claim : trajectory.claims)
        j["claims"].push_back(claim_to_json(claim));
    return j;
}

ordered_json task_to_json(const Task& task) {
    ordered_json j;
    j["id"] = task.id;
    j["question"] = task.question;
    j["ground_truth_answer"] = task.ground_truth_answer;
    j["complexity"] = task.complexity;
    if (task.oracle_trajectory)
        j["oracle_trajectory"] = trajectory_to_json(*task.oracle_trajectory);
    j["trap_ids"] = task.trap_ids;
    return j;
}

ordered_json scores_to_json(const TraceScores& scores) {
    ordered_json j;
    j["correct"] = scores.correct;
    set_optional(j, "efficiency", scores.efficiency);
    set_optional(j, "grounding", scores.grounding);
    set_optional(j, "robustness", scores.robustness);
    set_optional(j, "cognitive_quality", scores.cognitive_quality);
    set_optional(j, "utility", scores.utility);
    set_optional(j, "entropy_adaptability", scores.entropy_adaptability);
    j["relevance_series"] = scores.relevance_series;
    j["gain_series"] = scores.gain_series;
    j["penalty_series"] = scores.penalty_series;
    j["warnings"] = scores.warnings;
    return j;
}

ordered_json score_record_to_json(const ScoreRecord& record) {
    ordered_json j;
    j["task_id"] = record.task_id;
    j["agent_id"] = record.agent_id;
    j["run_id"] = record.run_id;
    ordered_json scores = scores_to_json(record.scores);
    for (auto& [key, value] : scores.items()) j[key] = std::move(value);
    return j;
}

TraceScores scores_from_json(const nlohmann::json& j,
                             std::vector<std::string>* warnings,
                             bool lenient) {
    FieldContext ctx;
    ctx.line = 0;
    ctx.warnings = warnings;
    ctx.lenient = lenient;
    if (j.is_object()) ctx.check_known_fields(j, "scores", kScoresFields);
    return parse_scores_object(j, ctx);
}

Task task_from_json(const nlohmann::json& j, std::vector<std::string>* warnings,
                    bool lenient) {
    FieldContext ctx;
    ctx.line = 0;
    ctx.warnings = warnings;
    ctx.lenient = lenient;
    return parse_task_object(j, ctx);
}

Trajectory trajectory_from_json(const nlohmann::json& j,
                                std::vector<std::string>* warnings,
                                bool lenient) {
    FieldContext ctx;
    ctx.line = 0;
    ctx.warnings = warnings;
    ctx.lenient = lenient;
    return parse_trajectory_object(j, ctx, false, {});
}

std::vector<Step> steps_from_json(const nlohmann::json& j,
                                  std::vector<std::string>* warnings,
                                  bool lenient) {
    FieldContext ctx;
    ctx.line = 0;
    ctx.warnings = warnings;
    ctx.lenient = lenient;
    if (!j.is_array()) ctx.fail("steps must be an array");
    std::vector<Step> steps;
    for (const nlohmann::json& s : j) steps.push_back(parse_step(s, ctx));
    return steps;
}

void write_tasks(std::ostream& out, const std::vector<Task>& tasks) {
    for (const Task& task : tasks) out << task_to_json(task).dump() << '\n';
}

void write_trajectories(std::ostream& out,
                        const std::vector<Trajectory>& trajectories) {
    for (const Trajectory& t : trajectories)
        out << trajectory_to_json(t).dump() << '\n';
}

void write_score_records(std::ostream& out,
                         const std::vector<ScoreRecord>& records) {
    for (const ScoreRecord& r : records)
        out << score_record_to_json(r).dump() << '\n';
}

}  // namespace trace
