#pragma once
// Line-delimited JSON serialization for tasks, trajectories, and score
// records. Every invariant is checked at parse time; nothing invalid is
// constructible downstream. Unknown fields are rejected in strict mode and
// collected as warnings in lenient mode.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trace/model.hpp"

namespace trace {

using ordered_json = nlohmann::ordered_json;

struct ParseOptions {
    bool lenient = false;  // ignore unknown fields with a warning
};

template <typename T>
struct Parsed {
    std::vector<T> values;
    std::vector<std::string> warnings;
};

Parsed<Task> parse_tasks(std::istream& in, const ParseOptions& options = {});
Parsed<Trajectory> parse_trajectories(std::istream& in,
                                      const ParseOptions& options = {});
Parsed<ScoreRecord> parse_score_records(std::istream& in,
                                        const ParseOptions& options = {});

// Single-record JSON forms. Serialization emits keys in schema order and
// doubles in shortest round-trip form, so serialize → parse is bit-exact.
ordered_json task_to_json(const Task& task);
ordered_json trajectory_to_json(const Trajectory& trajectory);
ordered_json scores_to_json(const TraceScores& scores);
ordered_json score_record_to_json(const ScoreRecord& record);

TraceScores scores_from_json(const nlohmann::json& j,
                             std::vector<std::string>* warnings = nullptr,
                             bool lenient = false);
Task task_from_json(const nlohmann::json& j,
                    std::vector<std::string>* warnings = nullptr,
                    bool lenient = false);
Trajectory trajectory_from_json(const nlohmann::json& j,
                                std::vector<std::string>* warnings = nullptr,
                                bool lenient = false);
// Steps array (e.g. the hint_steps of an agent request).
std::vector<Step> steps_from_json(const nlohmann::json& j,
                                  std::vector<std::string>* warnings = nullptr,
                                  bool lenient = false);

void write_tasks(std::ostream& out, const std::vector<Task>& tasks);
void write_trajectories(std::ostream& out,
                        const std::vector<Trajectory>& trajectories);
void write_score_records(std::ostream& out,
                         const std::vector<ScoreRecord>& records);

}  // namespace trace
