#include "trace/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace trace::reporting {

namespace {

class MeanAccumulator {
public:
    void add(const std::optional<double>& value) {
        if (!value) return;
        sum_ += *value;
        ++count_;
    }
    std::optional<double> mean() const {
        if (count_ == 0) return std::nullopt;
        return sum_ / static_cast<double>(count_);
    }

private:
    double sum_ = 0.0;
    int count_ = 0;
};

std::string fixed4(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

std::string cell(const std::optional<double>& value) {
    return value ? fixed4(*value) : std::string();
}

}  // namespace

AgentSummary aggregate(const std::string& agent_id,
                       std::vector<TaskScore> scores,
                       const std::optional<AgentDiagnostics>& diagnostics) {
    if (scores.empty())
        throw std::invalid_argument("aggregate: no scores for agent " +
                                    agent_id);
    // Canonical order makes floating-point accumulation permutation-proof.
    std::sort(scores.begin(), scores.end(),
              [](const TaskScore& a, const TaskScore& b) {
                  return a.task_id < b.task_id;
              });
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].task_id == scores[i - 1].task_id)
            throw std::invalid_argument("aggregate: duplicate task id `" +
                                        scores[i].task_id + "` for agent " +
                                        agent_id);
    }

    AgentSummary summary;
    summary.agent_id = agent_id;
    summary.n_tasks = static_cast<int>(scores.size());

    int correct = 0;
    MeanAccumulator utility, efficiency, cognitive, grounding, robustness;
    MeanAccumulator utility_c, efficiency_c, cognitive_c, grounding_c,
        robustness_c;
    MeanAccumulator adaptability;
    for (const TaskScore& entry : scores) {
        const TraceScores& s = entry.scores;
        if (s.correct) ++correct;
        utility.add(s.utility);
        efficiency.add(s.efficiency);
        cognitive.add(s.cognitive_quality);
        grounding.add(s.grounding);
        robustness.add(s.robustness);
        adaptability.add(s.entropy_adaptability);
        if (s.correct) {
            utility_c.add(s.utility);
            efficiency_c.add(s.efficiency);
            cognitive_c.add(s.cognitive_quality);
            grounding_c.add(s.grounding);
            robustness_c.add(s.robustness);
        }
    }
    summary.pass_at_1 =
        static_cast<double>(correct) / static_cast<double>(scores.size());
    summary.mean_utility = utility.mean();
    summary.mean_efficiency = efficiency.mean();
    summary.mean_cognitive = cognitive.mean();
    summary.mean_grounding = grounding.mean();
    summary.mean_robustness = robustness.mean();
    summary.mean_utility_correct = utility_c.mean();
    summary.mean_efficiency_correct = efficiency_c.mean();
    summary.mean_cognitive_correct = cognitive_c.mean();
    summary.mean_grounding_correct = grounding_c.mean();
    summary.mean_robustness_correct = robustness_c.mean();
    summary.mean_entropy_adaptability = adaptability.mean();
    if (diagnostics) {
        summary.mean_lambda_min = diagnostics->mean_lambda_min;
        summary.trs = diagnostics->trs;
        if (diagnostics->mean_entropy_adaptability)
            summary.mean_entropy_adaptability =
                diagnostics->mean_entropy_adaptability;
    }
    return summary;
}

std::optional<LeaderboardFormat> leaderboard_format_from_string(
    std::string_view name) {
    if (name == "markdown") return LeaderboardFormat::Markdown;
    if (name == "csv") return LeaderboardFormat::Csv;
    if (name == "json") return LeaderboardFormat::Json;
    return std::nullopt;
}

namespace {

std::vector<AgentSummary> ranked(std::span<const AgentSummary> summaries) {
    std::vector<AgentSummary> rows(summaries.begin(), summaries.end());
    std::sort(rows.begin(), rows.end(),
              [](const AgentSummary& a, const AgentSummary& b) {
                  const double ua = a.mean_utility.value_or(-1.0);
                  const double ub = b.mean_utility.value_or(-1.0);
                  if (ua != ub) return ua > ub;
                  if (a.pass_at_1 != b.pass_at_1)
                      return a.pass_at_1 > b.pass_at_1;
                  return a.agent_id < b.agent_id;
              });
    return rows;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
    }
    return quoted + "\"";
}

void json_metric(nlohmann::ordered_json& row, const char* key,
                 const std::optional<double>& value) {
    if (value)
        row[key] = *value;
    else
        row[key] = nullptr;
}

}  // namespace

std::string emit_leaderboard(std::span<const AgentSummary> summaries,
                             LeaderboardFormat format) {
    if (summaries.empty())
        throw std::invalid_argument("emit_leaderboard: no summaries");
    const std::vector<AgentSummary> rows = ranked(summaries);

    switch (format) {
        case LeaderboardFormat::Markdown: {
            std::string out;
            out +=
                "| agent | Pass@1 | U | E | C | G_E | R_R | lambda_min | TRS "
                "|\n";
            out +=
                "|---|---|---|---|---|---|---|---|---|\n";
            for (const AgentSummary& row : rows) {
                out += "| " + row.agent_id + " | " + fixed4(row.pass_at_1) +
                       " | " + cell(row.mean_utility) + " | " +
                       cell(row.mean_efficiency) + " | " +
                       cell(row.mean_cognitive) + " | " +
                       cell(row.mean_grounding) + " | " +
                       cell(row.mean_robustness) + " | " +
                       cell(row.mean_lambda_min) + " | " + cell(row.trs) +
                       " |\n";
            }
            return out;
        }
        case LeaderboardFormat::Csv: {
            std::string out =
                "agent_id,n_tasks,pass_at_1,utility,efficiency,cognitive,"
                "grounding,robustness,lambda_min,trs,entropy_adaptability\n";
            for (const AgentSummary& row : rows) {
                out += csv_quote(row.agent_id) + "," +
                       std::to_string(row.n_tasks) + "," +
                       fixed4(row.pass_at_1) + "," + cell(row.mean_utility) +
                       "," + cell(row.mean_efficiency) + "," +
                       cell(row.mean_cognitive) + "," +
                       cell(row.mean_grounding) + "," +
                       cell(row.mean_robustness) + "," +
                       cell(row.mean_lambda_min) + "," + cell(row.trs) + "," +
                       cell(row.mean_entropy_adaptability) + "\n";
            }
            return out;
        }
        case LeaderboardFormat::Json: {
            nlohmann::ordered_json doc = nlohmann::ordered_json::array();
            for (const AgentSummary& row : rows) {
                nlohmann::ordered_json j;
                j["agent_id"] = row.agent_id;
                j["n_tasks"] = row.n_tasks;
                j["pass_at_1"] = row.pass_at_1;
                json_metric(j, "utility", row.mean_utility);
                json_metric(j, "efficiency", row.mean_efficiency);
                json_metric(j, "cognitive", row.mean_cognitive);
                json_metric(j, "grounding", row.mean_grounding);
                json_metric(j, "robustness", row.mean_robustness);
                json_metric(j, "utility_correct", row.mean_utility_correct);
                json_metric(j, "efficiency_correct",
                            row.mean_efficiency_correct);
                json_metric(j, "cognitive_correct",
                            row.mean_cognitive_correct);
                json_metric(j, "grounding_correct",
                            row.mean_grounding_correct);
                json_metric(j, "robustness_correct",
                            row.mean_robustness_correct);
                json_metric(j, "lambda_min", row.mean_lambda_min);
                json_metric(j, "trs", row.trs);
                json_metric(j, "entropy_adaptability",
                            row.mean_entropy_adaptability);
                doc.push_back(std::move(j));
            }
            return doc.dump(2) + "\n";
        }
    }
    throw std::invalid_argument("emit_leaderboard: unknown format");
}

}  // namespace trace::reporting
