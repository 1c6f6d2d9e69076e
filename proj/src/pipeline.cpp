#include "trace/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "trace/diagnostics.hpp"
#include "trace/io.hpp"
#include "trace/metrics.hpp"

namespace trace::pipeline {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read file `" + path + "`");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write file `" + path.string() + "`");
    return out;
}

// Group scores per agent, collapsing byte-identical duplicates of one
// (agent, task) and rejecting conflicting ones.
std::vector<reporting::AgentSummary> summarize_records(
    const std::vector<ScoreRecord>& records) {
    std::map<std::string, std::map<std::string, TraceScores>> by_agent;
    for (const ScoreRecord& record : records) {
        auto& tasks = by_agent[record.agent_id];
        auto it = tasks.find(record.task_id);
        if (it == tasks.end()) {
            tasks.emplace(record.task_id, record.scores);
        } else if (!(it->second == record.scores)) {
            throw ValidationError("conflicting duplicate score for agent `" +
                                  record.agent_id + "`, task `" +
                                  record.task_id + "`");
        }
    }
    std::vector<reporting::AgentSummary> summaries;
    for (const auto& [agent_id, tasks] : by_agent) {
        std::vector<reporting::TaskScore> scores;
        scores.reserve(tasks.size());
        for (const auto& [task_id, task_scores] : tasks)
            scores.push_back({task_id, task_scores});
        summaries.push_back(reporting::aggregate(agent_id, std::move(scores)));
    }
    return summaries;
}

}  // namespace

void run_eval(const EvalOptions& options, const EngineConfig& config) {
    ParseOptions parse_options{options.lenient};
    auto tasks_in = open_input(options.tasks_path);
    Parsed<Task> tasks = parse_tasks(tasks_in, parse_options);
    auto trajectories_in = open_input(options.trajectories_path);
    Parsed<Trajectory> trajectories =
        parse_trajectories(trajectories_in, parse_options);
    for (const std::string& warning : tasks.warnings)
        std::cerr << options.tasks_path << ": " << warning << "\n";
    for (const std::string& warning : trajectories.warnings)
        std::cerr << options.trajectories_path << ": " << warning << "\n";

    std::map<std::string, const Task*> task_index;
    for (const Task& task : tasks.values) task_index[task.id] = &task;
    for (std::size_t i = 0; i < trajectories.values.size(); ++i) {
        const Trajectory& t = trajectories.values[i];
        if (!task_index.count(t.task_id)) {
            throw ValidationError(
                "trajectory record " + std::to_string(i + 1) + " (task `" +
                t.task_id + "`, agent `" + t.agent_id + "`, run `" + t.run_id +
                "`) references an unknown task");
        }
    }

    const ProviderSuite providers = make_provider_suite(config.providers);
    std::vector<ScoreRecord> records(trajectories.values.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> provider_failed{false};
    std::string provider_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= trajectories.values.size() || provider_failed.load())
                break;
            const Trajectory& trajectory = trajectories.values[i];
            const Task& task = *task_index.at(trajectory.task_id);
            try {
                ScoreRecord record;
                record.task_id = trajectory.task_id;
                record.agent_id = trajectory.agent_id;
                record.run_id = trajectory.run_id;
                record.scores = metrics::score_trajectory(task, trajectory,
                                                          providers,
                                                          config.metrics);
                if (!record.scores.gain_series.empty()) {
                    record.scores.entropy_adaptability =
                        diagnostics::entropy_adaptability(
                            trajectory, record.scores.gain_series,
                            &record.scores.warnings);
                }
                records[i] = std::move(record);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                provider_failed = true;
                provider_error = e.what();
                break;
            }
        }
    };

    const int parallelism = std::max(1, options.parallelism);
    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> workers;
        for (int w = 0; w < parallelism; ++w) workers.emplace_back(worker);
        for (std::thread& w : workers) w.join();
    }
    if (provider_failed) throw ProviderError(provider_error);

    std::filesystem::create_directories(options.out_dir);
    {
        auto out = open_output(options.out_dir / "scores.jsonl");
        write_score_records(out, records);
    }
    {
        const auto summaries = summarize_records(records);
        auto out = open_output(options.out_dir / "leaderboard.md");
        out << reporting::emit_leaderboard(summaries,
                                           reporting::LeaderboardFormat::Markdown);
    }
}

void run_diagnose(const DiagnoseOptions& options, const EngineConfig& config) {
    auto tasks_in = open_input(options.tasks_path);
    Parsed<Task> tasks = parse_tasks(tasks_in);
    if (tasks.values.empty())
        throw ValidationError("tasks file `" + options.tasks_path +
                              "` holds no tasks");

    const ProviderSuite providers = make_provider_suite(config.providers);
    SubprocessAgent subprocess(options.agent_command,
                               config.metrics.max_tool_calls,
                               config.agent_timeout_ms);

    // Tracks whether the subprocess ever yields a trajectory at all; an
    // agent that runs but answers wrongly is a score, not a failure.
    struct CountingAgent final : AgentRunner {
        explicit CountingAgent(AgentRunner& inner) : inner_(inner) {}
        Trajectory run(const Task& task, std::span<const Step> hint,
                       std::uint64_t seed) override {
            ++attempted_;
            Trajectory result = inner_.run(task, hint, seed);
            ++completed_;
            return result;
        }
        AgentRunner& inner_;
        long attempted_ = 0;
        long completed_ = 0;
    } agent(subprocess);

    std::filesystem::create_directories(options.out_dir);
    auto out = open_output(options.out_dir / "diagnostics.jsonl");

    double lambda_sum = 0.0;
    int lambda_count = 0;
    double trs_sum = 0.0;
    int trs_count = 0;
    double adaptability_sum = 0.0;
    int adaptability_count = 0;
    int skipped = 0;

    for (std::size_t task_index = 0; task_index < tasks.values.size();
         ++task_index) {
        const Task& task = tasks.values[task_index];
        ordered_json row;
        row["task_id"] = task.id;
        if (!task.has_oracle()) {
            row["skipped"] = true;
            row["reason"] = "task has no oracle trajectory";
            ++skipped;
            out << row.dump() << '\n';
            continue;
        }
        row["skipped"] = false;

        const std::uint64_t task_seed =
            sim::mix_seed(options.seed, task_index);

        diagnostics::MinHintOptions hint_options;
        hint_options.trials_per_level = options.trials_per_level;
        hint_options.seed = task_seed;
        const diagnostics::ScaffoldResult scaffold = diagnostics::min_hint_rate(
            agent, task, *providers.judge, config.metrics, hint_options);

        row["lambda_min"] = scaffold.lambda_min;
        row["attainable"] = scaffold.attainable;
        ordered_json curve;
        for (const auto& [lambda, rate] : scaffold.success_curve)
            curve[nlohmann::json(lambda).dump()] = rate;
        row["success_curve"] = std::move(curve);
        row["trials_per_level"] = scaffold.trials_per_level;
        lambda_sum += scaffold.lambda_min;
        ++lambda_count;

        // K unhinted runs for reproducibility and adaptability.
        std::vector<Trajectory> runs;
        std::vector<std::string> warnings = scaffold.warnings;
        for (int r = 0; r < options.k_runs; ++r) {
            try {
                runs.push_back(agent.run(task, {},
                                         sim::mix_seed(task_seed, 5000 + r)));
            } catch (const std::exception& e) {
                warnings.push_back("reproducibility run " + std::to_string(r) +
                                   " failed: " + e.what());
            }
        }
        if (runs.size() >= 2) {
            const double trs = diagnostics::trajectory_reproducibility(runs);
            row["trs"] = trs;
            trs_sum += trs;
            ++trs_count;
        } else {
            row["trs"] = nullptr;
            warnings.push_back("reproducibility undefined: fewer than 2 runs");
        }

        double run_adaptability_sum = 0.0;
        int run_adaptability_count = 0;
        for (const Trajectory& run : runs) {
            const std::vector<double> relevance = metrics::relevance_series(
                run, task.ground_truth_answer, *providers.embedding);
            const std::vector<double> gain = metrics::mig_series(relevance);
            const auto adaptability =
                diagnostics::entropy_adaptability(run, gain, &warnings);
            if (adaptability) {
                run_adaptability_sum += *adaptability;
                ++run_adaptability_count;
            }
        }
        if (run_adaptability_count > 0) {
            const double mean =
                run_adaptability_sum / run_adaptability_count;
            row["mean_entropy_adaptability"] = mean;
            adaptability_sum += mean;
            ++adaptability_count;
        } else {
            row["mean_entropy_adaptability"] = nullptr;
        }
        row["warnings"] = warnings;
        out << row.dump() << '\n';
    }

    if (agent.attempted_ > 0 && agent.completed_ == 0) {
        throw ProviderError("agent command `" + options.agent_command +
                            "` never produced a valid trajectory (" +
                            std::to_string(agent.attempted_) +
                            " attempts failed)");
    }

    ordered_json summary;
    summary["agent_command"] = options.agent_command;
    summary["n_tasks"] = tasks.values.size();
    summary["skipped"] = skipped;
    summary["mean_lambda_min"] =
        lambda_count > 0 ? ordered_json(lambda_sum / lambda_count)
                         : ordered_json(nullptr);
    summary["mean_trs"] = trs_count > 0 ? ordered_json(trs_sum / trs_count)
                                        : ordered_json(nullptr);
    summary["mean_entropy_adaptability"] =
        adaptability_count > 0
            ? ordered_json(adaptability_sum / adaptability_count)
            : ordered_json(nullptr);
    auto summary_out = open_output(options.out_dir / "diagnostics_summary.json");
    summary_out << summary.dump(2) << '\n';
}

void run_simulate(const SimulateOptions& options, const EngineConfig& config) {
    std::vector<sim::ScriptedPolicy> policies;
    for (const std::string& spec : options.policy_specs)
        policies.push_back(sim::ScriptedPolicy::parse(spec));
    if (policies.empty())
        throw ValidationError("simulate: at least one policy is required");

    const std::vector<sim::SuiteEntry> entries = sim::run_suite(
        policies, options.n_tasks, options.seed, options.params,
        config.metrics);

    std::filesystem::create_directories(options.out_dir);
    {
        auto out = open_output(options.out_dir / "tasks.jsonl");
        std::string last_task_id;
        for (const sim::SuiteEntry& entry : entries) {
            if (entry.task.id == last_task_id) continue;
            out << task_to_json(entry.task).dump() << '\n';
            last_task_id = entry.task.id;
        }
    }
    {
        auto out = open_output(options.out_dir / "trajectories.jsonl");
        for (const sim::SuiteEntry& entry : entries)
            out << trajectory_to_json(entry.trajectory).dump() << '\n';
    }
    {
        ordered_json manifest;
        manifest["engine_version"] = kEngineVersion;
        manifest["seed"] = options.seed;
        manifest["n_tasks"] = options.n_tasks;
        manifest["depth"] = options.params.depth;
        manifest["trap_count"] = options.params.trap_count;
        manifest["distractor_count"] = options.params.distractor_count;
        manifest["policies"] = ordered_json::array();
        for (const sim::ScriptedPolicy& policy : policies)
            manifest["policies"].push_back(policy.spec_string());
        auto out = open_output(options.out_dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
}

std::string run_report(const std::vector<std::string>& scores_paths,
                       reporting::LeaderboardFormat format) {
    std::vector<ScoreRecord> all_records;
    for (const std::string& path : scores_paths) {
        auto in = open_input(path);
        Parsed<ScoreRecord> parsed = parse_score_records(in);
        all_records.insert(all_records.end(), parsed.values.begin(),
                           parsed.values.end());
    }
    if (all_records.empty())
        throw ValidationError("report: no score records found");
    return reporting::emit_leaderboard(summarize_records(all_records), format);
}

}  // namespace trace::pipeline
