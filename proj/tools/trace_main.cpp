// trace - trajectory-aware evaluation for tool-using research agents.
//
// Subcommands: eval, diagnose, simulate, report, plus a built-in scripted
// `agent` mode that speaks the subprocess protocol (JSON request on stdin,
// one trajectory JSON on stdout) for offline diagnostics and testing.
//
// Exit codes: 0 success, 1 usage error, 2 invalid input, 3 provider or
// agent failure.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trace/diagnostics.hpp"
#include "trace/io.hpp"
#include "trace/pipeline.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitProviderFailure = 3;

trace::EngineConfig load_engine_config(const std::string& config_path) {
    if (config_path.empty()) {
        trace::EngineConfig config;
        config.validate();
        return config;
    }
    return trace::load_config_file(config_path);
}

int run_agent_mode(const std::string& policy_spec, double threshold) {
    nlohmann::json request;
    try {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        request = nlohmann::json::parse(buffer.str());
    } catch (const std::exception& e) {
        std::cerr << "agent: cannot parse request: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    try {
        const trace::Task task = trace::task_from_json(request.at("task"));
        const std::vector<trace::Step> hint =
            trace::steps_from_json(request.at("hint_steps"));
        const auto seed = request.at("seed").get<std::uint64_t>();
        trace::TraceConfig config;
        config.max_tool_calls = request.value("max_tool_calls", 60);

        trace::Trajectory trajectory;
        if (policy_spec == "threshold") {
            trace::sim::ThresholdAgent agent(threshold);
            trajectory = agent.run(task, hint, seed);
        } else {
            trace::sim::PolicyAgent agent(
                trace::sim::ScriptedPolicy::parse(policy_spec), config);
            trajectory = agent.run(task, hint, seed);
        }
        std::cout << trace::trajectory_to_json(trajectory).dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "agent: " << e.what() << "\n";
        return kExitProviderFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory-aware evaluation for tool-using research agents",
                 "trace"};
    app.require_subcommand(1);

    // --- eval ---
    auto* eval = app.add_subcommand(
        "eval", "score recorded trajectories against their tasks");
    trace::pipeline::EvalOptions eval_options;
    std::string eval_config_path;
    eval->add_option("--tasks", eval_options.tasks_path, "tasks file (jsonl)")
        ->required();
    eval->add_option("--trajectories", eval_options.trajectories_path,
                     "trajectories file (jsonl)")
        ->required();
    eval->add_option("--config", eval_config_path, "config file (key = value)");
    eval->add_flag("--lenient", eval_options.lenient,
                   "ignore unknown input fields with a warning");
    eval->add_option("--parallelism", eval_options.parallelism,
                     "scoring worker count")
        ->check(CLI::PositiveNumber);
    eval->add_option("--out", eval_options.out_dir, "output directory")
        ->required();

    // --- diagnose ---
    auto* diagnose = app.add_subcommand(
        "diagnose", "scaffolded-capability and policy diagnostics via a "
                    "subprocess agent");
    trace::pipeline::DiagnoseOptions diag_options;
    std::string diag_config_path;
    double grid_step = 0.0;
    diagnose->add_option("--tasks", diag_options.tasks_path,
                         "tasks file (jsonl, with oracle trajectories)")
        ->required();
    diagnose->add_option("--agent-cmd", diag_options.agent_command,
                         "agent command (stdin request, stdout trajectory)")
        ->required();
    diagnose->add_option("--seed", diag_options.seed, "base seed")->required();
    diagnose->add_option("--k-runs", diag_options.k_runs,
                         "runs per task for reproducibility")
        ->check(CLI::Range(2, 1000));
    diagnose->add_option("--grid-step", grid_step,
                         "hint-rate grid step (default from config)");
    diagnose->add_option("--config", diag_config_path,
                         "config file (key = value)");
    diagnose->add_option("--out", diag_options.out_dir, "output directory")
        ->required();

    // --- simulate ---
    auto* simulate = app.add_subcommand(
        "simulate", "generate a seeded synthetic suite with scripted policies");
    trace::pipeline::SimulateOptions sim_options;
    std::string sim_config_path;
    std::string policies_arg = "oracle";
    // Range violations surface as invalid input (exit 2), not usage errors.
    simulate->add_option("--seed", sim_options.seed, "generation seed")
        ->required();
    simulate->add_option("--n-tasks", sim_options.n_tasks, "task count")
        ->required();
    simulate->add_option("--depth", sim_options.params.depth,
                         "gold-path length")
        ->required();
    simulate->add_option("--traps", sim_options.params.trap_count,
                         "trap documents per task");
    simulate->add_option("--distractors", sim_options.params.distractor_count,
                         "distractor documents per task");
    simulate->add_option("--policies", policies_arg,
                         "comma-separated policy specs, e.g. "
                         "oracle,wanderer(wander_prob=0.5)");
    simulate->add_option("--config", sim_config_path,
                         "config file (key = value)");
    simulate->add_option("--out", sim_options.out_dir, "output directory")
        ->required();

    // --- report ---
    auto* report = app.add_subcommand(
        "report", "merge score files into one leaderboard document");
    std::vector<std::string> scores_paths;
    std::string format_arg = "markdown";
    report->add_option("--scores", scores_paths, "score files (jsonl)")
        ->required()
        ->expected(-1);
    report->add_option("--format", format_arg, "markdown | csv | json");

    // --- agent (builtin scripted agent, subprocess protocol) ---
    auto* agent = app.add_subcommand(
        "agent", "run a built-in scripted agent over the subprocess protocol");
    std::string agent_policy = "oracle";
    double agent_threshold = 0.4;
    agent->add_option("--policy", agent_policy,
                      "oracle | wanderer(...) | trapprone(...) | "
                      "hallucinator(...) | threshold");
    agent->add_option("--threshold", agent_threshold,
                      "oracle fraction required by the threshold policy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (eval->parsed()) {
            trace::pipeline::run_eval(eval_options,
                                      load_engine_config(eval_config_path));
        } else if (diagnose->parsed()) {
            trace::EngineConfig config = load_engine_config(diag_config_path);
            if (diagnose->count("--grid-step") > 0)
                config.metrics.hint_grid_step = grid_step;
            if (diagnose->count("--k-runs") == 0)
                diag_options.k_runs = config.metrics.k_runs;
            config.validate();
            trace::pipeline::run_diagnose(diag_options, config);
        } else if (simulate->parsed()) {
            sim_options.policy_specs.clear();
            // Split on commas outside parentheses.
            std::string current;
            int parens = 0;
            for (char c : policies_arg) {
                if (c == '(') ++parens;
                if (c == ')') --parens;
                if (c == ',' && parens == 0) {
                    if (!current.empty()) sim_options.policy_specs.push_back(current);
                    current.clear();
                } else {
                    current.push_back(c);
                }
            }
            if (!current.empty()) sim_options.policy_specs.push_back(current);
            trace::pipeline::run_simulate(sim_options,
                                          load_engine_config(sim_config_path));
        } else if (report->parsed()) {
            const auto format =
                trace::reporting::leaderboard_format_from_string(format_arg);
            if (!format) {
                std::cerr << "trace: unknown format `" << format_arg << "`\n";
                return kExitUsage;
            }
            std::cout << trace::pipeline::run_report(scores_paths, *format);
        } else if (agent->parsed()) {
            return run_agent_mode(agent_policy, agent_threshold);
        }
    } catch (const trace::ProviderError& e) {
        std::cerr << "trace: " << e.what() << "\n";
        return kExitProviderFailure;
    } catch (const trace::ValidationError& e) {
        std::cerr << "trace: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "trace: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "trace: " << e.what() << "\n";
        return kExitProviderFailure;
    }
    return 0;
}
