#include "trace/simharness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trace/diagnostics.hpp"

namespace trace::sim {

namespace {

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed ^ (0xBF58476D1CE4E5B9ull * (index + 1));
    return splitmix_next(state);
}

std::uint64_t Rng::next() { return splitmix_next(state_); }

double Rng::next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) { return next() % n; }

namespace {

// Random lowercase token whose character trigrams do not collide with any
// previously issued token of this task, so cross-document relevance comes
// only from genuinely shared answer content.
std::string fresh_token(Rng& rng, std::set<std::string>& used_trigrams,
                        std::size_t length) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::string token;
        token.reserve(length);
        for (std::size_t i = 0; i < length; ++i)
            token.push_back(static_cast<char>('a' + rng.next_below(26)));
        std::vector<std::string> trigrams;
        for (std::size_t i = 0; i + 3 <= token.size(); ++i)
            trigrams.push_back(token.substr(i, 3));
        bool clash = false;
        for (const std::string& t : trigrams) {
            if (used_trigrams.count(t)) {
                clash = true;
                break;
            }
        }
        if (clash) continue;
        used_trigrams.insert(trigrams.begin(), trigrams.end());
        return token;
    }
    throw std::runtime_error("token space exhausted");
}

// Four-way candidate-action distribution whose entropy shrinks as gold-path
// progress grows; keeps policy entropy meaningful for adaptability scoring.
std::vector<double> progress_distribution(double progress) {
    const double main_mass = std::min(0.95, 0.4 + 0.55 * progress);
    const double rest = (1.0 - main_mass) / 3.0;
    return {main_mass, rest, rest, rest};
}

std::string format_double(double value) {
    return nlohmann::json(value).dump();
}

}  // namespace

SynTask generate_task(std::uint64_t seed, const GenParams& params) {
    if (params.depth < 1)
        throw std::invalid_argument("depth must be >= 1");
    if (params.trap_count < 0 || params.distractor_count < 0)
        throw std::invalid_argument("counts must be >= 0");

    SynTask syn;
    syn.seed = seed;
    syn.params = params;
    Rng rng(seed);
    std::set<std::string> used_trigrams;

    std::vector<std::string> gold_tokens;
    for (int i = 0; i < params.depth; ++i)
        gold_tokens.push_back(fresh_token(rng, used_trigrams, 8));

    std::string answer;
    std::vector<std::string> gold_docs;  // doc i = answer prefix through token i
    for (int i = 0; i < params.depth; ++i) {
        if (i > 0) answer += ' ';
        answer += gold_tokens[i];
        gold_docs.push_back(answer);
    }

    SyntheticCorpus& corpus = syn.corpus;
    for (int i = 0; i < params.depth; ++i) {
        const std::string id = "g" + std::to_string(i + 1);
        corpus.documents[id] = gold_docs[i];
        corpus.gold_path.push_back(id);
    }
    // Traps are near misses: a gold prefix diluted with a junk token, so
    // their relevance is positive but never beats the prefix they echo.
    for (int j = 0; j < params.trap_count; ++j) {
        const std::string id = "x" + std::to_string(j + 1);
        const int position = 1 + static_cast<int>(rng.next_below(
                                     static_cast<std::uint64_t>(params.depth)));
        const std::string junk = fresh_token(rng, used_trigrams, 8);
        corpus.documents[id] = gold_docs[position - 1] + " " + junk;
        corpus.trap_ids.insert(id);
        corpus.trap_positions[id] = position;
    }
    for (int k = 0; k < params.distractor_count; ++k) {
        const std::string id = "n" + std::to_string(k + 1);
        corpus.documents[id] = fresh_token(rng, used_trigrams, 8) + " " +
                               fresh_token(rng, used_trigrams, 8);
        corpus.distractor_ids.insert(id);
    }

    char id_buffer[64];
    std::snprintf(id_buffer, sizeof(id_buffer), "synth-%016llx-d%d-x%d-n%d",
                  static_cast<unsigned long long>(seed), params.depth,
                  params.trap_count, params.distractor_count);

    Task& task = syn.task;
    task.id = id_buffer;
    task.question = "Recover the passphrase for case " + task.id;
    task.ground_truth_answer = answer;
    task.complexity = static_cast<double>(params.depth);
    task.trap_ids.assign(corpus.trap_ids.begin(), corpus.trap_ids.end());

    auto oracle = std::make_shared<Trajectory>();
    oracle->task_id = task.id;
    oracle->agent_id = "oracle";
    oracle->run_id = "oracle";
    for (int i = 0; i < params.depth; ++i) {
        Step step;
        step.index = i + 1;
        step.action.kind = ActionKind::Fetch;
        step.action.payload = corpus.gold_path[i];
        step.observation_text = gold_docs[i];
        step.observation_content_id = corpus.gold_path[i];
        step.action_distribution = progress_distribution(
            static_cast<double>(i + 1) / params.depth);
        oracle->steps.push_back(std::move(step));
    }
    Step finish;
    finish.index = params.depth + 1;
    finish.action.kind = ActionKind::Finish;
    finish.action.payload = answer;
    finish.observation_text = answer;
    finish.action_distribution = progress_distribution(1.0);
    (*finish.action_distribution)[0] = 0.97;
    for (int i = 1; i < 4; ++i) (*finish.action_distribution)[i] = 0.01;
    oracle->steps.push_back(std::move(finish));
    oracle->final_answer = answer;
    for (int i = 0; i < params.depth; ++i)
        oracle->claims.push_back(Claim{gold_tokens[i], {gold_docs[i]}});
    task.oracle_trajectory = oracle;

    validate_task(task);
    return syn;
}

std::optional<SynthId> parse_synth_id(const std::string& task_id) {
    unsigned long long seed = 0;
    int depth = 0, traps = 0, distractors = 0;
    if (std::sscanf(task_id.c_str(), "synth-%16llx-d%d-x%d-n%d", &seed, &depth,
                    &traps, &distractors) != 4)
        return std::nullopt;
    SynthId id;
    id.seed = seed;
    id.params = GenParams{depth, traps, distractors};
    return id;
}

SynTask rebuild_task(const std::string& task_id) {
    const auto parsed = parse_synth_id(task_id);
    if (!parsed)
        throw std::invalid_argument("task `" + task_id +
                                    "` was not generated by this harness");
    return generate_task(parsed->seed, parsed->params);
}

double ScriptedPolicy::param(const std::string& name, double fallback) const {
    auto it = parameters.find(name);
    return it == parameters.end() ? fallback : it->second;
}

std::string ScriptedPolicy::spec_string() const {
    std::string kind_name;
    switch (kind) {
        case PolicyKind::Oracle: kind_name = "oracle"; break;
        case PolicyKind::Wanderer: kind_name = "wanderer"; break;
        case PolicyKind::TrapProne: kind_name = "trapprone"; break;
        case PolicyKind::Hallucinator: kind_name = "hallucinator"; break;
    }
    if (parameters.empty()) return kind_name;
    std::string out = kind_name + "(";
    bool first = true;
    for (const auto& [key, value] : parameters) {
        if (!first) out += ",";
        out += key + "=" + format_double(value);
        first = false;
    }
    return out + ")";
}

ScriptedPolicy ScriptedPolicy::parse(const std::string& spec) {
    std::string lowered;
    for (char c : spec)
        lowered.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::string kind_name = lowered;
    std::string args;
    const auto open = lowered.find('(');
    if (open != std::string::npos) {
        if (lowered.back() != ')')
            throw std::invalid_argument("policy spec `" + spec +
                                        "`: missing closing parenthesis");
        kind_name = lowered.substr(0, open);
        args = lowered.substr(open + 1, lowered.size() - open - 2);
    }
    ScriptedPolicy policy;
    if (kind_name == "oracle") policy.kind = PolicyKind::Oracle;
    else if (kind_name == "wanderer") policy.kind = PolicyKind::Wanderer;
    else if (kind_name == "trapprone") policy.kind = PolicyKind::TrapProne;
    else if (kind_name == "hallucinator") policy.kind = PolicyKind::Hallucinator;
    else
        throw std::invalid_argument("unknown policy kind `" + kind_name + "`");
    std::stringstream stream(args);
    std::string pair;
    while (std::getline(stream, pair, ',')) {
        if (pair.empty()) continue;
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("policy parameter `" + pair +
                                        "` is not key=value");
        policy.parameters[pair.substr(0, eq)] =
            std::stod(pair.substr(eq + 1));
    }
    return policy;
}

namespace {

struct StepDraft {
    ActionKind kind;
    std::string payload;
    std::string observation;
    std::optional<std::string> content_id;
    double progress;  // gold fraction completed after this step
};

}  // namespace

Trajectory run_policy(const ScriptedPolicy& policy, const SynTask& syn,
                      std::span<const Step> hint, std::uint64_t seed,
                      const TraceConfig& config) {
    const Trajectory& oracle = *syn.task.oracle_trajectory;
    if (hint.size() > oracle.steps.size())
        throw std::invalid_argument("hint longer than the oracle trajectory");
    const int depth = syn.params.depth;
    const int resume_from =
        static_cast<int>(std::min<std::size_t>(hint.size(),
                                               static_cast<std::size_t>(depth)));

    Rng rng(mix_seed(syn.seed, seed));
    const bool fails = rng.next_unit() < policy.param("fail_prob", 0.0);
    const double wander_prob = policy.param("wander_prob", 0.5);
    const double trap_prob = policy.param("trap_prob", 0.5);
    const int dwell = std::max(1, static_cast<int>(policy.param("dwell", 2)));

    std::vector<std::string> distractors(syn.corpus.distractor_ids.begin(),
                                         syn.corpus.distractor_ids.end());
    std::vector<StepDraft> drafts;
    const auto budget_left = [&](int gold_remaining) {
        // Keep room for the remaining gold walk plus the finish step.
        return static_cast<int>(drafts.size()) + gold_remaining + 1 <
               config.max_tool_calls;
    };

    for (int i = resume_from + 1; i <= depth; ++i) {
        const int gold_remaining = depth - i + 1;
        const double progress_before =
            static_cast<double>(i - 1) / static_cast<double>(depth);
        if (policy.kind == PolicyKind::Wanderer && i >= 2 &&
            !distractors.empty()) {
            int wandered = 0;
            while (wandered < 5 && rng.next_unit() < wander_prob &&
                   budget_left(gold_remaining)) {
                const std::string& id =
                    distractors[rng.next_below(distractors.size())];
                drafts.push_back({ActionKind::Fetch, id,
                                  syn.corpus.documents.at(id), id,
                                  progress_before});
                ++wandered;
            }
        }
        const std::string& gold_id = syn.corpus.gold_path[i - 1];
        drafts.push_back({ActionKind::Fetch, gold_id,
                          syn.corpus.documents.at(gold_id), gold_id,
                          static_cast<double>(i) / static_cast<double>(depth)});
        if (policy.kind == PolicyKind::TrapProne) {
            for (const auto& [trap_id, position] : syn.corpus.trap_positions) {
                if (position != i) continue;
                if (rng.next_unit() >= trap_prob) continue;
                if (!budget_left(depth - i)) continue;
                const std::string& text = syn.corpus.documents.at(trap_id);
                const double progress =
                    static_cast<double>(i) / static_cast<double>(depth);
                drafts.push_back(
                    {ActionKind::Fetch, trap_id, text, trap_id, progress});
                for (int d = 0; d < dwell && budget_left(depth - i); ++d) {
                    drafts.push_back(
                        {ActionKind::Fetch, trap_id, text, trap_id, progress});
                }
            }
        }
    }

    const std::string answer =
        fails ? "unresolved" : syn.task.ground_truth_answer;
    drafts.push_back({ActionKind::Finish, answer, answer, std::nullopt, 1.0});

    Trajectory trajectory;
    trajectory.task_id = syn.task.id;
    trajectory.agent_id = policy.spec_string();
    trajectory.run_id = "s" + std::to_string(seed);
    trajectory.final_answer = answer;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        const StepDraft& draft = drafts[i];
        Step step;
        step.index = static_cast<int>(i) + 1;
        step.action.kind = draft.kind;
        step.action.payload = draft.payload;
        step.observation_text = draft.observation;
        step.observation_content_id = draft.content_id;
        step.is_trap_hit =
            draft.content_id && syn.corpus.trap_ids.count(*draft.content_id) > 0;
        if (draft.kind == ActionKind::Finish) {
            std::vector<double> dist = {0.97, 0.01, 0.01, 0.01};
            step.action_distribution = std::move(dist);
        } else {
            step.action_distribution = progress_distribution(draft.progress);
        }
        trajectory.steps.push_back(std::move(step));
    }

    if (!fails) {
        std::string token;
        std::stringstream answer_stream(syn.task.ground_truth_answer);
        std::vector<std::string> gold_tokens;
        while (answer_stream >> token) gold_tokens.push_back(token);
        for (int i = 0; i < depth; ++i) {
            const std::string& gold_doc =
                syn.corpus.documents.at(syn.corpus.gold_path[i]);
            if (policy.kind == PolicyKind::Hallucinator) {
                std::vector<std::string> evidence;
                if (i % 2 == 1 && !distractors.empty()) {
                    evidence.push_back(syn.corpus.documents.at(
                        distractors[i % distractors.size()]));
                }
                trajectory.claims.push_back(Claim{gold_tokens[i], evidence});
            } else {
                trajectory.claims.push_back(Claim{gold_tokens[i], {gold_doc}});
            }
        }
    }

    validate_trajectory(trajectory);
    return trajectory;
}

Trajectory PolicyAgent::run(const Task& task, std::span<const Step> hint,
                            std::uint64_t seed) {
    const SynTask syn = rebuild_task(task.id);
    return run_policy(policy_, syn, hint, seed, config_);
}

Trajectory ThresholdAgent::run(const Task& task, std::span<const Step> hint,
                               std::uint64_t seed) {
    if (!task.has_oracle())
        throw std::invalid_argument("threshold agent needs an oracle trajectory");
    const auto oracle_length =
        static_cast<double>(task.oracle_trajectory->steps.size());
    const auto required = static_cast<std::size_t>(
        std::max(0.0, std::ceil(threshold_ * oracle_length - 1e-9)));
    const bool succeeds = hint.size() >= required;

    Trajectory trajectory;
    trajectory.task_id = task.id;
    trajectory.agent_id = "threshold";
    trajectory.run_id = "s" + std::to_string(seed);
    trajectory.final_answer =
        succeeds ? task.ground_truth_answer : "insufficient guidance";
    Step finish;
    finish.index = 1;
    finish.action.kind = ActionKind::Finish;
    finish.action.payload = trajectory.final_answer;
    finish.observation_text = trajectory.final_answer;
    trajectory.steps.push_back(std::move(finish));
    validate_trajectory(trajectory);
    return trajectory;
}

std::vector<SuiteEntry> run_suite(const std::vector<ScriptedPolicy>& policies,
                                  int n_tasks, std::uint64_t seed,
                                  const GenParams& params,
                                  const TraceConfig& config) {
    if (n_tasks < 1) throw std::invalid_argument("n_tasks must be >= 1");
    std::vector<SuiteEntry> entries;
    entries.reserve(static_cast<std::size_t>(n_tasks) * policies.size());
    for (int i = 0; i < n_tasks; ++i) {
        const std::uint64_t task_seed =
            mix_seed(seed, static_cast<std::uint64_t>(i));
        const SynTask syn = generate_task(task_seed, params);
        for (std::size_t p = 0; p < policies.size(); ++p) {
            const std::uint64_t run_seed = mix_seed(task_seed, 1000 + p);
            entries.push_back(SuiteEntry{
                syn.task, run_policy(policies[p], syn, {}, run_seed, config)});
        }
    }
    return entries;
}

}  // namespace trace::sim
