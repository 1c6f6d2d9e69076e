#include "oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace oracle {

namespace {

// Same FNV-1a/64-bucket definition as the provider contract, restated.
int trigram_bucket(const std::string& trigram) {
    unsigned long long h = 14695981039346656037ull;
    for (char c : trigram) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return static_cast<int>(h % 64);
}

std::string lower(const std::string& text) {
    std::string out;
    for (char c : text)
        out.push_back(static_cast<char>(std::tolower(
            static_cast<unsigned char>(c))));
    return out;
}

std::set<std::string> token_set(const std::string& text) {
    std::set<std::string> tokens;
    std::string current;
    for (char c : lower(text)) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if ((uc < 0x80 && std::isalnum(uc)) || uc >= 0x80) {
            current.push_back(c);
        } else if (!current.empty()) {
            tokens.insert(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(current);
    return tokens;
}

}  // namespace

std::map<int, double> embed_counts(const std::string& text) {
    std::map<int, double> counts;
    const std::string folded = lower(text);
    for (std::size_t i = 0; i + 3 <= folded.size(); ++i)
        counts[trigram_bucket(folded.substr(i, 3))] += 1.0;
    return counts;
}

double cosine(const std::map<int, double>& a, const std::map<int, double>& b) {
    long double dot = 0.0L, na = 0.0L, nb = 0.0L;
    for (const auto& [bucket, count] : a) {
        na += static_cast<long double>(count) * count;
        auto it = b.find(bucket);
        if (it != b.end()) dot += static_cast<long double>(count) * it->second;
    }
    for (const auto& [bucket, count] : b)
        nb += static_cast<long double>(count) * count;
    if (na == 0.0L || nb == 0.0L) return 0.0;
    return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

double entail(const std::string& claim,
              const std::vector<std::string>& evidence) {
    if (evidence.empty()) return 0.0;
    const std::set<std::string> claim_tokens = token_set(claim);
    if (claim_tokens.empty()) return 0.0;
    std::string joined;
    for (const std::string& e : evidence) joined += e + " ";
    const std::set<std::string> evidence_tokens = token_set(joined);
    int overlap = 0;
    for (const std::string& t : claim_tokens)
        if (evidence_tokens.count(t)) ++overlap;
    return static_cast<double>(overlap) /
           static_cast<double>(claim_tokens.size());
}

bool judge(const std::string& a, const std::string& b) {
    auto normalize = [](const std::string& text) {
        std::string squashed;
        for (char c : text) {
            const unsigned char uc = static_cast<unsigned char>(c);
            if (uc < 0x80 && std::ispunct(uc)) continue;
            squashed.push_back(std::isspace(uc)
                                   ? ' '
                                   : static_cast<char>(std::tolower(uc)));
        }
        std::stringstream stream(squashed);
        std::string word, rebuilt;
        while (stream >> word) {
            if (!rebuilt.empty()) rebuilt.push_back(' ');
            rebuilt += word;
        }
        return rebuilt;
    };
    return normalize(a) == normalize(b);
}

Scores score(const trace::Task& task, const trace::Trajectory& trajectory,
             const trace::TraceConfig& config) {
    Scores s;
    const std::size_t length = trajectory.steps.size();
    s.correct = judge(trajectory.final_answer, task.ground_truth_answer);

    // Relevance and marginal gain by explicit running max.
    const auto target = embed_counts(task.ground_truth_answer);
    std::vector<std::map<int, double>> observations;
    for (const trace::Step& step : trajectory.steps)
        observations.push_back(embed_counts(step.observation_text));
    for (std::size_t t = 0; t < length; ++t)
        s.relevance.push_back(cosine(observations[t], target));
    for (std::size_t t = 0; t < length; ++t) {
        double best_before = 0.0;
        for (std::size_t i = 0; i < t; ++i)
            best_before = std::max(best_before, s.relevance[i]);
        s.gain.push_back(std::max(0.0, s.relevance[t] - best_before));
    }

    // Redundancy penalties.
    for (std::size_t t = 0; t < length; ++t) {
        double penalty = 1.0;
        if (t >= 1 && s.gain[t] == 0.0 && s.gain[t - 1] == 0.0) {
            const double similarity =
                std::max(0.0, cosine(observations[t], observations[t - 1]));
            penalty = 1.0 + config.alpha * similarity;
        }
        s.penalty.push_back(penalty);
    }

    // Efficiency.
    double raw_cost = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
        const trace::Action& action = trajectory.steps[t].action;
        const double base = action.intrinsic_cost
                                ? *action.intrinsic_cost
                                : config.cost_table.cost_of(action.kind);
        raw_cost += base * s.penalty[t];
    }
    const double cost_functional = 1.0 + std::log(std::max(1.0, raw_cost));
    const double reward =
        1.0 + config.gamma * std::log(static_cast<double>(length));
    s.efficiency = std::min(1.0, reward / cost_functional);

    // Grounding as a direct product.
    if (trajectory.claims.empty()) {
        s.grounding = 1.0;
    } else {
        long double product = 1.0L;
        for (const trace::Claim& claim : trajectory.claims)
            product *= std::max(config.nli_floor,
                                entail(claim.text, claim.evidence));
        s.grounding = static_cast<double>(std::pow(
            product, 1.0L / static_cast<long double>(trajectory.claims.size())));
    }

    // Robustness by explicit scan for the next gainful step.
    std::vector<int> latencies;
    for (std::size_t t = 0; t < length; ++t) {
        if (!trajectory.steps[t].is_trap_hit) continue;
        int recovered_after = -1;
        for (std::size_t k = t + 1; k < length; ++k) {
            if (s.gain[k] > 0.0) {
                recovered_after = static_cast<int>(k - t);
                break;
            }
        }
        if (recovered_after < 0) {
            const int remaining = static_cast<int>(length - 1 - t);
            recovered_after = config.recovery_cap.fixed
                                  ? *config.recovery_cap.fixed
                                  : std::max(1, remaining);
        }
        latencies.push_back(recovered_after);
    }
    if (latencies.empty()) {
        s.robustness = 1.0;
    } else {
        double sum = 0.0;
        for (int d : latencies) sum += d;
        s.robustness =
            std::exp(-config.lambda_decay * sum / latencies.size());
    }

    s.cognitive = config.beta * s.grounding + (1.0 - config.beta) * s.robustness;
    s.utility = s.correct ? std::pow(s.efficiency, config.omega_e) *
                                std::pow(s.cognitive, config.omega_c)
                          : 0.0;

    // Entropy adaptability: explicit entropies and textbook Pearson.
    if (length >= 3) {
        bool all_present = true;
        std::vector<double> entropies;
        for (const trace::Step& step : trajectory.steps) {
            if (!step.action_distribution) {
                all_present = false;
                break;
            }
            double h = 0.0;
            for (double p : *step.action_distribution)
                if (p > 0.0) h -= p * std::log(p);
            entropies.push_back(h);
        }
        if (all_present) {
            std::vector<double> x(s.gain.begin(), s.gain.end() - 1);
            std::vector<double> y;
            for (std::size_t t = 0; t + 1 < length; ++t)
                y.push_back(entropies[t] - entropies[t + 1]);
            const std::size_t n = x.size();
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                mx += x[i];
                my += y[i];
            }
            mx /= n;
            my /= n;
            double sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sxx += (x[i] - mx) * (x[i] - mx);
                syy += (y[i] - my) * (y[i] - my);
                sxy += (x[i] - mx) * (y[i] - my);
            }
            if (sxx > 0.0 && syy > 0.0)
                s.entropy_adaptability = sxy / std::sqrt(sxx * syy);
        }
    }
    return s;
}

}  // namespace oracle
