#include "trace/providers.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "trace/kernels.hpp"

namespace trace {

namespace {

using json = nlohmann::json;

uint64_t fnv1a(const char* data, std::size_t n) {
    uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            pending_space = !out.empty();
            continue;
        }
        if (uc < 0x80 && std::ispunct(uc)) continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

std::vector<std::string> distinct_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::unordered_set<std::string> seen;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && seen.insert(current).second)
            tokens.push_back(current);
        current.clear();
    };
    for (char c : text) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (uc < 0x80 && std::isalnum(uc)) {
            current.push_back(static_cast<char>(std::tolower(uc)));
        } else if (uc >= 0x80) {
            current.push_back(c);  // keep non-ASCII bytes inside a token
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<double> StubEmbedder::embed(const std::string& text) {
    std::vector<double> v(kDimension, 0.0);
    std::string lower;
    lower.reserve(text.size());
    for (char c : text)
        lower.push_back(static_cast<char>(std::tolower(
            static_cast<unsigned char>(c))));
    if (lower.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
            v[fnv1a(lower.data() + i, 3) % kDimension] += 1.0;
        }
    }
    const double norm = kernels::l2_norm(v);
    if (norm > 0.0) kernels::scale_in_place(v, 1.0 / norm);
    return v;
}

double StubEntailer::entail(const std::string& claim,
                            const std::vector<std::string>& evidence) {
    if (evidence.empty()) return 0.0;
    const std::vector<std::string> claim_tokens = distinct_tokens(claim);
    if (claim_tokens.empty()) return 0.0;
    std::string joined;
    for (const std::string& e : evidence) {
        joined += e;
        joined.push_back(' ');
    }
    const std::vector<std::string> evidence_tokens = distinct_tokens(joined);
    const std::unordered_set<std::string> evidence_set(evidence_tokens.begin(),
                                                       evidence_tokens.end());
    std::size_t overlap = 0;
    for (const std::string& t : claim_tokens) overlap += evidence_set.count(t);
    return static_cast<double>(overlap) /
           static_cast<double>(claim_tokens.size());
}

bool StubJudge::judge(const std::string& final_answer,
                      const std::string& ground_truth) {
    return normalize_text(final_answer) == normalize_text(ground_truth);
}

void enforce_unit_norm(std::vector<double>& vec,
                       std::vector<std::string>* warnings) {
    const double norm = kernels::l2_norm(vec);
    if (norm <= 0.0) {
        if (warnings)
            warnings->push_back("remote embedding had zero norm; left as-is");
        return;
    }
    if (std::abs(norm - 1.0) > 1e-6) {
        kernels::scale_in_place(vec, 1.0 / norm);
        if (warnings)
            warnings->push_back("remote embedding was not unit-norm (|v| = " +
                                std::to_string(norm) + "); renormalized");
    }
}

double clamp_probability(double p, std::vector<std::string>* warnings) {
    if (p < 0.0 || p > 1.0) {
        if (warnings)
            warnings->push_back("remote probability " + std::to_string(p) +
                                " out of [0,1]; clamped");
        return p < 0.0 ? 0.0 : 1.0;
    }
    return p;
}

void ConcurrencyGate::acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
}

void ConcurrencyGate::release() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

namespace {

struct GateHold {
    explicit GateHold(ConcurrencyGate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateHold() { gate_.release(); }
    ConcurrencyGate& gate_;
};

// One POST per call: {"inputs": [...]} in, {"outputs": [...]} out.
// Retries idempotently with exponential backoff.
json remote_call(const RemoteEndpoint& endpoint, const json& inputs) {
    std::string host = endpoint.url;
    std::string path = "/";
    // Split scheme://host[:port]/path.
    const auto scheme_pos = host.find("://");
    std::string rest = scheme_pos == std::string::npos
                           ? host
                           : host.substr(scheme_pos + 3);
    const std::string scheme =
        scheme_pos == std::string::npos ? "http" : host.substr(0, scheme_pos);
    const auto slash = rest.find('/');
    if (slash != std::string::npos) {
        path = rest.substr(slash);
        rest = rest.substr(0, slash);
    }
    host = scheme + "://" + rest;

    httplib::Client client(host);
    client.set_connection_timeout(0, endpoint.timeout_ms * 1000);
    client.set_read_timeout(0, endpoint.timeout_ms * 1000);
    httplib::Headers headers;
    if (!endpoint.auth_token.empty())
        headers.emplace("Authorization", "Bearer " + endpoint.auth_token);

    const json body = {{"inputs", inputs}};
    const std::string payload = body.dump();
    const int attempts = endpoint.max_retries + 1;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(path, headers, payload, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded() || !parsed.contains("outputs")) {
                throw ProviderError("provider response from " + endpoint.url +
                                    " is not a JSON object with \"outputs\"");
            }
            return parsed["outputs"];
        }
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "transport error (" +
                               httplib::to_string(res.error()) + ")";
        if (attempt < attempts) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(25 * (1 << (attempt - 1))));
        }
    }
    throw ProviderUnavailable("provider " + endpoint.url + " failed after " +
                              std::to_string(attempts) +
                              " attempts: " + last_error);
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)),
      dimension_(dimension),
      gate_(endpoint_.max_concurrency) {}

std::vector<double> RemoteEmbedder::embed(const std::string& text) {
    GateHold hold(gate_);
    const json outputs = remote_call(endpoint_, json::array({text}));
    if (!outputs.is_array() || outputs.empty() || !outputs[0].is_array())
        throw ProviderError("embedding response from " + endpoint_.url +
                            " is not a vector list");
    std::vector<double> vec = outputs[0].get<std::vector<double>>();
    std::lock_guard<std::mutex> lock(mutex_);
    enforce_unit_norm(vec, &warnings_);
    return vec;
}

RemoteEntailer::RemoteEntailer(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)), gate_(endpoint_.max_concurrency) {}

double RemoteEntailer::entail(const std::string& claim,
                              const std::vector<std::string>& evidence) {
    GateHold hold(gate_);
    const json input = {{"claim", claim}, {"evidence", evidence}};
    const json outputs = remote_call(endpoint_, json::array({input}));
    if (!outputs.is_array() || outputs.empty() || !outputs[0].is_number())
        throw ProviderError("entailment response from " + endpoint_.url +
                            " is not a probability list");
    std::lock_guard<std::mutex> lock(mutex_);
    return clamp_probability(outputs[0].get<double>(), &warnings_);
}

RemoteJudge::RemoteJudge(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)), gate_(endpoint_.max_concurrency) {}

bool RemoteJudge::judge(const std::string& final_answer,
                        const std::string& ground_truth) {
    GateHold hold(gate_);
    const json input = {{"answer", final_answer},
                        {"ground_truth", ground_truth}};
    const json outputs = remote_call(endpoint_, json::array({input}));
    if (!outputs.is_array() || outputs.empty())
        throw ProviderError("judge response from " + endpoint_.url +
                            " is empty");
    if (outputs[0].is_boolean()) return outputs[0].get<bool>();
    if (outputs[0].is_number()) return outputs[0].get<double>() >= 0.5;
    throw ProviderError("judge response from " + endpoint_.url +
                        " is not boolean or numeric");
}

std::vector<double> CachingEmbedder::embed(const std::string& text) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(text);
        if (it != cache_.end()) return it->second;
    }
    std::vector<double> vec = inner_->embed(text);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(text, std::move(vec)).first->second;
}

ProviderSuite ProviderSuite::stubs() {
    return ProviderSuite{
        std::make_shared<CachingEmbedder>(std::make_shared<StubEmbedder>()),
        std::make_shared<StubEntailer>(),
        std::make_shared<StubJudge>(),
    };
}

}  // namespace trace
