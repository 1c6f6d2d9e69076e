#include "trace/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace trace {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double parsed = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ValidationError("config: key `" + key +
                              "` has non-numeric value `" + value + "`");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    const double parsed = parse_number(key, value);
    const int as_int = static_cast<int>(parsed);
    if (static_cast<double>(as_int) != parsed)
        throw ValidationError("config: key `" + key +
                              "` must be an integer, got `" + value + "`");
    return as_int;
}

bool apply_provider_key(ProviderSelection& selection, const std::string& key,
                        const std::string& suffix, const std::string& value) {
    if (suffix.empty()) {
        if (value != "stub" && value != "remote")
            throw ValidationError("config: key `" + key +
                                  "` must be `stub` or `remote`");
        selection.kind = value;
    } else if (suffix == ".url") {
        selection.endpoint.url = value;
    } else if (suffix == ".timeout_ms") {
        selection.endpoint.timeout_ms = parse_int(key, value);
    } else if (suffix == ".max_retries") {
        selection.endpoint.max_retries = parse_int(key, value);
    } else if (suffix == ".max_concurrency") {
        selection.endpoint.max_concurrency = parse_int(key, value);
    } else {
        return false;
    }
    return true;
}

}  // namespace

EngineConfig parse_config(std::istream& in) {
    EngineConfig config;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_number) +
                                  ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        TraceConfig& m = config.metrics;
        if (key == "omega_e") m.omega_e = parse_number(key, value);
        else if (key == "omega_c") m.omega_c = parse_number(key, value);
        else if (key == "alpha") m.alpha = parse_number(key, value);
        else if (key == "gamma") m.gamma = parse_number(key, value);
        else if (key == "beta") m.beta = parse_number(key, value);
        else if (key == "lambda_decay") m.lambda_decay = parse_number(key, value);
        else if (key == "theta_succ") m.theta_succ = parse_number(key, value);
        else if (key == "k_runs") m.k_runs = parse_int(key, value);
        else if (key == "hint_grid_step")
            m.hint_grid_step = parse_number(key, value);
        else if (key == "nli_floor") m.nli_floor = parse_number(key, value);
        else if (key == "recovery_cap") {
            if (value == "remaining-steps")
                m.recovery_cap.fixed = std::nullopt;
            else
                m.recovery_cap.fixed = parse_int(key, value);
        } else if (key == "max_tool_calls")
            m.max_tool_calls = parse_int(key, value);
        else if (key == "cost.search")
            m.cost_table.search = parse_number(key, value);
        else if (key == "cost.fetch")
            m.cost_table.fetch = parse_number(key, value);
        else if (key == "cost.reason")
            m.cost_table.reason = parse_number(key, value);
        else if (key == "cost.finish")
            m.cost_table.finish = parse_number(key, value);
        else if (key == "agent.timeout_ms")
            config.agent_timeout_ms = parse_int(key, value);
        else if (key.rfind("provider.embedding", 0) == 0 &&
                 apply_provider_key(config.providers.embedding, key,
                                    key.substr(18), value)) {
        } else if (key.rfind("provider.entailment", 0) == 0 &&
                   apply_provider_key(config.providers.entailment, key,
                                      key.substr(19), value)) {
        } else if (key.rfind("provider.judge", 0) == 0 &&
                   apply_provider_key(config.providers.judge, key,
                                      key.substr(14), value)) {
        } else {
            throw ValidationError("config line " + std::to_string(line_number) +
                                  ": unknown key `" + key + "`");
        }
    }
    config.validate();
    return config;
}

EngineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file `" + path + "` not readable");
    return parse_config(in);
}

ProviderSuite make_provider_suite(const ProviderConfig& config) {
    const char* token = std::getenv("TRACE_PROVIDER_TOKEN");
    auto endpoint_with_token = [&](const ProviderSelection& sel) {
        RemoteEndpoint endpoint = sel.endpoint;
        if (token) endpoint.auth_token = token;
        if (endpoint.url.empty())
            throw ValidationError(
                "config: remote provider selected without a url");
        return endpoint;
    };

    ProviderSuite suite = ProviderSuite::stubs();
    if (config.embedding.kind == "remote") {
        suite.embedding = std::make_shared<CachingEmbedder>(
            std::make_shared<RemoteEmbedder>(
                endpoint_with_token(config.embedding),
                StubEmbedder::kDimension));
    }
    if (config.entailment.kind == "remote") {
        suite.entailment = std::make_shared<RemoteEntailer>(
            endpoint_with_token(config.entailment));
    }
    if (config.judge.kind == "remote") {
        suite.judge =
            std::make_shared<RemoteJudge>(endpoint_with_token(config.judge));
    }
    return suite;
}

}  // namespace trace
