#pragma once
// Flat `key = value` configuration: metric hyperparameters, provider
// selection, and agent-subprocess settings. Command-line flags override file
// values; the only environment input is TRACE_PROVIDER_TOKEN for remote
// provider auth.

#include <istream>
#include <string>

#include "trace/model.hpp"
#include "trace/providers.hpp"

namespace trace {

struct ProviderSelection {
    std::string kind = "stub";  // stub | remote
    RemoteEndpoint endpoint;
};

struct ProviderConfig {
    ProviderSelection embedding;
    ProviderSelection entailment;
    ProviderSelection judge;
};

struct EngineConfig {
    TraceConfig metrics;
    ProviderConfig providers;
    int agent_timeout_ms = 30000;

    void validate() const { metrics.validate(); }
};

// Parses the key=value format ('#' comments, blank lines allowed). Unknown
// keys are an error; values are validated after the full file is read.
EngineConfig parse_config(std::istream& in);
EngineConfig load_config_file(const std::string& path);

// Builds the provider stack from the selection; remote endpoints read their
// bearer token from TRACE_PROVIDER_TOKEN.
ProviderSuite make_provider_suite(const ProviderConfig& config);

}  // namespace trace
