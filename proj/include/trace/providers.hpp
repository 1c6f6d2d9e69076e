#pragma once
// Pluggable measurement providers: embedding, entailment, answer judgment.
// Each interface has a deterministic offline stub (so the full metric suite
// runs with zero network) and a remote HTTP client selected by config.

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace trace {

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The provider is down: every attempt within the retry budget failed.
// Unlike an isolated bad response (repaired or nulled per metric), this
// aborts the batch.
class ProviderUnavailable : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // Unit-norm vector of fixed dimension; deterministic per input.
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
};

class EntailmentProvider {
public:
    virtual ~EntailmentProvider() = default;
    // P(claim | evidence) in [0,1]; deterministic per input.
    virtual double entail(const std::string& claim,
                          const std::vector<std::string>& evidence) = 0;
};

class JudgeProvider {
public:
    virtual ~JudgeProvider() = default;
    virtual bool judge(const std::string& final_answer,
                       const std::string& ground_truth) = 0;
};

// Lowercase, trim, strip ASCII punctuation, collapse whitespace. No Unicode
// folding: "naïve" and "naive" stay distinct. Shared by the stub judge and
// the canonical action strings used for reproducibility scoring.
std::string normalize_text(std::string_view text);

// Lowercased alphanumeric tokens of `text`, deduplicated, in first-seen order.
std::vector<std::string> distinct_tokens(std::string_view text);

// d=64 embedding from hashed character trigram counts of the lowercased
// text, L2-normalized. Texts with no trigram map to the zero vector.
class StubEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDimension = 64;
    std::vector<double> embed(const std::string& text) override;
    std::size_t dimension() const override { return kDimension; }
};

// Token-overlap entailment: |tokens(claim) ∩ tokens(evidence)| / |tokens(claim)|.
class StubEntailer final : public EntailmentProvider {
public:
    double entail(const std::string& claim,
                  const std::vector<std::string>& evidence) override;
};

// Normalized exact match.
class StubJudge final : public JudgeProvider {
public:
    bool judge(const std::string& final_answer,
               const std::string& ground_truth) override;
};

struct RemoteEndpoint {
    std::string url;
    int timeout_ms = 10000;
    int max_retries = 2;
    int max_concurrency = 4;
    std::string auth_token;  // sent as a bearer token when non-empty
};

// Bounds the number of in-flight remote requests per provider.
class ConcurrencyGate {
public:
    explicit ConcurrencyGate(int limit) : available_(limit < 1 ? 1 : limit) {}
    void acquire();
    void release();

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

// Response post-processing, shared with tests: out-of-range remote outputs
// are repaired with a warning instead of rejected, so one flaky response
// cannot abort an evaluation batch.

// Rescales to unit norm when off by more than 1e-6; appends a warning.
void enforce_unit_norm(std::vector<double>& vec,
                       std::vector<std::string>* warnings);
// Clamps to [0,1]; appends a warning when clamping occurred.
double clamp_probability(double p, std::vector<std::string>* warnings);

class RemoteEmbedder final : public EmbeddingProvider {
public:
    RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension);
    std::vector<double> embed(const std::string& text) override;
    std::size_t dimension() const override { return dimension_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    RemoteEndpoint endpoint_;
    std::size_t dimension_;
    ConcurrencyGate gate_;
    std::vector<std::string> warnings_;
    std::mutex mutex_;
};

class RemoteEntailer final : public EntailmentProvider {
public:
    explicit RemoteEntailer(RemoteEndpoint endpoint);
    double entail(const std::string& claim,
                  const std::vector<std::string>& evidence) override;
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    RemoteEndpoint endpoint_;
    ConcurrencyGate gate_;
    std::vector<std::string> warnings_;
    std::mutex mutex_;
};

class RemoteJudge final : public JudgeProvider {
public:
    explicit RemoteJudge(RemoteEndpoint endpoint);
    bool judge(const std::string& final_answer,
               const std::string& ground_truth) override;

private:
    RemoteEndpoint endpoint_;
    ConcurrencyGate gate_;
};

// Memoizing decorator. Providers are referentially transparent per process
// run, so caching by input is sound; the cache is mutex-guarded for use from
// concurrent scoring workers.
class CachingEmbedder final : public EmbeddingProvider {
public:
    explicit CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner)
        : inner_(std::move(inner)) {}
    std::vector<double> embed(const std::string& text) override;
    std::size_t dimension() const override { return inner_->dimension(); }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::unordered_map<std::string, std::vector<double>> cache_;
    std::mutex mutex_;
};

struct ProviderSuite {
    std::shared_ptr<EmbeddingProvider> embedding;
    std::shared_ptr<EntailmentProvider> entailment;
    std::shared_ptr<JudgeProvider> judge;

    static ProviderSuite stubs();
};

}  // namespace trace
