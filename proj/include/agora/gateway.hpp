#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agora/dataset.hpp"
#include "agora/money.hpp"

namespace agora {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

enum class FinishReason { Stop, Length, Error };

struct ChatRequest {
    std::vector<ChatMessage> messages;
    SamplingParams sampling;
};

struct ChatResult {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    FinishReason finish_reason = FinishReason::Stop;
    int attempts = 1;  // transport attempts spent on this result
};

struct TokenLogprob {
    std::string token_text;
    double logprob = 0.0;  // log-probability, <= 0
};

struct LogprobResult {
    std::vector<TokenLogprob> tokens;  // exactly the continuation tokens
    std::size_t offset = 0;            // index of the first continuation token in the full stream
};

// Thrown by providers for failures worth retrying (timeouts, 429/5xx).
class TransientError : public Error {
public:
    TransientError(std::string message, int status = 0)
        : Error(ErrorKind::Gateway, std::move(message)), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

struct UsageEntry {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t request_count = 0;
    Cost cost;
};

// Per-generator usage accumulators. Internally synchronized; cost arithmetic
// is exact decimal (see money.hpp).
class UsageLedger {
public:
    void record(const GeneratorProfile& profile, std::int64_t prompt_tokens,
                std::int64_t completion_tokens, std::int64_t requests = 1);
    UsageEntry entry(const std::string& profile_name) const;
    Cost cost(const std::string& profile_name) const;
    Cost total_cost() const;
    std::map<std::string, UsageEntry> snapshot() const;
    void restore(const std::map<std::string, UsageEntry>& entries);
    void merge(const UsageLedger& other);

private:
    mutable std::mutex mutex_;
    std::map<std::string, UsageEntry> entries_;
};

// Transport backend. Implementations perform a single attempt; the Gateway
// wraps retries, rate limiting and accounting around them.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResult chat(const GeneratorProfile& profile, const ChatRequest& request) = 0;
    virtual LogprobResult score_continuation(const GeneratorProfile& profile,
                                             const std::string& context,
                                             const std::string& continuation) = 0;
    virtual std::vector<std::vector<double>> embed(const GeneratorProfile& profile,
                                                   const std::vector<std::string>& texts) = 0;
    virtual double reward(const GeneratorProfile& profile, const std::string& instruction,
                          const std::string& response) = 0;
};

struct GatewayConfig {
    int retry_budget = 3;              // extra attempts after the first
    std::chrono::milliseconds backoff_base{100};
    std::chrono::milliseconds backoff_cap{5000};
    double requests_per_second = 0.0;  // 0 = unthrottled
    int max_in_flight = 4;
};

// Uniform client over chat, logprob scoring, embeddings and scalar scoring.
// Shareable across worker threads; all public operations are safe for
// concurrent invocation.
class Gateway {
public:
    Gateway(std::shared_ptr<Provider> provider, GatewayConfig config = {});
    ~Gateway();

    ChatResult chat(const GeneratorProfile& profile, const ChatRequest& request);
    LogprobResult score_continuation(const GeneratorProfile& profile, const std::string& context,
                                     const std::string& continuation);
    std::vector<std::vector<double>> embed(const GeneratorProfile& profile,
                                           const std::vector<std::string>& texts);
    double reward(const GeneratorProfile& profile, const std::string& instruction,
                  const std::string& response);

    UsageLedger& ledger() noexcept { return ledger_; }
    const UsageLedger& ledger() const noexcept { return ledger_; }
    Cost cost(const GeneratorProfile& profile) const { return ledger_.cost(profile.name); }
    const GatewayConfig& config() const noexcept { return config_; }

private:
    class EndpointLimiter;
    EndpointLimiter& limiter_for(const std::string& endpoint);
    template <typename Fn>
    auto with_retries(const std::string& what, Fn&& attempt, int* attempts_out)
        -> decltype(attempt());

    std::shared_ptr<Provider> provider_;
    GatewayConfig config_;
    UsageLedger ledger_;
    std::mutex limiters_mutex_;
    std::map<std::string, std::unique_ptr<EndpointLimiter>> limiters_;
};

// Estimated token count used by offline paths (the mock provider and dry-run
// cost ceilings): whitespace-delimited word count.
std::int64_t whitespace_token_count(const std::string& text);

}  // namespace agora
