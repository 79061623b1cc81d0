#include "agora/gateway.hpp"

#include <cmath>
#include <condition_variable>
#include <thread>

namespace agora {

std::int64_t whitespace_token_count(const std::string& text) {
    std::int64_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_token) ++count;
        in_token = !ws;
    }
    return count;
}

void UsageLedger::record(const GeneratorProfile& profile, std::int64_t prompt_tokens,
                         std::int64_t completion_tokens, std::int64_t requests) {
    std::lock_guard lock(mutex_);
    UsageEntry& e = entries_[profile.name];
    e.prompt_tokens += prompt_tokens;
    e.completion_tokens += completion_tokens;
    e.request_count += requests;
    e.cost += Cost::of_tokens(prompt_tokens, profile.input_price);
    e.cost += Cost::of_tokens(completion_tokens, profile.output_price);
}

UsageEntry UsageLedger::entry(const std::string& profile_name) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(profile_name);
    return it == entries_.end() ? UsageEntry{} : it->second;
}

Cost UsageLedger::cost(const std::string& profile_name) const { return entry(profile_name).cost; }

Cost UsageLedger::total_cost() const {
    std::lock_guard lock(mutex_);
    Cost total;
    for (const auto& [name, e] : entries_) total += e.cost;
    return total;
}

std::map<std::string, UsageEntry> UsageLedger::snapshot() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

void UsageLedger::restore(const std::map<std::string, UsageEntry>& entries) {
    std::lock_guard lock(mutex_);
    entries_ = entries;
}

void UsageLedger::merge(const UsageLedger& other) {
    auto theirs = other.snapshot();
    std::lock_guard lock(mutex_);
    for (const auto& [name, e] : theirs) {
        UsageEntry& mine = entries_[name];
        mine.prompt_tokens += e.prompt_tokens;
        mine.completion_tokens += e.completion_tokens;
        mine.request_count += e.request_count;
        mine.cost += e.cost;
    }
}

// Token-bucket request pacing plus an in-flight cap, one per endpoint.
class Gateway::EndpointLimiter {
public:
    EndpointLimiter(double rps, int max_in_flight)
        : rps_(rps),
          max_in_flight_(max_in_flight),
          tokens_(rps > 0 ? 1.0 : 0.0),
          last_refill_(std::chrono::steady_clock::now()) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
        ++in_flight_;
        if (rps_ <= 0) return;
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            double deficit = 1.0 - tokens_;
            auto wait = std::chrono::duration<double>(deficit / rps_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            --in_flight_;
        }
        cv_.notify_one();
    }

private:
    void refill() {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_refill_).count();
        last_refill_ = now;
        tokens_ = std::min(tokens_ + elapsed * rps_, static_cast<double>(max_in_flight_));
    }

    std::mutex mutex_;
    std::condition_variable cv_;
    double rps_;
    int max_in_flight_;
    int in_flight_ = 0;
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
};

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayConfig config)
    : provider_(std::move(provider)), config_(config) {}

Gateway::~Gateway() = default;

Gateway::EndpointLimiter& Gateway::limiter_for(const std::string& endpoint) {
    std::lock_guard lock(limiters_mutex_);
    auto& slot = limiters_[endpoint];
    if (!slot)
        slot = std::make_unique<EndpointLimiter>(config_.requests_per_second,
                                                 config_.max_in_flight);
    return *slot;
}

template <typename Fn>
auto Gateway::with_retries(const std::string& what, Fn&& attempt, int* attempts_out)
    -> decltype(attempt()) {
    int attempts = 0;
    std::chrono::milliseconds delay = config_.backoff_base;
    for (;;) {
        ++attempts;
        try {
            auto result = attempt();
            if (attempts_out) *attempts_out = attempts;
            return result;
        } catch (const TransientError& e) {
            if (attempts > config_.retry_budget) {
                throw Error(ErrorKind::Gateway, what + ": retries exhausted after " +
                                                    std::to_string(attempts) +
                                                    " attempts (last: " + e.what() + ")");
            }
            std::this_thread::sleep_for(delay);
            delay = std::min(delay * 2, config_.backoff_cap);
        }
    }
}

ChatResult Gateway::chat(const GeneratorProfile& profile, const ChatRequest& request) {
    auto& limiter = limiter_for(profile.endpoint);
    int attempts = 0;
    ChatResult result = with_retries(
        "chat(" + profile.name + ")",
        [&] {
            limiter.acquire();
            struct Release {
                EndpointLimiter& l;
                ~Release() { l.release(); }
            } release{limiter};
            return provider_->chat(profile, request);
        },
        &attempts);
    result.attempts = attempts;
    ledger_.record(profile, result.prompt_tokens, result.completion_tokens, attempts);
    return result;
}

LogprobResult Gateway::score_continuation(const GeneratorProfile& profile,
                                          const std::string& context,
                                          const std::string& continuation) {
    if (continuation.empty()) throw Error(ErrorKind::Precondition, "empty continuation");
    auto& limiter = limiter_for(profile.endpoint);
    int attempts = 0;
    LogprobResult result = with_retries(
        "score_continuation(" + profile.name + ")",
        [&] {
            limiter.acquire();
            struct Release {
                EndpointLimiter& l;
                ~Release() { l.release(); }
            } release{limiter};
            return provider_->score_continuation(profile, context, continuation);
        },
        &attempts);
    ledger_.record(profile, whitespace_token_count(context) + whitespace_token_count(continuation),
                   0, attempts);
    return result;
}

std::vector<std::vector<double>> Gateway::embed(const GeneratorProfile& profile,
                                                const std::vector<std::string>& texts) {
    if (texts.empty()) throw Error(ErrorKind::Precondition, "embed: empty input list");
    auto& limiter = limiter_for(profile.endpoint);
    int attempts = 0;
    auto vectors = with_retries(
        "embed(" + profile.name + ")",
        [&] {
            limiter.acquire();
            struct Release {
                EndpointLimiter& l;
                ~Release() { l.release(); }
            } release{limiter};
            return provider_->embed(profile, texts);
        },
        &attempts);
    if (vectors.size() != texts.size())
        throw Error(ErrorKind::Gateway, "embed: provider returned " +
                                            std::to_string(vectors.size()) + " vectors for " +
                                            std::to_string(texts.size()) + " inputs");
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size())
            throw Error(ErrorKind::Gateway, "embed: dimension mismatch across batch");
    }
    std::int64_t tokens = 0;
    for (const auto& t : texts) tokens += whitespace_token_count(t);
    ledger_.record(profile, tokens, 0, attempts);
    return vectors;
}

double Gateway::reward(const GeneratorProfile& profile, const std::string& instruction,
                       const std::string& response) {
    auto& limiter = limiter_for(profile.endpoint);
    int attempts = 0;
    double score = with_retries(
        "reward(" + profile.name + ")",
        [&] {
            limiter.acquire();
            struct Release {
                EndpointLimiter& l;
                ~Release() { l.release(); }
            } release{limiter};
            return provider_->reward(profile, instruction, response);
        },
        &attempts);
    ledger_.record(profile,
                   whitespace_token_count(instruction) + whitespace_token_count(response), 0,
                   attempts);
    return score;
}

}  // namespace agora
