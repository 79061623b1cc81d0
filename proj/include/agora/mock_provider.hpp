#pragma once

#include <atomic>
#include <cstdint>
#include <optional>

#include "agora/gateway.hpp"
#include "agora/output_parse.hpp"
#include "agora/prompt.hpp"

namespace agora {

// Deterministic in-tree provider so the full pipeline runs offline.
// Replies are pure functions of (prompt bytes, seed, behavior knobs); two
// identical runs therefore produce identical transcripts.
struct MockBehavior {
    enum class ChatMode {
        Auto,      // detect judge/classifier prompts, else act per `method`
        Echo,      // reply with the last user message
        Garbage,   // reply with text no parser accepts
        FixedText, // reply with `fixed_text`
    };
    enum class RefineMode { Annotate, UppercaseResponse, Identity };

    ChatMode chat_mode = ChatMode::Auto;
    Method method = Method::InstanceGeneration;
    OutputFormat format = OutputFormat::FreeformTagged;
    int pairs_per_call = 1;
    RefineMode refine_mode = RefineMode::Annotate;
    std::string fixed_text;
    std::uint64_t seed = 0;

    // Logprob scoring: a fixed per-token value, or hash-derived when unset.
    std::optional<double> per_token_logprob;

    std::size_t embed_dim = 64;

    // Scalar scorer: hash-derived by default; response length when set.
    bool reward_is_response_length = false;

    // Transport fault injection: the first `fail_attempts` chat attempts
    // raise a transient error with `fail_status`.
    int fail_attempts = 0;
    int fail_status = 429;
};

class MockProvider : public Provider {
public:
    explicit MockProvider(MockBehavior behavior = {}) : behavior_(behavior) {}

    ChatResult chat(const GeneratorProfile& profile, const ChatRequest& request) override;
    LogprobResult score_continuation(const GeneratorProfile& profile, const std::string& context,
                                     const std::string& continuation) override;
    std::vector<std::vector<double>> embed(const GeneratorProfile& profile,
                                           const std::vector<std::string>& texts) override;
    double reward(const GeneratorProfile& profile, const std::string& instruction,
                  const std::string& response) override;

    // Concurrency instrumentation for the in-flight-limit invariant.
    int max_observed_in_flight() const noexcept { return max_in_flight_.load(); }
    std::int64_t calls() const noexcept { return calls_.load(); }

    MockBehavior& behavior() noexcept { return behavior_; }

private:
    std::string reply_for(const std::string& prompt);

    MockBehavior behavior_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::atomic<std::int64_t> calls_{0};
    std::atomic<int> remaining_failures_{-1};
};

// FNV-1a 64-bit; the mock's only source of "randomness".
std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed = 0);

}  // namespace agora
