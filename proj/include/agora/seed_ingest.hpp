#pragma once

#include <functional>
#include <memory>

#include "agora/dataset.hpp"
#include "agora/jsonl.hpp"
#include "agora/rng.hpp"

namespace agora {

// Pluggable token counting. The engine is tokenizer-agnostic: the desk-scale
// default counts whitespace-delimited words, and conformance with any real
// tokenizer is a configuration concern, not code.
class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::int64_t count(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

class WhitespaceTokenCounter : public TokenCounter {
public:
    std::int64_t count(const std::string& text) const override;
    std::string name() const override { return "whitespace"; }
};

struct TokenBudgetPolicy {
    std::int64_t max_tokens = 4096;
    std::shared_ptr<TokenCounter> counter = std::make_shared<WhitespaceTokenCounter>();

    void check() const;
};

// Loads a line-delimited dataset ("canonical" schema or the "minimal"
// {instruction, response} adapter with auto-assigned ids) and validates it.
Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind, Domain domain,
                     const std::string& format = "canonical",
                     std::vector<std::string>* warnings = nullptr);

struct FilterResult {
    Dataset kept;
    std::size_t dropped_count = 0;
};

// Keeps exactly the instances whose instruction+response token count is
// <= max_tokens (the boundary is inclusive); order is preserved.
FilterResult filter_by_token_budget(const Dataset& dataset, const TokenBudgetPolicy& policy);

enum class SeedDomainLabel { Math, Other };

// A chat-capable judge handle: renders one user prompt, returns reply text.
using JudgeFn = std::function<std::string(const std::string& prompt)>;

// The classification prompt sent to the judge, with <input>/<output> slots
// for the instance's instruction/response.
const std::string& domain_classification_prompt();
std::string render_domain_classification_prompt(const Instance& instance);

// Maps a reply whose first non-whitespace token is "1" to Math and "2" to
// Other; retries once, then fails carrying the raw reply.
SeedDomainLabel classify_math_domain(const Instance& instance, const JudgeFn& judge);

// k distinct instances sampled uniformly without replacement; deterministic
// for a fixed seed (see docs/determinism.md).
std::vector<Instance> sample_demonstrations(const Dataset& pool, std::size_t k,
                                            std::uint64_t rng_seed);
std::vector<Instance> sample_demonstrations(const Dataset& pool, std::size_t k, SplitMix64& rng);

}  // namespace agora
