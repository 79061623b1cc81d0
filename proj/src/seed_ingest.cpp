#include "agora/seed_ingest.hpp"

#include "agora/gateway.hpp"

namespace agora {

std::int64_t WhitespaceTokenCounter::count(const std::string& text) const {
    return whitespace_token_count(text);
}

void TokenBudgetPolicy::check() const {
    if (max_tokens <= 0) throw Error(ErrorKind::Config, "token budget must be > 0");
    if (!counter) throw Error(ErrorKind::Config, "token budget policy has no counter");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind, Domain domain,
                     const std::string& format, std::vector<std::string>* warnings) {
    Dataset ds = read_dataset_file(path, kind, domain, format, warnings);
    auto violations = validate_dataset(ds);
    if (!violations.empty()) {
        std::string msg = "dataset '" + path.string() + "' failed validation:";
        for (const auto& v : violations) msg += " [" + v.rule + "]";
        throw Error(ErrorKind::Io, msg);
    }
    return ds;
}

FilterResult filter_by_token_budget(const Dataset& dataset, const TokenBudgetPolicy& policy) {
    policy.check();
    FilterResult result;
    result.kept.domain = dataset.domain;
    result.kept.kind = dataset.kind;
    for (const Instance& inst : dataset.instances) {
        std::int64_t tokens;
        try {
            tokens = policy.counter->count(inst.instruction);
            if (inst.response.has_value()) tokens += policy.counter->count(*inst.response);
        } catch (const std::exception& e) {
            throw Error(ErrorKind::Io,
                        "token counter failed on instance '" + inst.id + "': " + e.what());
        }
        if (tokens <= policy.max_tokens)
            result.kept.instances.push_back(inst);
        else
            ++result.dropped_count;
    }
    return result;
}

const std::string& domain_classification_prompt() {
    static const std::string prompt =
        "Classify whether the following \"Instance\" consisted of an \"Instruction\" and "
        "\"Response\" is either related to:\n"
        "\n"
        "1. Math-related task such as requiring an answer to a problem, proving a theorem or "
        "explaining about a mathematical concept.\n"
        "\n"
        "2. Other tasks\n"
        "\n"
        "Provide your answer in only either \"1\" or \"2\", without any greeting message or "
        "comment.\n"
        "\n"
        "# Instance:\n"
        "\n"
        "Instruction: <input>\n"
        "\n"
        "Response: <output>\n"
        "\n"
        "# Decision:";
    return prompt;
}

std::string render_domain_classification_prompt(const Instance& instance) {
    std::string prompt = domain_classification_prompt();
    auto replace_all = [&](const std::string& token, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = prompt.find(token, pos)) != std::string::npos) {
            prompt.replace(pos, token.size(), value);
            pos += value.size();
        }
    };
    replace_all("<input>", instance.instruction);
    replace_all("<output>", instance.response.value_or(""));
    return prompt;
}

namespace {

std::optional<SeedDomainLabel> interpret_decision(const std::string& reply) {
    std::size_t b = reply.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::nullopt;
    std::size_t e = reply.find_first_of(" \t\r\n", b);
    std::string token = reply.substr(b, e == std::string::npos ? std::string::npos : e - b);
    if (!token.empty() && token.back() == '.') token.pop_back();
    if (token == "1") return SeedDomainLabel::Math;
    if (token == "2") return SeedDomainLabel::Other;
    return std::nullopt;
}

}  // namespace

SeedDomainLabel classify_math_domain(const Instance& instance, const JudgeFn& judge) {
    const std::string prompt = render_domain_classification_prompt(instance);
    std::string reply;
    for (int attempt = 0; attempt < 2; ++attempt) {
        reply = judge(prompt);
        if (auto label = interpret_decision(reply)) return *label;
    }
    throw Error(ErrorKind::Scoring,
                "domain classification for '" + instance.id + "' returned neither \"1\" nor \"2\"; raw reply: " +
                    reply);
}

std::vector<Instance> sample_demonstrations(const Dataset& pool, std::size_t k, SplitMix64& rng) {
    if (pool.size() < k)
        throw Error(ErrorKind::Precondition,
                    "demonstration sampling requires " + std::to_string(k) +
                        " instances but pool has " + std::to_string(pool.size()));
    std::vector<std::size_t> picks = sample_indices(rng, pool.size(), k);
    std::vector<Instance> demos;
    demos.reserve(k);
    for (std::size_t i : picks) demos.push_back(pool.instances[i]);
    return demos;
}

std::vector<Instance> sample_demonstrations(const Dataset& pool, std::size_t k,
                                            std::uint64_t rng_seed) {
    SplitMix64 rng(rng_seed);
    return sample_demonstrations(pool, k, rng);
}

}  // namespace agora
