#pragma once

#include <filesystem>
#include <optional>

#include "agora/gateway.hpp"
#include "agora/rng.hpp"

namespace agora {

enum class RubricMode { ResponseQuality, InstructionDifficulty };

std::string to_string(RubricMode m);

// A judge prompt: the shared evaluation frame plus a per-(mode, domain)
// rubric describing scores 1-5. Replies carry feedback text followed by
// "[RESULT] <n>".
struct RubricPrompt {
    RubricMode mode = RubricMode::ResponseQuality;
    Domain domain = Domain::Math;
    std::string rubric_text;
    std::string judge_template;  // slots: {instruction}, {response}, {score_rubric}

    static RubricPrompt standard(RubricMode mode, Domain domain);

    void check() const;  // rubric must describe exactly scores 1..5
    std::string render(const Instance& instance) const;
};

struct JudgeVerdict {
    int score = 0;  // in 1..5
    std::string feedback;
};

// Renders the rubric frame, parses "<feedback> [RESULT] <n>"; one re-prompt
// on parse failure. Scores outside 1..5 fail immediately.
JudgeVerdict judge_score(const Instance& instance, const RubricPrompt& rubric, Gateway& gateway,
                         const GeneratorProfile& judge);

// Parsing only (exposed for the template-suite tests). Returns nullopt when
// the reply lacks a parseable "[RESULT] <n>"; throws for n outside 1..5.
std::optional<JudgeVerdict> parse_judge_reply(const std::string& reply);

// exp(-(1/T) * sum logprobs) of the response conditioned on the instruction.
double response_perplexity(const Instance& instance, Gateway& gateway,
                           const GeneratorProfile& scorer);
double perplexity_from_logprobs(const std::vector<double>& logprobs);

struct DiversityResult {
    double mean_cosine_similarity = 0.0;
    double mean_cosine_distance = 0.0;  // 1 - similarity
    std::uint64_t pairs_evaluated = 0;
};

// Mean pairwise cosine similarity over min(pair_budget, C(n,2)) distinct
// unordered pairs sampled uniformly without replacement (all pairs when the
// budget covers them). Deterministic for a fixed rng_seed.
DiversityResult diversity(const std::vector<std::string>& texts, Gateway& gateway,
                          const GeneratorProfile& embedder, std::uint64_t pair_budget,
                          std::uint64_t rng_seed);
DiversityResult diversity_from_vectors(const std::vector<std::vector<double>>& vectors,
                                       std::uint64_t pair_budget, std::uint64_t rng_seed);

double reward_score(const Instance& instance, Gateway& gateway, const GeneratorProfile& scorer);

struct InstanceMetrics {
    std::string instance_id;
    std::optional<int> judge_instruction_difficulty_a;
    std::optional<int> judge_instruction_difficulty_b;
    std::optional<int> judge_response_quality_a;
    std::optional<int> judge_response_quality_b;
    std::optional<double> reward;
    std::optional<double> perplexity;
};

std::string instance_metrics_to_line(const InstanceMetrics& m);
InstanceMetrics instance_metrics_from_line(const std::string& line);
void write_instance_metrics_file(const std::vector<InstanceMetrics>& rows,
                                 const std::filesystem::path& path);

// Arithmetic means over scored instances plus corpus-level diversity and the
// externally supplied problem-solving average. Metrics with no measurements
// stay missing; if everything is missing the summary is an error.
MetricVector summarize(const std::string& generator_id, const SettingKey& setting,
                       const std::vector<InstanceMetrics>& per_instance,
                       std::optional<DiversityResult> instruction_diversity,
                       std::optional<DiversityResult> response_diversity,
                       std::optional<double> problem_solving_avg,
                       bool diversity_as_distance = true);

struct IntrinsicEvalConfig {
    std::optional<GeneratorProfile> judge_a;
    std::optional<GeneratorProfile> judge_b;
    std::optional<GeneratorProfile> reward_profile;
    std::optional<GeneratorProfile> perplexity_profile;
    std::optional<GeneratorProfile> embedding_profile;
    std::size_t judge_sample_size = 500;  // 0 = the whole corpus
    std::uint64_t rng_seed = 0;
    std::uint64_t pair_budget = 50000;
    bool diversity_as_distance = true;  // store c-dist (default) or similarity
    std::optional<double> problem_solving_avg;
};

struct IntrinsicEvalResult {
    std::vector<InstanceMetrics> per_instance;
    MetricVector summary;
    std::size_t sampled_instances = 0;
};

// Scores a generated corpus: per-instance metrics over a seeded subsample,
// diversity over the full corpus, then summarize().
IntrinsicEvalResult evaluate_corpus(const Dataset& corpus, const std::string& generator_id,
                                    const SettingKey& setting, Gateway& gateway,
                                    const IntrinsicEvalConfig& config);

}  // namespace agora
