#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agora/errors.hpp"
#include "agora/money.hpp"

namespace agora {

enum class Domain { Math, Code, InstructionFollowing };
enum class Method { InstanceGeneration, ResponseGeneration, QualityEnhancement };
enum class Origin { Seed, Generated, Enhanced };
enum class DatasetKind { Seed, InstructionOnly, RawPairs, Generated };

std::string to_string(Domain d);
std::string to_string(Method m);
std::string to_string(Origin o);
std::string to_string(DatasetKind k);
Domain domain_from_string(const std::string& s);
Method method_from_string(const std::string& s);
Origin origin_from_string(const std::string& s);
DatasetKind dataset_kind_from_string(const std::string& s);

// One of the nine (domain, method) cells.
struct SettingKey {
    Domain domain = Domain::Math;
    Method method = Method::InstanceGeneration;

    std::string slug() const;  // e.g. "math.instance_generation"
    static SettingKey from_slug(const std::string& slug);
    static std::vector<SettingKey> all();  // exactly nine, fixed order

    friend bool operator==(const SettingKey&, const SettingKey&) = default;
    friend auto operator<=>(const SettingKey&, const SettingKey&) = default;
};

// One (instruction, response) pair; the atom of every dataset.
struct Instance {
    std::string id;
    std::string instruction;
    std::optional<std::string> response;  // absent only in instruction-only collections
    Origin origin = Origin::Seed;
    std::optional<std::string> generator_id;
    std::optional<SettingKey> setting;

    friend bool operator==(const Instance&, const Instance&) = default;
};

struct Dataset {
    std::vector<Instance> instances;
    Domain domain = Domain::Math;
    DatasetKind kind = DatasetKind::Seed;

    std::size_t size() const noexcept { return instances.size(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
    std::string instance_id;  // empty for dataset-level violations
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

// Checks every Instance/Dataset invariant. Never throws; an empty result
// means the dataset is valid.
std::vector<Violation> validate_dataset(const Dataset& dataset);

struct SamplingParams {
    double temperature = 0.0;
    double top_p = 0.95;
    int max_new_tokens = 1024;
    double repetition_penalty = 1.03;

    friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

enum class ProviderKind { Mock, OpenAiCompatible };

struct GeneratorProfile {
    std::string name;
    ProviderKind provider = ProviderKind::Mock;
    std::string endpoint;  // base URI for HTTP providers
    std::string model_id;
    Price input_price;   // per 1e6 prompt tokens
    Price output_price;  // per 1e6 completion tokens
    SamplingParams sampling;

    // prices >= 0, temperature >= 0, 0 < top_p <= 1
    void check() const;
    // AGORA_KEY_<NAME> with the profile name upper-cased, non-alnum -> '_'
    std::string credential_env_var() const;
};

// A benchmark score triple used to compute performance-gap-recovered.
struct ScoreRecord {
    std::string benchmark;
    std::string generator_id;
    SettingKey setting;
    double score_base = 0.0;     // few-shot base model
    double score_trained = 0.0;  // zero-shot model trained on the generated corpus
    double score_ref = 0.0;      // zero-shot reference model

    friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// The nine per-corpus intrinsic features for one (generator, setting) cell.
// Missing measurements (e.g. no reward endpoint configured) stay nullopt and
// are dropped column-wise before any analysis; they are never imputed.
struct MetricVector {
    std::string generator_id;
    SettingKey setting;

    std::optional<double> judge_instruction_difficulty_a;
    std::optional<double> judge_instruction_difficulty_b;
    std::optional<double> instruction_diversity;
    std::optional<double> judge_response_quality_a;
    std::optional<double> judge_response_quality_b;
    std::optional<double> reward_score;
    std::optional<double> response_perplexity;
    std::optional<double> response_diversity;
    std::optional<double> problem_solving_avg;

    static const std::array<std::string, 9>& feature_names();
    std::optional<double> feature(std::size_t index) const;
    void set_feature(std::size_t index, std::optional<double> value);
};

// id assigned to generated/enhanced instances: "<setting>-<generator>-<index>"
// with the index zero-padded to six digits.
std::string make_instance_id(const SettingKey& setting, const std::string& generator_id,
                             std::uint64_t index);

}  // namespace agora
