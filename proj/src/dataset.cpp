#include "agora/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace agora {
namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Domain d) {
    switch (d) {
        case Domain::Math: return "math";
        case Domain::Code: return "code";
        case Domain::InstructionFollowing: return "instruction_following";
    }
    return "?";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::InstanceGeneration: return "instance_generation";
        case Method::ResponseGeneration: return "response_generation";
        case Method::QualityEnhancement: return "quality_enhancement";
    }
    return "?";
}

std::string to_string(Origin o) {
    switch (o) {
        case Origin::Seed: return "seed";
        case Origin::Generated: return "generated";
        case Origin::Enhanced: return "enhanced";
    }
    return "?";
}

std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::Seed: return "seed";
        case DatasetKind::InstructionOnly: return "instruction_only";
        case DatasetKind::RawPairs: return "raw_pairs";
        case DatasetKind::Generated: return "generated";
    }
    return "?";
}

Domain domain_from_string(const std::string& s) {
    if (s == "math") return Domain::Math;
    if (s == "code") return Domain::Code;
    if (s == "instruction_following") return Domain::InstructionFollowing;
    throw Error(ErrorKind::Config, "unknown domain '" + s + "'");
}

Method method_from_string(const std::string& s) {
    if (s == "instance_generation") return Method::InstanceGeneration;
    if (s == "response_generation") return Method::ResponseGeneration;
    if (s == "quality_enhancement") return Method::QualityEnhancement;
    throw Error(ErrorKind::Config, "unknown method '" + s + "'");
}

Origin origin_from_string(const std::string& s) {
    if (s == "seed") return Origin::Seed;
    if (s == "generated") return Origin::Generated;
    if (s == "enhanced") return Origin::Enhanced;
    throw Error(ErrorKind::Config, "unknown origin '" + s + "'");
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "seed") return DatasetKind::Seed;
    if (s == "instruction_only") return DatasetKind::InstructionOnly;
    if (s == "raw_pairs") return DatasetKind::RawPairs;
    if (s == "generated") return DatasetKind::Generated;
    throw Error(ErrorKind::Config, "unknown dataset kind '" + s + "'");
}

std::string SettingKey::slug() const { return to_string(domain) + "." + to_string(method); }

SettingKey SettingKey::from_slug(const std::string& slug) {
    std::size_t dot = slug.find('.');
    if (dot == std::string::npos)
        throw Error(ErrorKind::Config, "malformed setting slug '" + slug + "'");
    return SettingKey{domain_from_string(slug.substr(0, dot)),
                      method_from_string(slug.substr(dot + 1))};
}

std::vector<SettingKey> SettingKey::all() {
    std::vector<SettingKey> keys;
    for (Domain d : {Domain::Math, Domain::Code, Domain::InstructionFollowing})
        for (Method m : {Method::InstanceGeneration, Method::ResponseGeneration,
                         Method::QualityEnhancement})
            keys.push_back(SettingKey{d, m});
    return keys;
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
    std::vector<Violation> violations;
    std::unordered_set<std::string> seen;
    for (const Instance& inst : dataset.instances) {
        if (!seen.insert(inst.id).second)
            violations.push_back({inst.id, "duplicate id: " + inst.id});
        if (trimmed(inst.instruction).empty())
            violations.push_back({inst.id, "empty instruction"});
        bool instruction_only = dataset.kind == DatasetKind::InstructionOnly;
        if (!inst.response.has_value()) {
            if (!instruction_only)
                violations.push_back({inst.id, "missing response outside instruction-only dataset"});
        } else if (trimmed(*inst.response).empty()) {
            violations.push_back({inst.id, "empty response"});
        }
    }
    return violations;
}

void GeneratorProfile::check() const {
    if (input_price.micros() < 0 || output_price.micros() < 0)
        throw Error(ErrorKind::Config, "profile '" + name + "': prices must be >= 0");
    if (sampling.temperature < 0)
        throw Error(ErrorKind::Config, "profile '" + name + "': temperature must be >= 0");
    if (!(sampling.top_p > 0.0 && sampling.top_p <= 1.0))
        throw Error(ErrorKind::Config, "profile '" + name + "': top_p must be in (0, 1]");
}

std::string GeneratorProfile::credential_env_var() const {
    std::string var = "AGORA_KEY_";
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        else
            var.push_back('_');
    }
    return var;
}

const std::array<std::string, 9>& MetricVector::feature_names() {
    static const std::array<std::string, 9> names = {
        "judge_instruction_difficulty_a", "judge_instruction_difficulty_b",
        "instruction_diversity",          "judge_response_quality_a",
        "judge_response_quality_b",       "reward_score",
        "response_perplexity",            "response_diversity",
        "problem_solving_avg",
    };
    return names;
}

std::optional<double> MetricVector::feature(std::size_t index) const {
    switch (index) {
        case 0: return judge_instruction_difficulty_a;
        case 1: return judge_instruction_difficulty_b;
        case 2: return instruction_diversity;
        case 3: return judge_response_quality_a;
        case 4: return judge_response_quality_b;
        case 5: return reward_score;
        case 6: return response_perplexity;
        case 7: return response_diversity;
        case 8: return problem_solving_avg;
    }
    throw Error(ErrorKind::Precondition, "feature index out of range");
}

void MetricVector::set_feature(std::size_t index, std::optional<double> value) {
    switch (index) {
        case 0: judge_instruction_difficulty_a = value; return;
        case 1: judge_instruction_difficulty_b = value; return;
        case 2: instruction_diversity = value; return;
        case 3: judge_response_quality_a = value; return;
        case 4: judge_response_quality_b = value; return;
        case 5: reward_score = value; return;
        case 6: response_perplexity = value; return;
        case 7: response_diversity = value; return;
        case 8: problem_solving_avg = value; return;
    }
    throw Error(ErrorKind::Precondition, "feature index out of range");
}

std::string make_instance_id(const SettingKey& setting, const std::string& generator_id,
                             std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(index));
    return setting.slug() + "-" + generator_id + "-" + buf;
}

}  // namespace agora
