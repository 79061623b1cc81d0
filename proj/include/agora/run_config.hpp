#pragma once

#include <filesystem>
#include <map>
#include <optional>

#include "agora/generation.hpp"
#include "agora/intrinsic.hpp"

namespace agora {

// One structured config document binds a whole run: profiles, setting,
// template selection, budgets, seeds, paths and concurrency. Every referenced
// path and profile must resolve before any network call.
struct RunConfig {
    std::string run_name;
    SettingKey setting;
    std::string generator;  // profile name
    std::map<std::string, GeneratorProfile> profiles;

    // template selection: explicit file wins over pack lookup
    std::filesystem::path template_file;
    std::filesystem::path template_pack_dir = "templates";
    std::string template_variant = "agora";
    OutputFormat template_format = OutputFormat::FreeformTagged;

    std::filesystem::path seed_path;
    std::string seed_format = "canonical";  // or "minimal"
    DatasetKind seed_kind = DatasetKind::Seed;
    std::int64_t max_seed_tokens = 4096;  // 0 disables the token filter
    std::string token_counter = "whitespace";

    std::size_t target_count = 10000;
    std::size_t demos_per_prompt = 3;
    bool include_generated_as_demos = false;
    std::uint64_t rng_seed = 42;
    int parse_retry_budget = 2;
    double rejection_ceiling_fraction = 0.2;
    std::size_t checkpoint_every = 100;

    GatewayConfig gateway;

    std::filesystem::path output_dir = "runs";

    // intrinsic evaluation wiring (profile names; empty = metric missing)
    std::string judge_a_profile;
    std::string judge_b_profile;
    std::string reward_profile;
    std::string perplexity_profile;
    std::string embedding_profile;
    std::size_t judge_sample_size = 500;
    std::uint64_t pair_budget = 50000;
    bool diversity_as_distance = true;
    std::filesystem::path problem_solving_scores;  // {generator_id, benchmark, score} lines

    std::string raw_json;  // the effective document, frozen next to outputs

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_json_text(const std::string& text);

    const GeneratorProfile& profile(const std::string& name) const;
    // Validation that must pass before any network I/O: referenced profiles
    // exist and are well-formed, paths resolve, numbers are in range.
    std::vector<std::string> validate() const;

    MetaPromptTemplate resolve_template() const;
    std::uint64_t config_hash() const { return hash_; }

private:
    std::uint64_t hash_ = 0;
};

// Mean benchmark score per generator from a {generator_id, benchmark, score}
// line-delimited file.
std::map<std::string, double> load_problem_solving_averages(const std::filesystem::path& path);

}  // namespace agora
