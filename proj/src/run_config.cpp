#include "agora/run_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agora/mock_provider.hpp"

namespace agora {

using json = nlohmann::json;

namespace {

GeneratorProfile profile_from_json(const std::string& name, const json& j) {
    GeneratorProfile p;
    p.name = name;
    std::string provider = j.value("provider", "openai");
    if (provider == "mock")
        p.provider = ProviderKind::Mock;
    else if (provider == "openai" || provider == "openai_compatible")
        p.provider = ProviderKind::OpenAiCompatible;
    else
        throw Error(ErrorKind::Config, "profile '" + name + "': unknown provider '" + provider + "'");
    p.endpoint = j.value("endpoint", "");
    p.model_id = j.value("model_id", name);
    if (j.contains("input_price")) {
        const json& v = j["input_price"];
        p.input_price = v.is_string() ? Price::parse(v.get<std::string>())
                                      : Price::parse(v.dump());
    }
    if (j.contains("output_price")) {
        const json& v = j["output_price"];
        p.output_price = v.is_string() ? Price::parse(v.get<std::string>())
                                       : Price::parse(v.dump());
    }
    if (j.contains("sampling")) {
        const json& s = j["sampling"];
        p.sampling.temperature = s.value("temperature", p.sampling.temperature);
        p.sampling.top_p = s.value("top_p", p.sampling.top_p);
        p.sampling.max_new_tokens = s.value("max_new_tokens", p.sampling.max_new_tokens);
        p.sampling.repetition_penalty = s.value("repetition_penalty", p.sampling.repetition_penalty);
    }
    p.check();
    return p;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorKind::Config, "config is not a JSON object");

    RunConfig cfg;
    cfg.raw_json = text;
    cfg.hash_ = fnv1a64(text);
    cfg.run_name = j.value("run_name", "run");
    if (j.contains("setting")) cfg.setting = SettingKey::from_slug(j["setting"].get<std::string>());
    cfg.generator = j.value("generator", "");
    if (j.contains("profiles")) {
        for (auto& [name, pj] : j["profiles"].items())
            cfg.profiles.emplace(name, profile_from_json(name, pj));
    }
    if (j.contains("template")) {
        const json& t = j["template"];
        if (t.contains("file")) cfg.template_file = t["file"].get<std::string>();
        if (t.contains("pack_dir")) cfg.template_pack_dir = t["pack_dir"].get<std::string>();
        if (t.contains("variant")) cfg.template_variant = t["variant"].get<std::string>();
        if (t.contains("format"))
            cfg.template_format = output_format_from_string(t["format"].get<std::string>());
    }
    if (j.contains("seed")) {
        const json& s = j["seed"];
        if (s.contains("path")) cfg.seed_path = s["path"].get<std::string>();
        cfg.seed_format = s.value("format", cfg.seed_format);
        if (s.contains("kind")) cfg.seed_kind = dataset_kind_from_string(s["kind"].get<std::string>());
        cfg.max_seed_tokens = s.value("max_tokens", cfg.max_seed_tokens);
        cfg.token_counter = s.value("token_counter", cfg.token_counter);
    }
    if (j.contains("generation")) {
        const json& g = j["generation"];
        cfg.target_count = g.value("target_count", cfg.target_count);
        cfg.demos_per_prompt = g.value("demos_per_prompt", cfg.demos_per_prompt);
        cfg.include_generated_as_demos =
            g.value("include_generated_as_demos", cfg.include_generated_as_demos);
        cfg.rng_seed = g.value("rng_seed", cfg.rng_seed);
        cfg.parse_retry_budget = g.value("parse_retry_budget", cfg.parse_retry_budget);
        cfg.rejection_ceiling_fraction =
            g.value("rejection_ceiling_fraction", cfg.rejection_ceiling_fraction);
        cfg.checkpoint_every = g.value("checkpoint_every", cfg.checkpoint_every);
    }
    if (j.contains("concurrency")) {
        const json& c = j["concurrency"];
        cfg.gateway.max_in_flight = c.value("max_in_flight", cfg.gateway.max_in_flight);
        cfg.gateway.requests_per_second =
            c.value("requests_per_second", cfg.gateway.requests_per_second);
        cfg.gateway.retry_budget = c.value("retry_budget", cfg.gateway.retry_budget);
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("intrinsic")) {
        const json& i = j["intrinsic"];
        cfg.judge_a_profile = i.value("judge_a", "");
        cfg.judge_b_profile = i.value("judge_b", "");
        cfg.reward_profile = i.value("reward", "");
        cfg.perplexity_profile = i.value("perplexity", "");
        cfg.embedding_profile = i.value("embeddings", "");
        cfg.judge_sample_size = i.value("judge_sample_size", cfg.judge_sample_size);
        cfg.pair_budget = i.value("pair_budget", cfg.pair_budget);
        cfg.diversity_as_distance = i.value("diversity_as_distance", cfg.diversity_as_distance);
        if (i.contains("problem_solving_scores"))
            cfg.problem_solving_scores = i["problem_solving_scores"].get<std::string>();
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, "config '" + path.string() + "': " + e.what());
    }
}

const GeneratorProfile& RunConfig::profile(const std::string& name) const {
    auto it = profiles.find(name);
    if (it == profiles.end())
        throw Error(ErrorKind::Config, "profile '" + name + "' is not defined");
    return it->second;
}

std::vector<std::string> RunConfig::validate() const {
    std::vector<std::string> problems;
    auto check_profile = [&](const std::string& name, const char* role) {
        if (name.empty()) return;
        auto it = profiles.find(name);
        if (it == profiles.end()) {
            problems.push_back(std::string(role) + " profile '" + name + "' is not defined");
            return;
        }
        try {
            it->second.check();
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
        if (it->second.provider == ProviderKind::OpenAiCompatible && it->second.endpoint.empty())
            problems.push_back("profile '" + name + "' needs an endpoint");
    };
    if (generator.empty())
        problems.push_back("no generator profile selected");
    else
        check_profile(generator, "generator");
    check_profile(judge_a_profile, "judge_a");
    check_profile(judge_b_profile, "judge_b");
    check_profile(reward_profile, "reward");
    check_profile(perplexity_profile, "perplexity");
    check_profile(embedding_profile, "embeddings");

    if (target_count == 0) problems.push_back("target_count must be > 0");
    if (parse_retry_budget < 1) problems.push_back("parse_retry_budget must be >= 1");
    if (rejection_ceiling_fraction < 0) problems.push_back("rejection ceiling must be >= 0");
    if (gateway.max_in_flight < 1) problems.push_back("max_in_flight must be >= 1");
    if (token_counter != "whitespace")
        problems.push_back("unknown token counter '" + token_counter + "'");

    if (!template_file.empty()) {
        if (!std::filesystem::exists(template_file))
            problems.push_back("template file '" + template_file.string() + "' does not exist");
    } else {
        auto path = template_pack_path(template_pack_dir, setting, template_variant, template_format);
        if (!std::filesystem::exists(path))
            problems.push_back("template '" + path.string() + "' does not exist");
    }
    if (!seed_path.empty() && !std::filesystem::exists(seed_path))
        problems.push_back("seed path '" + seed_path.string() + "' does not exist");
    if (!problem_solving_scores.empty() && !std::filesystem::exists(problem_solving_scores))
        problems.push_back("problem-solving score file '" + problem_solving_scores.string() +
                           "' does not exist");
    return problems;
}

MetaPromptTemplate RunConfig::resolve_template() const {
    if (!template_file.empty()) return load_template_file(template_file);
    return load_template_file(
        template_pack_path(template_pack_dir, setting, template_variant, template_format));
}

std::map<std::string, double> load_problem_solving_averages(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::map<std::string, std::pair<double, int>> acc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("generator_id") ||
            !j.contains("score"))
            throw Error(ErrorKind::Io,
                        "line " + std::to_string(line_no) + ": malformed score record");
        auto& [sum, count] = acc[j["generator_id"].get<std::string>()];
        sum += j["score"].get<double>();
        ++count;
    }
    std::map<std::string, double> averages;
    for (const auto& [gen, pair] : acc)
        averages[gen] = pair.first / static_cast<double>(pair.second);
    return averages;
}

}  // namespace agora
