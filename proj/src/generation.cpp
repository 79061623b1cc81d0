#include "agora/generation.hpp"

#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "agora/jsonl.hpp"
#include "agora/mock_provider.hpp"

namespace agora {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Append-mode stream that can be rewound to a checkpointed byte position.
class CommitFile {
public:
    CommitFile() = default;

    void open(const std::filesystem::path& path, std::uint64_t resume_position) {
        if (path.empty()) return;
        path_ = path;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        if (resume_position > 0) {
            if (!std::filesystem::exists(path))
                throw Error(ErrorKind::Job,
                            "checkpoint expects '" + path.string() + "' but it is missing");
            std::filesystem::resize_file(path, resume_position);
            stream_.open(path, std::ios::binary | std::ios::in | std::ios::out | std::ios::ate);
        } else {
            stream_.open(path, std::ios::binary | std::ios::trunc | std::ios::out);
        }
        if (!stream_) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    }

    void write_line(const std::string& line) {
        if (!path_.empty()) stream_ << line << '\n';
    }

    std::uint64_t position() {
        if (path_.empty()) return 0;
        stream_.flush();
        return static_cast<std::uint64_t>(stream_.tellp());
    }

    bool active() const { return !path_.empty(); }

private:
    std::filesystem::path path_;
    std::fstream stream_;
};

std::string rejection_line(std::size_t slot, const std::string& reason, int attempts,
                           const std::vector<std::string>& raw_outputs,
                           const std::string& input_id) {
    ordered_json j;
    j["slot"] = slot;
    if (!input_id.empty()) j["input_id"] = input_id;
    j["reason"] = reason;
    j["attempts"] = attempts;
    j["raw_outputs"] = raw_outputs;
    return j.dump();
}

}  // namespace

void GenerationJobConfig::check() const {
    generator.check();
    prompt_template.check();
    if (target_count == 0) throw Error(ErrorKind::Config, "target_count must be > 0");
    if (prompt_template.method != setting.method)
        throw Error(ErrorKind::Config, "template method does not match the setting");
    if (parse_retry_budget < 1)
        throw Error(ErrorKind::Config, "parse_retry_budget must be >= 1");
    if (rejection_ceiling_fraction < 0)
        throw Error(ErrorKind::Config, "rejection ceiling must be >= 0");
    switch (setting.method) {
        case Method::InstanceGeneration:
            if (demos_per_prompt < 1)
                throw Error(ErrorKind::Config, "instance generation requires demos_per_prompt >= 1");
            if (seed_or_input.kind != DatasetKind::Seed)
                throw Error(ErrorKind::Precondition, "instance generation requires a seed dataset");
            if (seed_or_input.size() < demos_per_prompt)
                throw Error(ErrorKind::Precondition,
                            "seed pool smaller than demos_per_prompt");
            break;
        case Method::ResponseGeneration:
            if (seed_or_input.kind != DatasetKind::InstructionOnly &&
                seed_or_input.kind != DatasetKind::RawPairs)
                throw Error(ErrorKind::Precondition,
                            "response generation requires an instruction-only dataset "
                            "(or raw pairs whose responses are ignored)");
            if (seed_or_input.size() < target_count)
                throw Error(ErrorKind::Precondition,
                            "response generation needs " + std::to_string(target_count) +
                                " instructions but input has " +
                                std::to_string(seed_or_input.size()));
            break;
        case Method::QualityEnhancement:
            if (seed_or_input.kind != DatasetKind::RawPairs)
                throw Error(ErrorKind::Precondition, "quality enhancement requires raw pairs");
            if (seed_or_input.size() < target_count)
                throw Error(ErrorKind::Precondition,
                            "quality enhancement needs " + std::to_string(target_count) +
                                " pairs but input has " + std::to_string(seed_or_input.size()));
            break;
    }
}

std::uint64_t GenerationJobConfig::fingerprint() const {
    std::ostringstream key;
    key << setting.slug() << '\x1f' << generator.name << '\x1f' << generator.model_id << '\x1f'
        << prompt_template.name << '\x1f' << fnv1a64(prompt_template.body) << '\x1f'
        << to_string(prompt_template.output_format) << '\x1f' << target_count << '\x1f'
        << demos_per_prompt << '\x1f' << include_generated_as_demos << '\x1f' << rng_seed << '\x1f'
        << parse_retry_budget << '\x1f' << rejection_ceiling_fraction << '\x1f' << checkpoint_every
        << '\x1f' << seed_or_input.size() << '\x1f';
    for (const Instance& inst : seed_or_input.instances) key << inst.id << '\x1e';
    return fnv1a64(key.str());
}

void JobCheckpoint::save(const std::filesystem::path& path) const {
    ordered_json j;
    j["fingerprint"] = fingerprint;
    j["accepted_count"] = accepted_count;
    j["processed_count"] = processed_count;
    j["rejected_count"] = rejected_count;
    j["rng_state"] = rng_state;
    j["output_position"] = output_position;
    j["rejection_position"] = rejection_position;
    j["flags_position"] = flags_position;
    ordered_json usage = ordered_json::object();
    for (const auto& [name, e] : ledger) {
        usage[name] = {{"prompt_tokens", e.prompt_tokens},
                       {"completion_tokens", e.completion_tokens},
                       {"request_count", e.request_count},
                       {"cost_picos", e.cost.picos()}};
    }
    j["ledger"] = usage;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

JobCheckpoint JobCheckpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read checkpoint '" + path.string() + "'");
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorKind::Job, "checkpoint '" + path.string() + "' is not valid JSON");
    JobCheckpoint cp;
    cp.fingerprint = j.value("fingerprint", 0ULL);
    cp.accepted_count = j.value("accepted_count", 0ULL);
    cp.processed_count = j.value("processed_count", 0ULL);
    cp.rejected_count = j.value("rejected_count", 0ULL);
    cp.rng_state = j.value("rng_state", 0ULL);
    cp.output_position = j.value("output_position", 0ULL);
    cp.rejection_position = j.value("rejection_position", 0ULL);
    cp.flags_position = j.value("flags_position", 0ULL);
    if (j.contains("ledger")) {
        for (auto& [name, e] : j["ledger"].items()) {
            UsageEntry entry;
            entry.prompt_tokens = e.value("prompt_tokens", 0LL);
            entry.completion_tokens = e.value("completion_tokens", 0LL);
            entry.request_count = e.value("request_count", 0LL);
            entry.cost = Cost::from_picos(e.value("cost_picos", 0LL));
            cp.ledger[name] = entry;
        }
    }
    return cp;
}

namespace detail {

// One prompt, up to `attempt_budget` chat calls, first parseable reply wins.
// A pair whose instruction or response trims to empty counts as a parse
// failure: every accepted instance must pass dataset validation.
struct TaskOutcome {
    bool ok = false;
    std::vector<ParsedPair> pairs;
    std::vector<std::string> raw_outputs;
    std::string reason;
    int attempts = 0;
};

TaskOutcome execute_slot(Gateway& gateway, const GeneratorProfile& profile,
                         const std::string& prompt, const OutputContract& contract,
                         int attempt_budget, bool require_response_only) {
    TaskOutcome outcome;
    ChatRequest request;
    request.messages.push_back({"user", prompt});
    request.sampling = profile.sampling;
    for (int attempt = 0; attempt < attempt_budget; ++attempt) {
        ++outcome.attempts;
        ChatResult reply = gateway.chat(profile, request);
        ParseOutcome parsed = parse_generated(reply.text, contract);
        if (!parsed.ok()) {
            outcome.raw_outputs.push_back(reply.text);
            outcome.reason = parsed.error->reason;
            continue;
        }
        bool fields_ok = true;
        for (const ParsedPair& p : parsed.pairs) {
            if (trimmed(p.response).empty() || (!require_response_only && trimmed(p.instruction).empty())) {
                fields_ok = false;
                break;
            }
        }
        if (!fields_ok) {
            outcome.raw_outputs.push_back(reply.text);
            outcome.reason = "parsed pair has an empty field";
            continue;
        }
        outcome.ok = true;
        outcome.pairs = std::move(parsed.pairs);
        return outcome;
    }
    return outcome;
}

}  // namespace detail

GenerationOutcome GenerationEngine::run(const GenerationJobConfig& config) {
    config.check();
    if (config.setting.method == Method::InstanceGeneration)
        return run_instance_generation(config);
    return run_sequential_rewrite(config);
}

GenerationOutcome GenerationEngine::run_instance_generation(const GenerationJobConfig& config) {
    const OutputContract contract = config.prompt_template.contract();
    const std::size_t ceiling = static_cast<std::size_t>(
        config.rejection_ceiling_fraction * static_cast<double>(config.target_count));
    const std::size_t max_round = std::max(1, gateway_.config().max_in_flight);

    GenerationOutcome outcome;
    outcome.dataset.kind = DatasetKind::Generated;
    outcome.dataset.domain = config.setting.domain;

    SplitMix64 rng(config.rng_seed);
    std::size_t rejected = 0;
    std::size_t slot_counter = 0;

    CommitFile corpus;
    CommitFile rejections;
    JobCheckpoint cp;
    bool resuming = false;
    if (!config.checkpoint_path.empty() && std::filesystem::exists(config.checkpoint_path)) {
        cp = JobCheckpoint::load(config.checkpoint_path);
        if (cp.fingerprint != config.fingerprint())
            throw Error(ErrorKind::Job, "checkpoint fingerprint mismatch; refusing to resume");
        resuming = true;
    }

    corpus.open(config.output_path, resuming ? cp.output_position : 0);
    rejections.open(config.rejection_path, resuming ? cp.rejection_position : 0);

    if (resuming) {
        rng.set_state(cp.rng_state);
        rejected = cp.rejected_count;
        slot_counter = cp.processed_count;
        gateway_.ledger().restore(cp.ledger);
        if (!config.output_path.empty()) {
            std::ifstream in(config.output_path);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty()) outcome.dataset.instances.push_back(instance_from_line(line));
            }
        }
        if (outcome.dataset.size() != cp.accepted_count)
            throw Error(ErrorKind::Job, "checkpoint accepted_count disagrees with output file");
        outcome.resumed = true;
    }

    std::size_t last_checkpoint_mark = outcome.dataset.size() / std::max<std::size_t>(1, config.checkpoint_every);

    auto write_checkpoint = [&] {
        if (config.checkpoint_path.empty()) return;
        JobCheckpoint next;
        next.fingerprint = config.fingerprint();
        next.accepted_count = outcome.dataset.size();
        next.processed_count = slot_counter;
        next.rejected_count = rejected;
        next.rng_state = rng.state();
        next.output_position = corpus.position();
        next.rejection_position = rejections.position();
        next.ledger = gateway_.ledger().snapshot();
        next.save(config.checkpoint_path);
    };

    while (outcome.dataset.size() < config.target_count) {
        if (stop_requested_.load() ||
            (config.abort_after > 0 && outcome.dataset.size() >= config.abort_after)) {
            write_checkpoint();
            outcome.aborted = true;
            outcome.rejected_count = rejected;
            return outcome;
        }

        const std::size_t remaining = config.target_count - outcome.dataset.size();
        const std::size_t round = std::min(max_round, remaining);

        // Prompts are built sequentially so rng consumption is independent of
        // completion timing. The demo pool is the seed set plus, when enabled,
        // everything committed in earlier rounds.
        std::vector<std::string> prompts(round);
        const std::size_t seed_size = config.seed_or_input.size();
        const std::size_t pool_size =
            seed_size + (config.include_generated_as_demos ? outcome.dataset.size() : 0);
        for (std::size_t r = 0; r < round; ++r) {
            std::vector<std::size_t> picks = sample_indices(rng, pool_size, config.demos_per_prompt);
            std::vector<Instance> demos;
            demos.reserve(picks.size());
            for (std::size_t i : picks)
                demos.push_back(i < seed_size ? config.seed_or_input.instances[i]
                                              : outcome.dataset.instances[i - seed_size]);
            prompts[r] = render(config.prompt_template,
                                {{kPlaceholderDemonstrations, format_demonstrations(demos, contract)}});
        }

        std::vector<detail::TaskOutcome> results(round);
        {
            std::vector<std::thread> workers;
            std::vector<std::exception_ptr> failures(round);
            workers.reserve(round);
            for (std::size_t r = 0; r < round; ++r) {
                workers.emplace_back([&, r] {
                    try {
                        results[r] = detail::execute_slot(gateway_, config.generator, prompts[r],
                                                          contract, config.parse_retry_budget, false);
                    } catch (...) {
                        failures[r] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& eptr : failures)
                if (eptr) std::rethrow_exception(eptr);
        }

        for (std::size_t r = 0; r < round; ++r) {
            detail::TaskOutcome& res = results[r];
            const std::size_t slot = slot_counter++;
            if (!res.ok) {
                ++rejected;
                rejections.write_line(
                    rejection_line(slot, res.reason.empty() ? "parse failure" : res.reason,
                                   res.attempts, res.raw_outputs, ""));
                if (rejected > ceiling) {
                    write_checkpoint();
                    throw Error(ErrorKind::Job,
                                "generator unusable for this template: " + std::to_string(rejected) +
                                    " rejected slots exceed ceiling of " + std::to_string(ceiling));
                }
                continue;
            }
            for (ParsedPair& pair : res.pairs) {
                if (outcome.dataset.size() >= config.target_count) break;  // truncate overshoot
                Instance inst;
                inst.id = make_instance_id(config.setting, config.generator.name,
                                           outcome.dataset.size());
                inst.instruction = std::move(pair.instruction);
                inst.response = std::move(pair.response);
                inst.origin = Origin::Generated;
                inst.generator_id = config.generator.name;
                inst.setting = config.setting;
                corpus.write_line(instance_to_line(inst));
                outcome.dataset.instances.push_back(std::move(inst));
            }
        }

        std::size_t mark = outcome.dataset.size() / std::max<std::size_t>(1, config.checkpoint_every);
        if (mark > last_checkpoint_mark && outcome.dataset.size() < config.target_count) {
            last_checkpoint_mark = mark;
            write_checkpoint();
        }
    }

    write_checkpoint();
    outcome.rejected_count = rejected;
    return outcome;
}

GenerationOutcome GenerationEngine::run_sequential_rewrite(const GenerationJobConfig& config) {
    const bool enhancement = config.setting.method == Method::QualityEnhancement;
    const OutputContract contract = config.prompt_template.contract();
    const std::size_t ceiling = static_cast<std::size_t>(
        config.rejection_ceiling_fraction * static_cast<double>(config.target_count));
    const std::size_t max_round = std::max(1, gateway_.config().max_in_flight);

    GenerationOutcome outcome;
    outcome.dataset.kind = DatasetKind::Generated;
    outcome.dataset.domain = config.setting.domain;

    std::size_t processed = 0;
    std::size_t rejected = 0;

    CommitFile corpus;
    CommitFile rejections;
    CommitFile flags;
    JobCheckpoint cp;
    bool resuming = false;
    if (!config.checkpoint_path.empty() && std::filesystem::exists(config.checkpoint_path)) {
        cp = JobCheckpoint::load(config.checkpoint_path);
        if (cp.fingerprint != config.fingerprint())
            throw Error(ErrorKind::Job, "checkpoint fingerprint mismatch; refusing to resume");
        resuming = true;
    }

    corpus.open(config.output_path, resuming ? cp.output_position : 0);
    rejections.open(config.rejection_path, resuming ? cp.rejection_position : 0);
    if (enhancement) flags.open(config.flags_path, resuming ? cp.flags_position : 0);

    if (resuming) {
        processed = cp.processed_count;
        rejected = cp.rejected_count;
        gateway_.ledger().restore(cp.ledger);
        if (!config.output_path.empty()) {
            std::ifstream in(config.output_path);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty()) outcome.dataset.instances.push_back(instance_from_line(line));
            }
        }
        if (outcome.dataset.size() != cp.accepted_count)
            throw Error(ErrorKind::Job, "checkpoint accepted_count disagrees with output file");
        outcome.resumed = true;
    }

    std::size_t last_checkpoint_mark =
        outcome.dataset.size() / std::max<std::size_t>(1, config.checkpoint_every);

    auto write_checkpoint = [&] {
        if (config.checkpoint_path.empty()) return;
        JobCheckpoint next;
        next.fingerprint = config.fingerprint();
        next.accepted_count = outcome.dataset.size();
        next.processed_count = processed;
        next.rejected_count = rejected;
        next.rng_state = 0;
        next.output_position = corpus.position();
        next.rejection_position = rejections.position();
        next.flags_position = flags.position();
        next.ledger = gateway_.ledger().snapshot();
        next.save(config.checkpoint_path);
    };

    while (processed < config.target_count) {
        if (stop_requested_.load() ||
            (config.abort_after > 0 && outcome.dataset.size() >= config.abort_after)) {
            write_checkpoint();
            outcome.aborted = true;
            outcome.rejected_count = rejected;
            return outcome;
        }

        const std::size_t remaining = config.target_count - processed;
        const std::size_t round = std::min(max_round, remaining);

        std::vector<std::string> prompts(round);
        for (std::size_t r = 0; r < round; ++r) {
            const Instance& input = config.seed_or_input.instances[processed + r];
            std::map<std::string, std::string> slots{{kPlaceholderInstruction, input.instruction}};
            if (enhancement) slots[kPlaceholderResponse] = input.response.value_or("");
            prompts[r] = render(config.prompt_template, slots);
        }

        std::vector<detail::TaskOutcome> results(round);
        {
            std::vector<std::thread> workers;
            std::vector<std::exception_ptr> failures(round);
            workers.reserve(round);
            for (std::size_t r = 0; r < round; ++r) {
                workers.emplace_back([&, r] {
                    try {
                        results[r] = detail::execute_slot(gateway_, config.generator, prompts[r],
                                                          contract, config.parse_retry_budget,
                                                          !enhancement);
                    } catch (...) {
                        failures[r] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& eptr : failures)
                if (eptr) std::rethrow_exception(eptr);
        }

        for (std::size_t r = 0; r < round; ++r) {
            const Instance& input = config.seed_or_input.instances[processed + r];
            detail::TaskOutcome& res = results[r];
            const std::size_t slot = processed + r;
            if (!res.ok) {
                ++rejected;
                rejections.write_line(
                    rejection_line(slot, res.reason.empty() ? "parse failure" : res.reason,
                                   res.attempts, res.raw_outputs, input.id));
                if (rejected > ceiling) {
                    processed += r + 1;
                    write_checkpoint();
                    throw Error(ErrorKind::Job,
                                "generator unusable for this template: " + std::to_string(rejected) +
                                    " rejected slots exceed ceiling of " + std::to_string(ceiling));
                }
                continue;
            }
            const ParsedPair& pair = res.pairs.front();
            Instance inst;
            inst.id = make_instance_id(config.setting, config.generator.name,
                                       outcome.dataset.size());
            inst.origin = enhancement ? Origin::Enhanced : Origin::Generated;
            inst.generator_id = config.generator.name;
            inst.setting = config.setting;
            if (enhancement) {
                bool instruction_modified =
                    pair.instruction_modified.value_or(pair.instruction != input.instruction);
                bool response_modified =
                    pair.response_modified.value_or(pair.response != input.response.value_or(""));
                // A field the generator marked unmodified stays input-verbatim.
                inst.instruction = instruction_modified ? pair.instruction : input.instruction;
                inst.response = response_modified ? pair.response : input.response.value_or("");
                ordered_json f;
                f["id"] = inst.id;
                f["input_id"] = input.id;
                f["instruction_modified"] = instruction_modified;
                f["response_modified"] = response_modified;
                flags.write_line(f.dump());
            } else {
                // Output preserves the input instruction verbatim.
                inst.instruction = input.instruction;
                inst.response = pair.response;
            }
            corpus.write_line(instance_to_line(inst));
            outcome.dataset.instances.push_back(std::move(inst));
        }
        processed += round;

        std::size_t mark =
            outcome.dataset.size() / std::max<std::size_t>(1, config.checkpoint_every);
        if (mark > last_checkpoint_mark && processed < config.target_count) {
            last_checkpoint_mark = mark;
            write_checkpoint();
        }
    }

    write_checkpoint();
    outcome.rejected_count = rejected;
    return outcome;
}

Dataset export_training_corpus(const Dataset& generated, const Dataset& seed,
                               const SettingKey& setting) {
    Dataset corpus;
    corpus.kind = DatasetKind::Generated;
    corpus.domain = setting.domain;
    if (setting.method == Method::InstanceGeneration) {
        corpus.instances = seed.instances;
        corpus.instances.insert(corpus.instances.end(), generated.instances.begin(),
                                generated.instances.end());
    } else {
        corpus.instances = generated.instances;
    }
    std::unordered_map<std::string, int> ids;
    for (const Instance& inst : corpus.instances) {
        if (++ids[inst.id] > 1)
            throw Error(ErrorKind::Job, "id collision between seed and generated: " + inst.id);
    }
    return corpus;
}

}  // namespace agora
