#pragma once

#include <atomic>
#include <filesystem>

#include "agora/gateway.hpp"
#include "agora/output_parse.hpp"
#include "agora/prompt.hpp"
#include "agora/seed_ingest.hpp"

namespace agora {

struct GenerationJobConfig {
    SettingKey setting;
    GeneratorProfile generator;
    MetaPromptTemplate prompt_template;
    Dataset seed_or_input;
    std::size_t target_count = 10000;
    std::size_t demos_per_prompt = 3;       // instance generation only
    bool include_generated_as_demos = false;
    std::uint64_t rng_seed = 0;
    std::filesystem::path output_path;      // corpus JSONL, streamed as instances commit
    std::filesystem::path rejection_path;   // sidecar with raw outputs of rejected slots
    std::filesystem::path checkpoint_path;  // empty disables checkpointing
    std::filesystem::path flags_path;       // quality enhancement: per-instance modified flags
    int parse_retry_budget = 2;             // chat attempts per prompt before rejecting the slot
    double rejection_ceiling_fraction = 0.2;
    std::size_t checkpoint_every = 100;     // accepted instances between checkpoints
    std::size_t abort_after = 0;            // testing aid: graceful stop after N accepted

    void check() const;
    // Hash over the generation-relevant fields; a checkpoint only resumes
    // against the identical configuration.
    std::uint64_t fingerprint() const;
};

struct JobCheckpoint {
    std::uint64_t fingerprint = 0;
    std::size_t accepted_count = 0;
    std::size_t processed_count = 0;  // input slots consumed (response gen / enhancement)
    std::size_t rejected_count = 0;
    std::uint64_t rng_state = 0;
    std::uint64_t output_position = 0;
    std::uint64_t rejection_position = 0;
    std::uint64_t flags_position = 0;
    std::map<std::string, UsageEntry> ledger;

    void save(const std::filesystem::path& path) const;
    static JobCheckpoint load(const std::filesystem::path& path);
};

struct GenerationOutcome {
    Dataset dataset;  // kind=generated; exactly target_count instances on success
    std::size_t rejected_count = 0;
    bool aborted = false;  // stopped at a checkpoint boundary (abort_after / stop flag)
    bool resumed = false;
};

// Runs one generation job (all three methods) against the gateway. Requests
// are issued in rounds of up to the gateway's in-flight limit and committed
// strictly in slot order, so a fixed rng_seed and a deterministic provider
// give byte-identical output files, and a kill at any checkpoint boundary
// resumes to the same bytes.
class GenerationEngine {
public:
    explicit GenerationEngine(Gateway& gateway) : gateway_(gateway) {}

    GenerationOutcome run(const GenerationJobConfig& config);

    // Cooperative stop: the engine finishes the current round, writes a
    // checkpoint and returns with aborted=true.
    void request_stop() noexcept { stop_requested_.store(true); }

private:
    GenerationOutcome run_instance_generation(const GenerationJobConfig& config);
    GenerationOutcome run_sequential_rewrite(const GenerationJobConfig& config);

    Gateway& gateway_;
    std::atomic<bool> stop_requested_{false};
};

// Training corpus assembly: instance generation trains on seed + generated;
// the other two methods train on the generated corpus alone.
Dataset export_training_corpus(const Dataset& generated, const Dataset& seed,
                               const SettingKey& setting);

}  // namespace agora
