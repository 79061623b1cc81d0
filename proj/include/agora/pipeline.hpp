#pragma once

#include "agora/http_provider.hpp"
#include "agora/mock_provider.hpp"
#include "agora/report.hpp"
#include "agora/run_config.hpp"

namespace agora {

// Routes each call to the mock or HTTP transport by profile kind, so one
// gateway can serve a run that mixes local mock scoring with real endpoints.
class ProviderRouter : public Provider {
public:
    explicit ProviderRouter(MockBehavior mock_behavior = {},
                            HttpProviderConfig http_config = {})
        : mock_(std::make_shared<MockProvider>(mock_behavior)),
          http_(std::make_shared<HttpProvider>(http_config)) {}

    ChatResult chat(const GeneratorProfile& p, const ChatRequest& r) override {
        return backend(p).chat(p, r);
    }
    LogprobResult score_continuation(const GeneratorProfile& p, const std::string& c,
                                     const std::string& k) override {
        return backend(p).score_continuation(p, c, k);
    }
    std::vector<std::vector<double>> embed(const GeneratorProfile& p,
                                           const std::vector<std::string>& t) override {
        return backend(p).embed(p, t);
    }
    double reward(const GeneratorProfile& p, const std::string& i,
                  const std::string& r) override {
        return backend(p).reward(p, i, r);
    }

    MockProvider& mock() { return *mock_; }

private:
    Provider& backend(const GeneratorProfile& p) {
        return p.provider == ProviderKind::Mock ? static_cast<Provider&>(*mock_)
                                                : static_cast<Provider&>(*http_);
    }

    std::shared_ptr<MockProvider> mock_;
    std::shared_ptr<HttpProvider> http_;
};

// --- analysis over a metric/PGR grid -------------------------------------

struct AnalyzeOptions {
    std::size_t top_k = 5;  // clamped to what the grid supports
};

// Joins metric vectors with PGR cells on (generator, setting), drops columns
// with missing values, standardizes, runs PCA + contributions + the
// weighted-component regression, and both granularities of the
// problem-solving regression where the grid allows them.
AnalysisDocument analyze_cells(const std::vector<MetricVector>& metrics,
                               const std::vector<PgrCell>& cells, AnalyzeOptions options = {});

// --- generate ------------------------------------------------------------

struct GenerateRunPaths {
    std::filesystem::path run_dir;
    std::filesystem::path corpus;
    std::filesystem::path rejections;
    std::filesystem::path checkpoint;
    std::filesystem::path flags;
    std::filesystem::path ledger;
    std::filesystem::path frozen_config;
    std::filesystem::path summary;
};

GenerateRunPaths run_paths(const std::filesystem::path& run_dir);

// Builds the engine job from a validated RunConfig (loads seed data, applies
// the token filter, resolves the template).
GenerationJobConfig build_job_config(const RunConfig& config,
                                     const GenerateRunPaths& paths,
                                     std::size_t abort_after = 0,
                                     std::vector<std::string>* notes = nullptr);

struct DryRunEstimate {
    std::size_t planned_requests = 0;
    std::int64_t estimated_prompt_tokens_per_request = 0;
    std::int64_t completion_tokens_per_request = 0;
    Cost cost_ceiling;
};

// Pure arithmetic from the config and seed data; performs no network I/O.
DryRunEstimate dry_run_estimate(const RunConfig& config);

void write_ledger_json(const UsageLedger& ledger,
                       const std::map<std::string, GeneratorProfile>& profiles,
                       const std::filesystem::path& path);

// --- mock-run: the full offline pipeline ----------------------------------

struct MockRunOptions {
    std::size_t target = 1000;
    std::uint64_t seed = 42;
    Domain domain = Domain::Math;
    OutputFormat format = OutputFormat::FreeformTagged;
    std::filesystem::path out_dir = "mock-run";
    std::filesystem::path template_pack_dir;  // empty = built-in templates
    std::size_t judge_sample = 50;
    std::uint64_t pair_budget = 20000;
    std::size_t abort_after = 0;  // graceful stop inside the first unfinished job
    bool resume = false;
    int max_in_flight = 8;
    std::vector<Method> methods = {Method::InstanceGeneration, Method::ResponseGeneration,
                                   Method::QualityEnhancement};
};

struct MockRunResult {
    std::map<Method, GenerationOutcome> outcomes;
    PgrTable pgr_table;
    std::optional<AnalysisDocument> analysis;
    bool aborted = false;
};

MockRunResult mock_run(const MockRunOptions& options);

// Built-in meta-prompt templates mirroring the shipped pack (used by
// mock-run and available as a fallback when no pack directory is given).
MetaPromptTemplate builtin_template(Method method, OutputFormat format);

// Deterministic synthetic datasets for offline runs and tests.
Dataset synthetic_seed_dataset(Domain domain, DatasetKind kind, std::size_t count,
                               std::uint64_t seed);

// --- report rendering from machine-readable documents ---------------------

PgrTable read_pgr_report_json(const std::filesystem::path& path);
AnalysisDocument read_analysis_json(const std::filesystem::path& path);

}  // namespace agora
