#include "agora/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "agora/jsonl.hpp"

namespace agora {

using ordered_json = nlohmann::ordered_json;

// --- analysis --------------------------------------------------------------

AnalysisDocument analyze_cells(const std::vector<MetricVector>& metrics,
                               const std::vector<PgrCell>& cells, AnalyzeOptions options) {
    AnalysisDocument doc;

    struct Row {
        const MetricVector* mv;
        double pgr;
    };
    std::vector<Row> rows;
    for (const MetricVector& mv : metrics) {
        for (const PgrCell& cell : cells) {
            if (cell.generator_id == mv.generator_id && cell.setting == mv.setting) {
                rows.push_back({&mv, cell.domain_pgr});
                break;
            }
        }
    }
    if (rows.size() < 3)
        throw Error(ErrorKind::Analysis,
                    "analysis needs at least 3 joined (generator, setting) cells, got " +
                        std::to_string(rows.size()));
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.mv->generator_id != b.mv->generator_id)
            return a.mv->generator_id < b.mv->generator_id;
        return a.mv->setting.slug() < b.mv->setting.slug();
    });

    // Columns with any missing value are dropped, never imputed.
    const auto& names = MetricVector::feature_names();
    std::vector<std::size_t> usable;
    for (std::size_t f = 0; f < names.size(); ++f) {
        bool complete = true;
        for (const Row& r : rows) complete = complete && r.mv->feature(f).has_value();
        if (complete)
            usable.push_back(f);
        else
            doc.warnings.push_back("dropped feature with missing values: " + names[f]);
    }
    if (usable.size() < 2)
        throw Error(ErrorKind::Analysis, "fewer than two complete metric columns");

    std::vector<std::vector<double>> raw(rows.size(), std::vector<double>(usable.size()));
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < usable.size(); ++c) feature_names.push_back(names[usable[c]]);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < usable.size(); ++c)
            raw[i][c] = *rows[i].mv->feature(usable[c]);

    for (const Row& r : rows) {
        doc.row_labels.push_back(r.mv->generator_id + "/" + r.mv->setting.slug());
        doc.target_pgr.push_back(r.pgr);
    }

    doc.standardized = standardize(raw, feature_names);
    doc.warnings.insert(doc.warnings.end(), doc.standardized.warnings.begin(),
                        doc.standardized.warnings.end());

    std::size_t k_pca = std::min({options.top_k, rows.size() - 1,
                                  doc.standardized.kept_features.size()});
    if (k_pca == 0) throw Error(ErrorKind::Analysis, "no usable principal components");
    doc.components = pca(doc.standardized.matrix, k_pca, doc.standardized.kept_features);
    doc.contributions = loading_contributions(doc.components);

    std::size_t k_reg = std::min(k_pca, rows.size() >= 3 ? rows.size() - 2 : 0);
    if (k_reg < k_pca)
        doc.warnings.push_back("regression clamped to top-" + std::to_string(k_reg) +
                               " components (degrees of freedom)");
    doc.weighted_regression = regress_on_components(doc.target_pgr, doc.components, k_reg);

    // Problem-solving regressions, where the grid provides the x values.
    bool have_ps = true;
    for (const Row& r : rows) have_ps = have_ps && r.mv->problem_solving_avg.has_value();
    if (have_ps) {
        for (const Row& r : rows) doc.problem_solving_x.push_back(*r.mv->problem_solving_avg);
        try {
            doc.simple_regression_fine = regress_simple(doc.problem_solving_x, doc.target_pgr);
        } catch (const Error& e) {
            doc.warnings.push_back(std::string("fine-grained regression skipped: ") + e.what());
        }
        std::map<std::string, std::pair<double, std::vector<double>>> by_gen;
        for (const Row& r : rows) {
            auto& slot = by_gen[r.mv->generator_id];
            slot.first = *r.mv->problem_solving_avg;
            slot.second.push_back(r.pgr);
        }
        for (const auto& [gen, data] : by_gen) {
            double sum = 0.0;
            for (double v : data.second) sum += v;
            doc.coarse_x.push_back(data.first);
            doc.coarse_y.push_back(sum / static_cast<double>(data.second.size()));
        }
        try {
            doc.simple_regression_coarse = regress_simple(doc.coarse_x, doc.coarse_y);
        } catch (const Error& e) {
            doc.warnings.push_back(std::string("coarse regression skipped: ") + e.what());
        }
    } else {
        doc.warnings.push_back("problem-solving averages missing; solver-vs-generator "
                               "regressions skipped");
    }
    return doc;
}

// --- generate helpers -------------------------------------------------------

GenerateRunPaths run_paths(const std::filesystem::path& run_dir) {
    GenerateRunPaths p;
    p.run_dir = run_dir;
    p.corpus = run_dir / "corpus.jsonl";
    p.rejections = run_dir / "rejections.jsonl";
    p.checkpoint = run_dir / "checkpoint.json";
    p.flags = run_dir / "flags.jsonl";
    p.ledger = run_dir / "ledger.json";
    p.frozen_config = run_dir / "effective_config.json";
    p.summary = run_dir / "run_summary.json";
    return p;
}

GenerationJobConfig build_job_config(const RunConfig& config, const GenerateRunPaths& paths,
                                     std::size_t abort_after, std::vector<std::string>* notes) {
    GenerationJobConfig job;
    job.setting = config.setting;
    job.generator = config.profile(config.generator);
    job.prompt_template = config.resolve_template();

    DatasetKind kind = config.seed_kind;
    std::vector<std::string> warnings;
    Dataset seed = load_dataset(config.seed_path, kind, config.setting.domain, config.seed_format,
                                &warnings);
    if (config.max_seed_tokens > 0) {
        TokenBudgetPolicy policy;
        policy.max_tokens = config.max_seed_tokens;
        FilterResult filtered = filter_by_token_budget(seed, policy);
        if (notes && filtered.dropped_count > 0)
            notes->push_back("token filter dropped " + std::to_string(filtered.dropped_count) +
                             " seed instances (> " + std::to_string(config.max_seed_tokens) +
                             " tokens)");
        seed = std::move(filtered.kept);
    }
    if (notes)
        for (auto& w : warnings) notes->push_back(w);

    job.seed_or_input = std::move(seed);
    job.target_count = config.target_count;
    job.demos_per_prompt = config.demos_per_prompt;
    job.include_generated_as_demos = config.include_generated_as_demos;
    job.rng_seed = config.rng_seed;
    job.parse_retry_budget = config.parse_retry_budget;
    job.rejection_ceiling_fraction = config.rejection_ceiling_fraction;
    job.checkpoint_every = config.checkpoint_every;
    job.abort_after = abort_after;
    job.output_path = paths.corpus;
    job.rejection_path = paths.rejections;
    job.checkpoint_path = paths.checkpoint;
    if (config.setting.method == Method::QualityEnhancement) job.flags_path = paths.flags;
    return job;
}

DryRunEstimate dry_run_estimate(const RunConfig& config) {
    DryRunEstimate est;
    est.planned_requests = config.target_count;  // one-pair-per-call templates
    const GeneratorProfile& profile = config.profile(config.generator);
    MetaPromptTemplate tmpl = config.resolve_template();

    std::int64_t body_tokens = whitespace_token_count(tmpl.body);
    std::int64_t slot_tokens = 0;
    if (!config.seed_path.empty() && std::filesystem::exists(config.seed_path)) {
        Dataset seed = load_dataset(config.seed_path, config.seed_kind, config.setting.domain,
                                    config.seed_format);
        std::int64_t total = 0;
        for (const Instance& inst : seed.instances) {
            total += whitespace_token_count(inst.instruction);
            if (inst.response) total += whitespace_token_count(*inst.response);
        }
        std::int64_t mean = seed.instances.empty()
                                ? 0
                                : total / static_cast<std::int64_t>(seed.instances.size());
        slot_tokens = config.setting.method == Method::InstanceGeneration
                          ? mean * static_cast<std::int64_t>(config.demos_per_prompt)
                          : mean;
    }
    est.estimated_prompt_tokens_per_request = body_tokens + slot_tokens;
    est.completion_tokens_per_request = profile.sampling.max_new_tokens;

    std::int64_t requests = static_cast<std::int64_t>(est.planned_requests);
    est.cost_ceiling =
        Cost::of_tokens(requests * est.estimated_prompt_tokens_per_request, profile.input_price) +
        Cost::of_tokens(requests * est.completion_tokens_per_request, profile.output_price);
    return est;
}

void write_ledger_json(const UsageLedger& ledger,
                       const std::map<std::string, GeneratorProfile>& profiles,
                       const std::filesystem::path& path) {
    ordered_json j = ordered_json::object();
    Cost total;
    for (const auto& [name, entry] : ledger.snapshot()) {
        ordered_json row;
        row["prompt_tokens"] = entry.prompt_tokens;
        row["completion_tokens"] = entry.completion_tokens;
        row["request_count"] = entry.request_count;
        row["cost"] = entry.cost.to_string();
        if (auto it = profiles.find(name); it != profiles.end()) {
            row["input_price"] = it->second.input_price.to_string();
            row["output_price"] = it->second.output_price.to_string();
        }
        j[name] = row;
        total += entry.cost;
    }
    j["total_cost"] = total.to_string();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write ledger '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

// --- built-in templates ------------------------------------------------------

namespace {

std::string freeform_format_clause() {
    return "Write each new pair exactly in this form:\n"
           "<INSTRUCTION>\n(the instruction)\n</INSTRUCTION>\n"
           "<RESPONSE>\n(the response)\n</RESPONSE>\n"
           "Do not add any other commentary.";
}

std::string json_format_clause(bool with_flags) {
    std::string clause =
        "Reply with a single JSON object with exactly these keys: \"instruction\", \"response\"";
    if (with_flags) clause += ", \"instruction_modified\", \"response_modified\"";
    clause += ". Reply with JSON only, no prose around it.";
    return clause;
}

}  // namespace

MetaPromptTemplate builtin_template(Method method, OutputFormat format) {
    MetaPromptTemplate tmpl;
    tmpl.method = method;
    tmpl.output_format = format;
    const bool json = format == OutputFormat::Json;
    switch (method) {
        case Method::InstanceGeneration:
            tmpl.name = std::string("builtin.instance_generation.") + (json ? "json" : "freeform");
            tmpl.placeholders = {kPlaceholderDemonstrations};
            tmpl.body =
                "You create new training tasks. Below are worked examples of "
                "(instruction, response) pairs:\n\n{DEMONSTRATIONS}\n\n"
                "Create one new pair of comparable difficulty on a different topic. " +
                (json ? json_format_clause(false) : freeform_format_clause());
            break;
        case Method::ResponseGeneration:
            tmpl.name = std::string("builtin.response_generation.") + (json ? "json" : "freeform");
            tmpl.placeholders = {kPlaceholderInstruction};
            tmpl.body =
                "Answer the task below as helpfully and accurately as you can.\n\n"
                "<INSTRUCTION>\n{INSTRUCTION}\n</INSTRUCTION>\n\n"
                "Restate the instruction and give your answer. " +
                (json ? json_format_clause(false) : freeform_format_clause());
            break;
        case Method::QualityEnhancement:
            tmpl.name = std::string("builtin.quality_enhancement.") + (json ? "json" : "freeform");
            tmpl.placeholders = {kPlaceholderInstruction, kPlaceholderResponse};
            tmpl.body =
                "Improve the quality of the following (instruction, response) pair. Make "
                "either or both higher quality: harder, clearer or more educational. Keep "
                "anything you do not improve unchanged.\n\n"
                "<INSTRUCTION>\n{INSTRUCTION}\n</INSTRUCTION>\n"
                "<RESPONSE>\n{RESPONSE}\n</RESPONSE>\n\n"
                "Output the refined pair. " +
                (json ? json_format_clause(true) : freeform_format_clause());
            break;
    }
    tmpl.check();
    return tmpl;
}

Dataset synthetic_seed_dataset(Domain domain, DatasetKind kind, std::size_t count,
                               std::uint64_t seed) {
    Dataset ds;
    ds.domain = domain;
    ds.kind = kind;
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t a = 2 + rng.next_below(97);
        std::uint64_t b = 3 + rng.next_below(89);
        Instance inst;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "seed-%06zu", i);
        inst.id = buf;
        inst.origin = Origin::Seed;
        inst.instruction = "Work out " + std::to_string(a) + " * " + std::to_string(b) +
                           " + " + std::to_string(i) + " and show the steps.";
        if (kind != DatasetKind::InstructionOnly)
            inst.response = "Multiply to get " + std::to_string(a * b) + ", then add " +
                            std::to_string(i) + " for " + std::to_string(a * b + i) + ".";
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

// --- mock-run ----------------------------------------------------------------

namespace {

std::vector<ScoreRecord> fabricate_scores(const std::vector<Method>& methods, Domain domain,
                                          const std::string& generator, std::uint64_t seed) {
    std::vector<ScoreRecord> records;
    for (Method m : methods) {
        SettingKey key{domain, m};
        for (const char* bench : {"bench_alpha", "bench_beta"}) {
            std::uint64_t h = fnv1a64(key.slug() + "/" + bench, seed);
            ScoreRecord r;
            r.benchmark = bench;
            r.generator_id = generator;
            r.setting = key;
            r.score_base = 10.0 + static_cast<double>(h % 300) / 10.0;
            r.score_ref = r.score_base + 20.0 + static_cast<double>((h >> 8) % 300) / 10.0;
            double recovered = static_cast<double>((h >> 16) % 140) / 100.0 - 0.2;  // [-0.2, 1.2)
            r.score_trained = r.score_base + recovered * (r.score_ref - r.score_base);
            records.push_back(r);
        }
    }
    return records;
}

}  // namespace

MockRunResult mock_run(const MockRunOptions& options) {
    MockRunResult result;
    const std::string generator_name = "mock";
    std::filesystem::create_directories(options.out_dir);

    // Frozen effective options next to the outputs.
    {
        ordered_json j;
        j["target"] = options.target;
        j["seed"] = options.seed;
        j["domain"] = to_string(options.domain);
        j["format"] = to_string(options.format);
        j["judge_sample"] = options.judge_sample;
        j["pair_budget"] = options.pair_budget;
        j["max_in_flight"] = options.max_in_flight;
        ordered_json ms = ordered_json::array();
        for (Method m : options.methods) ms.push_back(to_string(m));
        j["methods"] = ms;
        std::ofstream out(options.out_dir / "effective_config.json",
                          std::ios::binary | std::ios::trunc);
        out << j.dump(2) << '\n';
    }

    UsageLedger combined;
    std::vector<MetricVector> summaries;
    std::map<std::string, GeneratorProfile> profile_map;

    GeneratorProfile generator;
    generator.name = generator_name;
    generator.provider = ProviderKind::Mock;
    generator.model_id = "mock-generator";
    generator.input_price = Price::parse("2.50");
    generator.output_price = Price::parse("10.00");
    profile_map[generator.name] = generator;

    GeneratorProfile aux = generator;  // judges/scorers share the mock transport
    aux.name = "mock-judge";
    profile_map[aux.name] = aux;

    for (Method method : options.methods) {
        SettingKey setting{options.domain, method};
        std::filesystem::path method_dir = options.out_dir / to_string(method);
        GenerateRunPaths paths = run_paths(method_dir);
        if (!options.resume) {
            std::filesystem::remove(paths.corpus);
            std::filesystem::remove(paths.rejections);
            std::filesystem::remove(paths.checkpoint);
            std::filesystem::remove(paths.flags);
        }

        GenerationJobConfig job;
        job.setting = setting;
        job.generator = generator;
        if (!options.template_pack_dir.empty()) {
            job.prompt_template = load_template_file(template_pack_path(
                options.template_pack_dir, setting, "agora",
                options.format));
        } else {
            job.prompt_template = builtin_template(method, options.format);
        }
        DatasetKind kind = method == Method::InstanceGeneration ? DatasetKind::Seed
                           : method == Method::ResponseGeneration ? DatasetKind::InstructionOnly
                                                                  : DatasetKind::RawPairs;
        std::size_t seed_count = method == Method::InstanceGeneration
                                     ? std::max<std::size_t>(16, options.target / 20)
                                     : options.target;
        job.seed_or_input = synthetic_seed_dataset(options.domain, kind, seed_count, options.seed);
        write_dataset_file(job.seed_or_input, method_dir / "seed_input.jsonl");
        job.target_count = options.target;
        job.demos_per_prompt = 3;
        job.rng_seed = options.seed;
        job.output_path = paths.corpus;
        job.rejection_path = paths.rejections;
        job.checkpoint_path = paths.checkpoint;
        if (method == Method::QualityEnhancement) job.flags_path = paths.flags;
        job.abort_after = options.abort_after;

        MockBehavior behavior;
        behavior.method = method;
        behavior.format = options.format;
        behavior.seed = options.seed;
        GatewayConfig gw;
        gw.max_in_flight = options.max_in_flight;
        Gateway gateway(std::make_shared<ProviderRouter>(behavior), gw);
        GenerationEngine engine(gateway);

        GenerationOutcome outcome = engine.run(job);
        combined.merge(gateway.ledger());
        bool aborted = outcome.aborted;
        result.outcomes[method] = std::move(outcome);
        if (aborted) {
            result.aborted = true;
            write_ledger_json(combined, profile_map, options.out_dir / "ledger.json");
            return result;
        }

        // Intrinsic metrics over the finished corpus.
        IntrinsicEvalConfig eval;
        eval.judge_a = aux;
        eval.judge_b = aux;
        eval.reward_profile = aux;
        eval.perplexity_profile = aux;
        eval.embedding_profile = aux;
        eval.judge_sample_size = options.judge_sample;
        eval.rng_seed = options.seed;
        eval.pair_budget = options.pair_budget;
        eval.problem_solving_avg =
            50.0 + static_cast<double>(fnv1a64(generator_name, options.seed) % 400) / 10.0;

        Gateway eval_gateway(std::make_shared<ProviderRouter>(behavior), gw);
        IntrinsicEvalResult metrics = evaluate_corpus(result.outcomes[method].dataset,
                                                      generator_name, setting, eval_gateway, eval);
        combined.merge(eval_gateway.ledger());
        write_instance_metrics_file(metrics.per_instance, method_dir / "metrics.jsonl");
        summaries.push_back(metrics.summary);
    }

    write_metric_vectors_file(summaries, options.out_dir / "summary.jsonl");

    std::vector<ScoreRecord> scores =
        fabricate_scores(options.methods, options.domain, generator_name, options.seed);
    write_score_records_file(scores, options.out_dir / "scores.jsonl");

    std::vector<PgrCell> cells = pgr_cells(scores);
    result.pgr_table = aggregate(cells);
    write_pgr_report_json(result.pgr_table, options.out_dir / "pgr_report.json");
    {
        std::ofstream out(options.out_dir / "pgr_table.md", std::ios::binary | std::ios::trunc);
        out << render_pgr_table(result.pgr_table);
    }

    if (summaries.size() >= 3) {
        AnalysisDocument analysis = analyze_cells(summaries, cells);
        write_analysis_json(analysis, options.out_dir / "analysis.json");
        {
            std::ofstream out(options.out_dir / "contributions.md",
                              std::ios::binary | std::ios::trunc);
            out << render_contribution_table(analysis.contributions);
        }
        write_plot_series_csv(options.out_dir / "plots" / "weighted_components_vs_pgr.csv",
                              "weighted_top_pc", "pgr", analysis.weighted_regression.weighted_predictor,
                              analysis.target_pgr);
        if (!analysis.problem_solving_x.empty())
            write_plot_series_csv(options.out_dir / "plots" / "problem_solving_vs_pgr.csv",
                                  "problem_solving_avg", "pgr", analysis.problem_solving_x,
                                  analysis.target_pgr);
        result.analysis = std::move(analysis);
    }

    write_ledger_json(combined, profile_map, options.out_dir / "ledger.json");
    return result;
}

// --- report readers -----------------------------------------------------------

PgrTable read_pgr_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::Io, "'" + path.string() + "' is not JSON");
    std::vector<PgrCell> cells;
    for (const auto& cj : j.value("cells", ordered_json::array())) {
        PgrCell cell;
        cell.generator_id = cj.value("generator_id", "");
        cell.setting = SettingKey::from_slug(cj.value("setting", "math.instance_generation"));
        cell.domain_pgr = cj.value("domain_pgr", 0.0);
        if (cj.contains("per_benchmark"))
            for (const auto& [bench, value] : cj["per_benchmark"].items())
                cell.per_benchmark.emplace_back(bench, value.get<double>());
        cells.push_back(std::move(cell));
    }
    return aggregate(cells);
}

AnalysisDocument read_analysis_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::Io, "'" + path.string() + "' is not JSON");
    AnalysisDocument doc;
    doc.row_labels = j.value("rows", std::vector<std::string>{});
    doc.standardized.kept_features = j.value("features", std::vector<std::string>{});
    doc.standardized.dropped_features = j.value("dropped_features", std::vector<std::string>{});
    doc.components.explained_variance_ratios =
        j.value("explained_variance_ratios", std::vector<double>{});
    doc.components.eigenvalues = j.value("eigenvalues", std::vector<double>{});
    doc.components.components = j.value("components", std::vector<std::vector<double>>{});
    doc.components.feature_names = doc.standardized.kept_features;
    for (const auto& cj : j.value("contributions", ordered_json::array())) {
        doc.contributions.push_back({cj.value("feature", ""), cj.value("loading_strength", 0.0),
                                     cj.value("contribution_percent", 0.0)});
    }
    if (j.contains("weighted_regression")) {
        const auto& r = j["weighted_regression"];
        doc.weighted_regression.coefficients = r.value("coefficients", std::vector<double>{});
        doc.weighted_regression.intercept = r.value("intercept", 0.0);
        doc.weighted_regression.r_squared = r.value("r_squared", 0.0);
        doc.weighted_regression.p_value = r.value("p_value", 1.0);
    }
    doc.weighted_regression.weighted_predictor =
        j.value("weighted_predictor", std::vector<double>{});
    doc.target_pgr = j.value("target_pgr", std::vector<double>{});
    doc.problem_solving_x = j.value("problem_solving_x", std::vector<double>{});
    doc.coarse_x = j.value("coarse_x", std::vector<double>{});
    doc.coarse_y = j.value("coarse_y", std::vector<double>{});
    doc.warnings = j.value("warnings", std::vector<std::string>{});
    return doc;
}

}  // namespace agora
