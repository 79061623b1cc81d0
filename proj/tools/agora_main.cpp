#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "agora/jsonl.hpp"
#include "agora/pipeline.hpp"

using namespace agora;

namespace {

GenerationEngine* g_active_engine = nullptr;

void handle_signal(int) {
    if (g_active_engine) g_active_engine->request_stop();
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Config:
        case ErrorKind::Precondition: return 3;
        default: return 1;
    }
}

std::string timestamp_now() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&now));
    return buf;
}

std::string hash8(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(8, '0');
    for (int i = 7; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

void freeze_config(const RunConfig& config, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << config.raw_json;
}

int validate_or_fail(const RunConfig& config) {
    auto problems = config.validate();
    if (problems.empty()) return 0;
    std::cerr << "error: config validation failed:\n";
    for (const auto& p : problems) std::cerr << "  - " << p << "\n";
    return 3;
}

std::shared_ptr<ProviderRouter> make_router(const RunConfig& config, Method method,
                                            OutputFormat format) {
    MockBehavior behavior;
    behavior.method = method;
    behavior.format = format;
    behavior.seed = config.rng_seed;
    return std::make_shared<ProviderRouter>(behavior);
}

int cmd_generate(const std::string& config_path, bool dry_run, std::string out_dir,
                 std::size_t abort_after, bool resume) {
    RunConfig config = RunConfig::load(config_path);
    if (int rc = validate_or_fail(config)) return rc;

    if (dry_run) {
        DryRunEstimate est = dry_run_estimate(config);
        std::cout << "planned requests: >=" << est.planned_requests << "\n"
                  << "estimated prompt tokens/request: " << est.estimated_prompt_tokens_per_request
                  << "\n"
                  << "completion tokens/request (cap): " << est.completion_tokens_per_request
                  << "\n"
                  << "cost ceiling: $" << est.cost_ceiling.to_string() << "\n";
        return 0;
    }

    std::filesystem::path run_dir =
        out_dir.empty() ? config.output_dir / (timestamp_now() + "-" + hash8(config.config_hash()))
                        : std::filesystem::path(out_dir);
    GenerateRunPaths paths = run_paths(run_dir);
    if (!resume) {
        std::filesystem::remove(paths.checkpoint);
        std::filesystem::remove(paths.corpus);
        std::filesystem::remove(paths.rejections);
        std::filesystem::remove(paths.flags);
    }

    std::vector<std::string> notes;
    GenerationJobConfig job = build_job_config(config, paths, abort_after, &notes);
    for (const auto& n : notes) std::cerr << "note: " << n << "\n";

    Gateway gateway(make_router(config, config.setting.method, job.prompt_template.output_format),
                    config.gateway);
    GenerationEngine engine(gateway);
    g_active_engine = &engine;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    GenerationOutcome outcome = engine.run(job);
    g_active_engine = nullptr;

    freeze_config(config, paths.frozen_config);
    write_ledger_json(gateway.ledger(), config.profiles, paths.ledger);
    {
        nlohmann::ordered_json j;
        j["run_name"] = config.run_name;
        j["setting"] = config.setting.slug();
        j["generator"] = config.generator;
        j["accepted"] = outcome.dataset.size();
        j["rejected"] = outcome.rejected_count;
        j["aborted"] = outcome.aborted;
        j["resumed"] = outcome.resumed;
        j["corpus"] = paths.corpus.string();
        std::ofstream out(paths.summary, std::ios::binary | std::ios::trunc);
        out << j.dump(2) << '\n';
    }
    if (outcome.aborted) {
        std::cerr << "stopped at a checkpoint boundary after " << outcome.dataset.size()
                  << " instances; resume with --resume --out " << run_dir.string() << "\n";
        return 0;
    }
    std::cout << "corpus: " << paths.corpus.string() << " (" << outcome.dataset.size()
              << " instances, " << outcome.rejected_count << " rejected)\n";
    return 0;
}

int cmd_classify_seed(const std::string& config_path, const std::string& input,
                      const std::string& format, const std::string& judge_name,
                      const std::string& math_out, const std::string& other_out) {
    RunConfig config = RunConfig::load(config_path);
    if (int rc = validate_or_fail(config)) return rc;
    const GeneratorProfile& judge = config.profile(
        judge_name.empty() ? (config.judge_a_profile.empty() ? config.generator : config.judge_a_profile)
                           : judge_name);

    Dataset input_ds = load_dataset(input, DatasetKind::RawPairs, config.setting.domain, format);
    Gateway gateway(make_router(config, config.setting.method, OutputFormat::FreeformTagged),
                    config.gateway);
    JudgeFn judge_fn = [&](const std::string& prompt) {
        ChatRequest request;
        request.messages.push_back({"user", prompt});
        request.sampling = judge.sampling;
        return gateway.chat(judge, request).text;
    };

    Dataset math_ds, other_ds;
    math_ds.domain = Domain::Math;
    math_ds.kind = input_ds.kind;
    other_ds.domain = input_ds.domain;
    other_ds.kind = input_ds.kind;
    for (const Instance& inst : input_ds.instances) {
        if (classify_math_domain(inst, judge_fn) == SeedDomainLabel::Math)
            math_ds.instances.push_back(inst);
        else
            other_ds.instances.push_back(inst);
    }
    write_dataset_file(math_ds, math_out);
    write_dataset_file(other_ds, other_out);
    std::cout << "math: " << math_ds.size() << " instances -> " << math_out << "\n"
              << "other: " << other_ds.size() << " instances -> " << other_out << "\n";
    return 0;
}

int cmd_eval_intrinsic(const std::string& config_path, const std::string& corpus_path,
                       std::string generator_id, std::string setting_slug,
                       const std::string& out_dir) {
    RunConfig config = RunConfig::load(config_path);
    if (int rc = validate_or_fail(config)) return rc;

    SettingKey setting = setting_slug.empty() ? config.setting : SettingKey::from_slug(setting_slug);
    Dataset corpus = load_dataset(corpus_path, DatasetKind::Generated, setting.domain);
    if (generator_id.empty()) {
        generator_id = config.generator;
        if (!corpus.instances.empty() && corpus.instances.front().generator_id)
            generator_id = *corpus.instances.front().generator_id;
    }

    IntrinsicEvalConfig eval;
    auto pick = [&](const std::string& name) -> std::optional<GeneratorProfile> {
        if (name.empty()) return std::nullopt;
        return config.profile(name);
    };
    eval.judge_a = pick(config.judge_a_profile);
    eval.judge_b = pick(config.judge_b_profile);
    eval.reward_profile = pick(config.reward_profile);
    eval.perplexity_profile = pick(config.perplexity_profile);
    eval.embedding_profile = pick(config.embedding_profile);
    eval.judge_sample_size = config.judge_sample_size;
    eval.pair_budget = config.pair_budget;
    eval.rng_seed = config.rng_seed;
    eval.diversity_as_distance = config.diversity_as_distance;
    if (!config.problem_solving_scores.empty()) {
        auto averages = load_problem_solving_averages(config.problem_solving_scores);
        if (auto it = averages.find(generator_id); it != averages.end())
            eval.problem_solving_avg = it->second;
    }

    Gateway gateway(make_router(config, setting.method, OutputFormat::FreeformTagged),
                    config.gateway);
    IntrinsicEvalResult result = evaluate_corpus(corpus, generator_id, setting, gateway, eval);

    std::filesystem::path dir(out_dir);
    write_instance_metrics_file(result.per_instance, dir / "metrics.jsonl");
    write_metric_vectors_file({result.summary}, dir / "summary.jsonl");
    write_ledger_json(gateway.ledger(), config.profiles, dir / "ledger.json");
    std::cout << "scored " << result.sampled_instances << " instances -> "
              << (dir / "summary.jsonl").string() << "\n";
    return 0;
}

int cmd_pgr(const std::string& scores_path, const std::string& out_dir) {
    auto records = read_score_records_file(scores_path);
    PgrTable table = aggregate(pgr_cells(records));
    std::filesystem::path dir(out_dir);
    write_pgr_report_json(table, dir / "pgr_report.json");
    std::cout << render_pgr_table(table);
    for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_analyze(const std::string& metrics_path, const std::string& scores_path,
                const std::string& out_dir, std::size_t top_k) {
    auto metrics = read_metric_vectors_file(metrics_path);
    auto cells = pgr_cells(read_score_records_file(scores_path));
    AnalyzeOptions options;
    options.top_k = top_k;
    AnalysisDocument doc = analyze_cells(metrics, cells, options);
    std::filesystem::path dir(out_dir);
    write_analysis_json(doc, dir / "analysis.json");
    std::cout << render_contribution_table(doc.contributions);
    std::cout << "weighted top-" << doc.weighted_regression.coefficients.size()
              << " PC regression: R^2 = " << doc.weighted_regression.r_squared
              << ", p = " << doc.weighted_regression.p_value << "\n";
    for (const auto& w : doc.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_report(const std::string& pgr_path, const std::string& analysis_path,
               const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    if (!pgr_path.empty()) {
        PgrTable table = read_pgr_report_json(pgr_path);
        std::ofstream out(dir / "pgr_table.md", std::ios::binary | std::ios::trunc);
        out << render_pgr_table(table);
        std::cout << "wrote " << (dir / "pgr_table.md").string() << "\n";
    }
    if (!analysis_path.empty()) {
        AnalysisDocument doc = read_analysis_json(analysis_path);
        {
            std::ofstream out(dir / "contributions.md", std::ios::binary | std::ios::trunc);
            out << render_contribution_table(doc.contributions);
        }
        if (!doc.weighted_regression.weighted_predictor.empty())
            write_plot_series_csv(dir / "plots" / "weighted_components_vs_pgr.csv",
                                  "weighted_top_pc", "pgr",
                                  doc.weighted_regression.weighted_predictor, doc.target_pgr);
        if (!doc.problem_solving_x.empty())
            write_plot_series_csv(dir / "plots" / "problem_solving_vs_pgr.csv",
                                  "problem_solving_avg", "pgr", doc.problem_solving_x,
                                  doc.target_pgr);
        if (!doc.coarse_x.empty())
            write_plot_series_csv(dir / "plots" / "problem_solving_vs_pgr_coarse.csv",
                                  "problem_solving_avg", "mean_pgr", doc.coarse_x, doc.coarse_y);
        std::cout << "wrote " << (dir / "contributions.md").string() << "\n";
    }
    return 0;
}

int cmd_mock_run(MockRunOptions options) {
    MockRunResult result = mock_run(options);
    if (result.aborted) {
        std::cerr << "stopped at a checkpoint boundary; resume with --resume\n";
        return 0;
    }
    for (const auto& [method, outcome] : result.outcomes)
        std::cout << to_string(method) << ": " << outcome.dataset.size() << " instances, "
                  << outcome.rejected_count << " rejected\n";
    std::cout << "outputs under " << options.out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic data generation, intrinsic evaluation and PGR analysis"};
    app.require_subcommand(1);

    std::string config_path, out_dir, input, math_out, other_out, judge, format = "canonical";
    std::string corpus, generator_id, setting_slug, scores, metrics, pgr_json, analysis_json;
    bool dry_run = false, resume = false;
    std::size_t abort_after = 0, top_k = 5;

    auto* generate = app.add_subcommand("generate", "run a generation job from a config file");
    generate->add_option("--config", config_path, "run config (JSON)")->required();
    generate->add_flag("--dry-run", dry_run, "validate config, print plan and cost ceiling");
    generate->add_option("--out", out_dir, "fixed run directory (default: timestamped)");
    generate->add_option("--abort-after", abort_after,
                         "stop gracefully after N accepted instances (testing aid)");
    generate->add_flag("--resume", resume, "resume from the checkpoint in --out");

    auto* classify = app.add_subcommand("classify-seed", "split a dataset into math/other");
    classify->add_option("--config", config_path, "run config (JSON)")->required();
    classify->add_option("--input", input, "dataset to classify")->required();
    classify->add_option("--format", format, "canonical|minimal");
    classify->add_option("--judge", judge, "judge profile (default: judge_a or generator)");
    classify->add_option("--math-out", math_out, "output path for math instances")->required();
    classify->add_option("--other-out", other_out, "output path for other instances")->required();

    auto* eval = app.add_subcommand("eval-intrinsic", "score a corpus with the metric suite");
    eval->add_option("--config", config_path, "run config (JSON)")->required();
    eval->add_option("--corpus", corpus, "generated corpus (JSONL)")->required();
    eval->add_option("--generator", generator_id, "generator id for the summary row");
    eval->add_option("--setting", setting_slug, "setting slug, e.g. math.instance_generation");
    eval->add_option("--out", out_dir, "output directory")->required();

    auto* pgr_cmd = app.add_subcommand("pgr", "compute performance-gap-recovered tables");
    pgr_cmd->add_option("--scores", scores, "score records (JSONL)")->required();
    pgr_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* analyze = app.add_subcommand("analyze", "PCA + regressions over metric/PGR grid");
    analyze->add_option("--metrics", metrics, "metric summary file (JSONL)")->required();
    analyze->add_option("--scores", scores, "score records (JSONL)")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--top-k", top_k, "principal components to keep (default 5)");

    auto* report = app.add_subcommand("report", "render tables and plot data");
    report->add_option("--pgr", pgr_json, "pgr_report.json");
    report->add_option("--analysis", analysis_json, "analysis.json");
    report->add_option("--out", out_dir, "output directory")->required();

    MockRunOptions mock_options;
    std::string mock_domain = "math", mock_format = "freeform_tagged", mock_methods;
    auto* mock = app.add_subcommand("mock-run",
                                    "full offline pipeline against the in-tree mock provider");
    mock->add_option("--target", mock_options.target, "instances per method (default 1000)");
    mock->add_option("--seed", mock_options.seed, "rng seed (default 42)");
    mock->add_option("--out", mock_options.out_dir, "output directory")->required();
    mock->add_option("--domain", mock_domain, "math|code|instruction_following");
    mock->add_option("--format", mock_format, "freeform_tagged|json");
    mock->add_option("--templates", mock_options.template_pack_dir,
                     "template pack directory (default: built-in templates)");
    mock->add_option("--judge-sample", mock_options.judge_sample,
                     "instances scored per corpus (default 50)");
    mock->add_option("--abort-after", mock_options.abort_after,
                     "stop gracefully after N accepted instances (testing aid)");
    mock->add_flag("--resume", mock_options.resume, "resume unfinished jobs from checkpoints");
    mock->add_option("--methods", mock_methods,
                     "comma-separated subset of the three methods");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(config_path, dry_run, out_dir, abort_after, resume);
        if (classify->parsed())
            return cmd_classify_seed(config_path, input, format, judge, math_out, other_out);
        if (eval->parsed())
            return cmd_eval_intrinsic(config_path, corpus, generator_id, setting_slug, out_dir);
        if (pgr_cmd->parsed()) return cmd_pgr(scores, out_dir);
        if (analyze->parsed()) return cmd_analyze(metrics, scores, out_dir, top_k);
        if (report->parsed()) return cmd_report(pgr_json, analysis_json, out_dir);
        if (mock->parsed()) {
            mock_options.domain = domain_from_string(mock_domain);
            mock_options.format = output_format_from_string(mock_format);
            if (!mock_methods.empty()) {
                mock_options.methods.clear();
                std::stringstream ss(mock_methods);
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) mock_options.methods.push_back(method_from_string(item));
            }
            return cmd_mock_run(mock_options);
        }
    } catch (const Error& e) {
        std::cerr << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
