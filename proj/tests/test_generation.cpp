#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agora/generation.hpp"
#include "agora/jsonl.hpp"
#include "agora/pipeline.hpp"
#include "test_util.hpp"

using namespace agora;

namespace {

GeneratorProfile mock_profile() {
    GeneratorProfile p;
    p.name = "mock";
    p.provider = ProviderKind::Mock;
    p.model_id = "mock-model";
    return p;
}

Dataset seed_pool(std::size_t n, DatasetKind kind = DatasetKind::Seed) {
    return synthetic_seed_dataset(Domain::Math, kind, n, 1);
}

GenerationJobConfig base_config(Method method, std::size_t target,
                                const test_util::TempDir& tmp) {
    GenerationJobConfig cfg;
    cfg.setting = SettingKey{Domain::Math, method};
    cfg.generator = mock_profile();
    cfg.prompt_template = builtin_template(method, OutputFormat::FreeformTagged);
    cfg.target_count = target;
    cfg.rng_seed = 7;
    cfg.output_path = tmp / (to_string(method) + ".jsonl");
    cfg.rejection_path = tmp / (to_string(method) + ".rej.jsonl");
    cfg.checkpoint_path = tmp / (to_string(method) + ".ckpt.json");
    if (method == Method::QualityEnhancement) cfg.flags_path = tmp / "flags.jsonl";
    switch (method) {
        case Method::InstanceGeneration: cfg.seed_or_input = seed_pool(20); break;
        case Method::ResponseGeneration:
            cfg.seed_or_input = seed_pool(target + 5, DatasetKind::InstructionOnly);
            break;
        case Method::QualityEnhancement:
            cfg.seed_or_input = seed_pool(target + 5, DatasetKind::RawPairs);
            break;
    }
    return cfg;
}

Gateway make_gateway(std::shared_ptr<MockProvider>& provider, MockBehavior behavior,
                     int in_flight = 4) {
    provider = std::make_shared<MockProvider>(behavior);
    GatewayConfig cfg;
    cfg.max_in_flight = in_flight;
    cfg.backoff_base = std::chrono::milliseconds(1);
    return Gateway(provider, cfg);
}

}  // namespace

TEST_CASE("instance generation hits the budget exactly with sequential ids") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::InstanceGeneration, 5, tmp);
    MockBehavior behavior;
    behavior.method = Method::InstanceGeneration;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    auto outcome = engine.run(cfg);
    REQUIRE(outcome.dataset.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(outcome.dataset.instances[i].id ==
              make_instance_id(cfg.setting, "mock", i));
        CHECK(outcome.dataset.instances[i].origin == Origin::Generated);
    }
    CHECK(validate_dataset(outcome.dataset).empty());
    CHECK(outcome.rejected_count == 0);
}

TEST_CASE("multi-pair replies are truncated to the budget") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::InstanceGeneration, 5, tmp);
    MockBehavior behavior;
    behavior.method = Method::InstanceGeneration;
    behavior.pairs_per_call = 3;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior, 1);
    GenerationEngine engine(gateway);
    auto outcome = engine.run(cfg);
    CHECK(outcome.dataset.size() == 5);
    CHECK(provider->calls() == 2);  // 3 pairs, then 3 truncated to 2
}

TEST_CASE("a generator that always emits garbage trips the rejection ceiling") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::InstanceGeneration, 50, tmp);
    cfg.rejection_ceiling_fraction = 0.2;
    cfg.parse_retry_budget = 1;
    MockBehavior behavior;
    behavior.chat_mode = MockBehavior::ChatMode::Garbage;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    CHECK_THROWS_WITH_AS(engine.run(cfg), doctest::Contains("generator unusable"), Error);
    // rejected slots are audited in the sidecar with raw outputs
    std::string sidecar = test_util::slurp(cfg.rejection_path);
    CHECK(sidecar.find("mock noise") != std::string::npos);
    CHECK(sidecar.find("raw_outputs") != std::string::npos);
}

TEST_CASE("response generation preserves instructions verbatim and in order") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::ResponseGeneration, 3, tmp);
    MockBehavior behavior;
    behavior.method = Method::ResponseGeneration;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    auto outcome = engine.run(cfg);
    REQUIRE(outcome.dataset.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(outcome.dataset.instances[i].instruction ==
              cfg.seed_or_input.instances[i].instruction);
        CHECK(outcome.dataset.instances[i].response.has_value());
    }
}

TEST_CASE("response generation stops at the target") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::ResponseGeneration, 2, tmp);
    MockBehavior behavior;
    behavior.method = Method::ResponseGeneration;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    auto outcome = engine.run(cfg);
    REQUIRE(outcome.dataset.size() == 2);
    CHECK(outcome.dataset.instances[1].instruction == cfg.seed_or_input.instances[1].instruction);
}

TEST_CASE("too few instructions fail before any provider call") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::ResponseGeneration, 3, tmp);
    cfg.seed_or_input.instances.resize(2);
    MockBehavior behavior;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    CHECK_THROWS_AS(engine.run(cfg), Error);
    CHECK(provider->calls() == 0);
}

TEST_CASE("quality enhancement records modification flags") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::QualityEnhancement, 4, tmp);
    MockBehavior behavior;
    behavior.method = Method::QualityEnhancement;
    behavior.refine_mode = MockBehavior::RefineMode::UppercaseResponse;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    auto outcome = engine.run(cfg);
    REQUIRE(outcome.dataset.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const Instance& in = cfg.seed_or_input.instances[i];
        const Instance& out = outcome.dataset.instances[i];
        CHECK(out.instruction == in.instruction);  // instruction untouched
        CHECK(out.response != in.response);        // response uppercased
        CHECK(out.origin == Origin::Enhanced);
    }
    std::string flags = test_util::slurp(cfg.flags_path);
    CHECK(flags.find("\"instruction_modified\":false") != std::string::npos);
    CHECK(flags.find("\"response_modified\":true") != std::string::npos);
}

TEST_CASE("identity refinement keeps the pair verbatim with false flags") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::QualityEnhancement, 3, tmp);
    MockBehavior behavior;
    behavior.method = Method::QualityEnhancement;
    behavior.refine_mode = MockBehavior::RefineMode::Identity;
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    auto outcome = engine.run(cfg);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(outcome.dataset.instances[i].instruction ==
              cfg.seed_or_input.instances[i].instruction);
        CHECK(outcome.dataset.instances[i].response == cfg.seed_or_input.instances[i].response);
    }
    std::string flags = test_util::slurp(cfg.flags_path);
    CHECK(flags.find("\"response_modified\":true") == std::string::npos);
}

TEST_CASE("two complete runs produce byte-identical outputs") {
    test_util::TempDir tmp("gen");
    for (Method method : {Method::InstanceGeneration, Method::ResponseGeneration,
                          Method::QualityEnhancement}) {
        auto run = [&](const std::string& tag) {
            auto cfg = base_config(method, 40, tmp);
            cfg.output_path = tmp / (tag + ".jsonl");
            cfg.rejection_path = tmp / (tag + ".rej");
            cfg.checkpoint_path = tmp / (tag + ".ckpt");
            if (method == Method::QualityEnhancement) cfg.flags_path = tmp / (tag + ".flags");
            MockBehavior behavior;
            behavior.method = method;
            std::shared_ptr<MockProvider> provider;
            Gateway gateway = make_gateway(provider, behavior);
            GenerationEngine engine(gateway);
            engine.run(cfg);
            return test_util::slurp(cfg.output_path);
        };
        CHECK(run("a" + to_string(method)) == run("b" + to_string(method)));
    }
}

TEST_CASE("kill at a checkpoint boundary and resume reproduces the bytes") {
    test_util::TempDir tmp("gen");
    for (std::size_t boundary : {100UL, 200UL}) {
        auto make = [&](const std::string& tag) {
            auto cfg = base_config(Method::InstanceGeneration, 250, tmp);
            cfg.checkpoint_every = 100;
            cfg.output_path = tmp / (tag + ".jsonl");
            cfg.rejection_path = tmp / (tag + ".rej");
            cfg.checkpoint_path = tmp / (tag + ".ckpt");
            return cfg;
        };
        MockBehavior behavior;
        behavior.method = Method::InstanceGeneration;

        auto uninterrupted = make("full-" + std::to_string(boundary));
        {
            std::shared_ptr<MockProvider> provider;
            Gateway gateway = make_gateway(provider, behavior);
            GenerationEngine engine(gateway);
            CHECK(engine.run(uninterrupted).dataset.size() == 250);
        }

        auto resumed = make("resumed-" + std::to_string(boundary));
        resumed.abort_after = boundary;
        {
            std::shared_ptr<MockProvider> provider;
            Gateway gateway = make_gateway(provider, behavior);
            GenerationEngine engine(gateway);
            auto partial = engine.run(resumed);
            CHECK(partial.aborted);
            CHECK(partial.dataset.size() >= boundary);
            CHECK(partial.dataset.size() < 250);
        }
        resumed.abort_after = 0;
        {
            std::shared_ptr<MockProvider> provider;
            Gateway gateway = make_gateway(provider, behavior);
            GenerationEngine engine(gateway);
            auto finished = engine.run(resumed);
            CHECK(finished.resumed);
            CHECK(finished.dataset.size() == 250);
        }
        CHECK(test_util::slurp(resumed.output_path) == test_util::slurp(uninterrupted.output_path));
    }
}

TEST_CASE("resume refuses a mismatched config fingerprint") {
    test_util::TempDir tmp("gen");
    auto cfg = base_config(Method::InstanceGeneration, 60, tmp);
    cfg.abort_after = 20;
    cfg.checkpoint_every = 10;
    MockBehavior behavior;
    behavior.method = Method::InstanceGeneration;
    {
        std::shared_ptr<MockProvider> provider;
        Gateway gateway = make_gateway(provider, behavior);
        GenerationEngine engine(gateway);
        CHECK(engine.run(cfg).aborted);
    }
    cfg.abort_after = 0;
    cfg.rng_seed = 8;  // different job
    std::shared_ptr<MockProvider> provider;
    Gateway gateway = make_gateway(provider, behavior);
    GenerationEngine engine(gateway);
    CHECK_THROWS_WITH_AS(engine.run(cfg), doctest::Contains("fingerprint"), Error);
}

TEST_CASE("generated demos can join the pool without breaking determinism") {
    test_util::TempDir tmp("gen");
    auto run = [&](const std::string& tag) {
        auto cfg = base_config(Method::InstanceGeneration, 30, tmp);
        cfg.include_generated_as_demos = true;
        cfg.seed_or_input = seed_pool(4);
        cfg.demos_per_prompt = 4;
        cfg.output_path = tmp / (tag + ".jsonl");
        cfg.rejection_path.clear();
        cfg.checkpoint_path.clear();
        MockBehavior behavior;
        behavior.method = Method::InstanceGeneration;
        std::shared_ptr<MockProvider> provider;
        Gateway gateway = make_gateway(provider, behavior);
        GenerationEngine engine(gateway);
        auto outcome = engine.run(cfg);
        CHECK(outcome.dataset.size() == 30);
        return test_util::slurp(cfg.output_path);
    };
    CHECK(run("igdemo-a") == run("igdemo-b"));
}

TEST_CASE("export_training_corpus unions seed data for instance generation only") {
    SettingKey ig{Domain::InstructionFollowing, Method::InstanceGeneration};
    Dataset seed = synthetic_seed_dataset(Domain::InstructionFollowing, DatasetKind::Seed, 503, 3);
    Dataset generated;
    generated.kind = DatasetKind::Generated;
    for (std::size_t i = 0; i < 40; ++i) {
        Instance inst;
        inst.id = make_instance_id(ig, "gen", i);
        inst.instruction = "inst " + std::to_string(i);
        inst.response = "resp " + std::to_string(i);
        inst.origin = Origin::Generated;
        generated.instances.push_back(inst);
    }
    Dataset corpus = export_training_corpus(generated, seed, ig);
    CHECK(corpus.size() == 543);
    CHECK(corpus.instances.front().id == seed.instances.front().id);  // seed first

    SettingKey rg{Domain::InstructionFollowing, Method::ResponseGeneration};
    CHECK(export_training_corpus(generated, seed, rg).size() == 40);

    Dataset empty_generated;
    empty_generated.kind = DatasetKind::Generated;
    CHECK(export_training_corpus(empty_generated, seed, ig).size() == seed.size());
}

TEST_CASE("export_training_corpus rejects id collisions") {
    SettingKey ig{Domain::Math, Method::InstanceGeneration};
    Dataset seed = synthetic_seed_dataset(Domain::Math, DatasetKind::Seed, 3, 3);
    Dataset generated;
    generated.kind = DatasetKind::Generated;
    Instance clash = seed.instances.front();
    clash.origin = Origin::Generated;
    generated.instances.push_back(clash);
    CHECK_THROWS_WITH_AS(export_training_corpus(generated, seed, ig),
                         doctest::Contains("collision"), Error);
}
