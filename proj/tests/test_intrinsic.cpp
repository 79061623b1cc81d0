#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "agora/intrinsic.hpp"
#include "agora/mock_provider.hpp"
#include "agora/pipeline.hpp"
#include "oracles.hpp"

using namespace agora;

namespace {

GeneratorProfile mock_profile(const std::string& name = "scorer") {
    GeneratorProfile p;
    p.name = name;
    p.provider = ProviderKind::Mock;
    p.model_id = "mock-model";
    return p;
}

Instance instance(const std::string& id, const std::string& instruction,
                  const std::string& response) {
    Instance inst;
    inst.id = id;
    inst.instruction = instruction;
    inst.response = response;
    inst.origin = Origin::Generated;
    return inst;
}

Gateway mock_gateway(MockBehavior behavior = {}) {
    GatewayConfig cfg;
    cfg.backoff_base = std::chrono::milliseconds(1);
    return Gateway(std::make_shared<MockProvider>(behavior), cfg);
}

}  // namespace

TEST_CASE("standard rubrics describe exactly scores 1-5 for every mode and domain") {
    for (RubricMode mode : {RubricMode::ResponseQuality, RubricMode::InstructionDifficulty}) {
        for (Domain domain :
             {Domain::Math, Domain::Code, Domain::InstructionFollowing}) {
            auto rubric = RubricPrompt::standard(mode, domain);
            CHECK_NOTHROW(rubric.check());
            std::string prompt = rubric.render(instance("x", "the instruction", "the response"));
            CHECK(prompt.find("the instruction") != std::string::npos);
            CHECK(prompt.find("[RESULT]") != std::string::npos);
            CHECK(prompt.find("{score_rubric}") == std::string::npos);
        }
    }
}

TEST_CASE("judge reply parsing follows the feedback-then-result format") {
    auto verdict = parse_judge_reply("Feedback: clear and correct. [RESULT] 4");
    REQUIRE(verdict.has_value());
    CHECK(verdict->score == 4);
    CHECK(verdict->feedback == "clear and correct.");

    CHECK_THROWS_WITH_AS(parse_judge_reply("meh [RESULT] 7"), doctest::Contains("out of range"),
                         Error);
    CHECK_THROWS_AS(parse_judge_reply("bad [RESULT] 0"), Error);
    CHECK_THROWS_AS(parse_judge_reply("bad [RESULT] -2"), Error);
    CHECK(!parse_judge_reply("no marker at all").has_value());
    CHECK(!parse_judge_reply("[RESULT] x").has_value());
    CHECK(!parse_judge_reply("[RESULT] 4.5").has_value());
    CHECK(parse_judge_reply("text [RESULT] (3)")->score == 3);
    CHECK(parse_judge_reply("a [RESULT] 2\n")->score == 2);
}

TEST_CASE("judge_score re-prompts once then fails with the raw reply") {
    MockBehavior behavior;
    behavior.chat_mode = MockBehavior::ChatMode::FixedText;
    behavior.fixed_text = "I simply refuse to grade.";
    auto provider = std::make_shared<MockProvider>(behavior);
    GatewayConfig cfg;
    Gateway gateway(provider, cfg);
    auto rubric = RubricPrompt::standard(RubricMode::ResponseQuality, Domain::Math);
    CHECK_THROWS_WITH_AS(judge_score(instance("x", "q", "r"), rubric, gateway, mock_profile()),
                         doctest::Contains("I simply refuse to grade."), Error);
    CHECK(provider->calls() == 2);
}

TEST_CASE("judge_score accepts the mock judge verdict") {
    Gateway gateway = mock_gateway();
    auto rubric = RubricPrompt::standard(RubricMode::InstructionDifficulty, Domain::Code);
    auto verdict = judge_score(instance("x", "write quicksort", "code"), rubric, gateway,
                               mock_profile("judge"));
    CHECK(verdict.score >= 1);
    CHECK(verdict.score <= 5);
    CHECK(!verdict.feedback.empty());
}

TEST_CASE("perplexity closed forms") {
    CHECK(perplexity_from_logprobs({0.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    double ln2 = std::log(2.0);
    CHECK(perplexity_from_logprobs({-ln2, -ln2, -ln2, -ln2}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    // exp(-mean({-1,-3})) = exp(2), cross-checked by hand and by script
    CHECK(perplexity_from_logprobs({-1.0, -3.0}) ==
          doctest::Approx(7.38905609893065).epsilon(1e-12));
}

TEST_CASE("perplexity rejects empty and positive-logprob inputs") {
    CHECK_THROWS_AS(perplexity_from_logprobs({}), Error);
    CHECK_THROWS_WITH_AS(perplexity_from_logprobs({-0.5, 0.25}),
                         doctest::Contains("invalid logprob"), Error);
}

TEST_CASE("response_perplexity scores the response conditioned on the instruction") {
    MockBehavior behavior;
    behavior.per_token_logprob = -std::log(2.0);
    Gateway gateway = mock_gateway(behavior);
    double ppl = response_perplexity(instance("x", "say yes", "yes yes yes"), gateway,
                                     mock_profile());
    CHECK(ppl == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("diversity identities") {
    std::vector<std::vector<double>> same = {{0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}};
    auto s = diversity_from_vectors(same, 1000, 0);
    CHECK(s.mean_cosine_similarity == doctest::Approx(1.0));
    CHECK(s.mean_cosine_distance == doctest::Approx(0.0));

    std::vector<std::vector<double>> orthogonal = {{1.0, 0.0}, {0.0, 2.0}};
    auto o = diversity_from_vectors(orthogonal, 10, 0);
    CHECK(o.mean_cosine_similarity == doctest::Approx(0.0));
    CHECK(o.mean_cosine_distance == doctest::Approx(1.0));
}

TEST_CASE("diversity matches the all-pairs brute force on the documented triple") {
    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<std::vector<double>> vectors = {{1, 0}, {0, 1}, {inv_sqrt2, inv_sqrt2}};
    auto result = diversity_from_vectors(vectors, 100, 0);
    CHECK(result.pairs_evaluated == 3);
    CHECK(std::fabs(result.mean_cosine_similarity - 0.4714045207910317) < 1e-6);
    CHECK(result.mean_cosine_similarity ==
          doctest::Approx(oracle::brute_force_mean_cosine(vectors)).epsilon(1e-12));
}

TEST_CASE("subsampled diversity equals all-pairs when the budget covers C(n,2)") {
    SplitMix64 rng(3);
    std::vector<std::vector<double>> vectors;
    for (int i = 0; i < 12; ++i) {
        std::vector<double> v(5);
        for (double& x : v) x = rng.next_unit() + 0.1;
        vectors.push_back(v);
    }
    auto budgeted = diversity_from_vectors(vectors, 66, 9);  // C(12,2) = 66
    auto oracle_mean = oracle::brute_force_mean_cosine(vectors);
    CHECK(budgeted.mean_cosine_similarity == doctest::Approx(oracle_mean).epsilon(1e-12));
    CHECK(budgeted.pairs_evaluated == 66);

    // permutation invariance in all-pairs mode
    std::reverse(vectors.begin(), vectors.end());
    auto reversed = diversity_from_vectors(vectors, 66, 9);
    CHECK(reversed.mean_cosine_similarity ==
          doctest::Approx(budgeted.mean_cosine_similarity).epsilon(1e-12));
}

TEST_CASE("subsampled diversity is deterministic and within bounds") {
    SplitMix64 rng(5);
    std::vector<std::vector<double>> vectors;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> v(8);
        for (double& x : v) x = rng.next_unit() * 2.0 - 1.0;
        if (std::fabs(v[0]) < 1e-3) v[0] = 0.5;
        vectors.push_back(v);
    }
    auto a = diversity_from_vectors(vectors, 100, 7);
    auto b = diversity_from_vectors(vectors, 100, 7);
    CHECK(a.mean_cosine_similarity == b.mean_cosine_similarity);
    CHECK(a.pairs_evaluated == 100);
    CHECK(a.mean_cosine_similarity >= -1.0);
    CHECK(a.mean_cosine_similarity <= 1.0);
    CHECK(a.mean_cosine_distance == doctest::Approx(1.0 - a.mean_cosine_similarity));
}

TEST_CASE("diversity errors") {
    CHECK_THROWS_AS(diversity_from_vectors({{1.0}}, 10, 0), Error);
    CHECK_THROWS_WITH_AS(diversity_from_vectors({{1.0, 0.0}, {0.0, 0.0}}, 10, 0),
                         doctest::Contains("index 1"), Error);
    CHECK_THROWS_AS(diversity_from_vectors({{1.0}, {1.0}}, 0, 0), Error);
}

TEST_CASE("reward scoring through the mock scalar scorer") {
    MockBehavior behavior;
    behavior.reward_is_response_length = true;
    Gateway gateway = mock_gateway(behavior);
    CHECK(reward_score(instance("x", "q", "12345"), gateway, mock_profile()) ==
          doctest::Approx(5.0));
    // determinism of the hash-based default
    Gateway gateway2 = mock_gateway();
    double first = reward_score(instance("x", "q", "resp"), gateway2, mock_profile());
    double second = reward_score(instance("x", "q", "resp"), gateway2, mock_profile());
    CHECK(first == second);
}

TEST_CASE("summarize averages per-metric and carries problem-solving through") {
    std::vector<InstanceMetrics> rows(2);
    rows[0].instance_id = "a";
    rows[0].judge_response_quality_a = 3;
    rows[1].instance_id = "b";
    rows[1].judge_response_quality_a = 5;
    auto mv = summarize("GPT-4o", SettingKey{Domain::Math, Method::InstanceGeneration}, rows,
                        std::nullopt, std::nullopt, 80.9);
    CHECK(mv.judge_response_quality_a == doctest::Approx(4.0));
    CHECK(mv.problem_solving_avg == doctest::Approx(80.9));
    CHECK(!mv.reward_score.has_value());  // missing stays missing

    auto single = summarize("g", mv.setting, {rows[0]}, std::nullopt, std::nullopt, std::nullopt);
    CHECK(single.judge_response_quality_a == doctest::Approx(3.0));
}

TEST_CASE("summarize fails when every metric is missing") {
    std::vector<InstanceMetrics> rows(1);
    rows[0].instance_id = "a";
    CHECK_THROWS_AS(summarize("g", SettingKey{}, rows, std::nullopt, std::nullopt, std::nullopt),
                    Error);
}

TEST_CASE("summarize stores the configured diversity orientation") {
    DiversityResult d;
    d.mean_cosine_similarity = 0.6;
    d.mean_cosine_distance = 0.4;
    std::vector<InstanceMetrics> rows(1);
    rows[0].instance_id = "a";
    rows[0].reward = 1.0;
    auto dist = summarize("g", SettingKey{}, rows, d, d, std::nullopt, true);
    CHECK(dist.instruction_diversity == doctest::Approx(0.4));
    auto sim = summarize("g", SettingKey{}, rows, d, d, std::nullopt, false);
    CHECK(sim.instruction_diversity == doctest::Approx(0.6));
}

TEST_CASE("evaluate_corpus fills the full metric vector from the mock provider") {
    Dataset corpus = synthetic_seed_dataset(Domain::Math, DatasetKind::RawPairs, 30, 11);
    corpus.kind = DatasetKind::Generated;
    for (auto& inst : corpus.instances) inst.origin = Origin::Generated;

    IntrinsicEvalConfig config;
    config.judge_a = mock_profile("judge-a");
    config.judge_b = mock_profile("judge-b");
    config.reward_profile = mock_profile("reward");
    config.perplexity_profile = mock_profile("ppl");
    config.embedding_profile = mock_profile("embed");
    config.judge_sample_size = 10;
    config.rng_seed = 4;
    config.problem_solving_avg = 77.0;

    Gateway gateway = mock_gateway();
    auto result = evaluate_corpus(corpus, "mock", SettingKey{Domain::Math, Method::InstanceGeneration},
                                  gateway, config);
    CHECK(result.sampled_instances == 10);
    CHECK(result.per_instance.size() == 10);
    for (const auto& m : result.per_instance) {
        REQUIRE(m.judge_instruction_difficulty_a.has_value());
        CHECK(*m.judge_instruction_difficulty_a >= 1);
        CHECK(*m.judge_instruction_difficulty_a <= 5);
        CHECK(m.perplexity.value() >= 1.0);
    }
    for (std::size_t f = 0; f < MetricVector::feature_names().size(); ++f)
        CHECK(result.summary.feature(f).has_value());

    // instance metrics round-trip through their line format
    auto line = instance_metrics_to_line(result.per_instance[0]);
    auto back = instance_metrics_from_line(line);
    CHECK(back.instance_id == result.per_instance[0].instance_id);
    CHECK(back.perplexity == result.per_instance[0].perplexity);
}

TEST_CASE("missing scorers leave metrics flagged missing") {
    Dataset corpus = synthetic_seed_dataset(Domain::Math, DatasetKind::RawPairs, 5, 2);
    corpus.kind = DatasetKind::Generated;
    IntrinsicEvalConfig config;
    config.judge_a = mock_profile("judge-a");
    config.judge_sample_size = 0;
    Gateway gateway = mock_gateway();
    auto result = evaluate_corpus(corpus, "mock", SettingKey{}, gateway, config);
    CHECK(!result.summary.reward_score.has_value());
    CHECK(!result.summary.response_perplexity.has_value());
    CHECK(!result.summary.instruction_diversity.has_value());
    CHECK(result.summary.judge_instruction_difficulty_a.has_value());
}
