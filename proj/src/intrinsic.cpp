#include "agora/intrinsic.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "agora/seed_ingest.hpp"

namespace agora {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kJudgeFrame =
    "###Task Description:\n"
    "An instruction (might include an Input inside it), a response to evaluate, and a score "
    "rubric representing a evaluation criteria are given.\n"
    "1. Write a detailed feedback that assess the quality of the response strictly based on the "
    "given score rubric, not evaluating in general.\n"
    "2. After writing a feedback, write a score that is an integer between 1 and 5. You should "
    "refer to the score rubric.\n"
    "3. The output format should look as follows: \"Feedback: (write a feedback for criteria) "
    "[RESULT] (an integer number between 1 and 5)\"\n"
    "4. Please do not generate any other opening, closing, and explanations.\n"
    "\n"
    "###The instruction to evaluate:\n"
    "{instruction}\n"
    "\n"
    "###Response to evaluate:\n"
    "{response}\n"
    "\n"
    "###Score Rubric:\n"
    "{score_rubric}\n"
    "\n"
    "###Feedback:";

const char* response_quality_rubric(Domain domain) {
    switch (domain) {
        case Domain::Math:
            return "Does the solution demonstrate mathematical correctness, reasoning, clarity, "
                   "and precision?\n"
                   "\n"
                   "Score 1 Description: The solution is incorrect or mathematically flawed, with "
                   "major errors in reasoning, calculations, or logic, making the answer "
                   "unusable.\n"
                   "Score 2 Description: The solution contains relevant or partially correct "
                   "information, but has significant errors in calculations or reasoning that "
                   "substantially affect the result.\n"
                   "Score 3 Description: The solution is mostly correct but may contain minor "
                   "mistakes or gaps in reasoning. The overall structure and approach are sound, "
                   "but some calculations or logic may need refinement.\n"
                   "Score 4 Description: The solution is correct, well-reasoned, and clear, "
                   "though there may be slight room for improvement or minor refinements to "
                   "become a perfect solution to the problem.\n"
                   "Score 5 Description: The solution is excellent, fully correct, and "
                   "demonstrates a high level of mathematical precision, clarity, and "
                   "creativity, with well-articulated reasoning and no errors.";
        case Domain::Code:
            return "How effective, efficient, and logically sound is the code solution, focusing "
                   "on performance, executability, and correctness?\n"
                   "\n"
                   "Score 1 Description: The code contains fundamental logic or syntax errors, "
                   "making it incorrect or unexecutable. It fails to complete the intended task "
                   "or produces entirely incorrect outputs.\n"
                   "Score 2 Description: The code is partially functional but contains major "
                   "logic errors or inefficiencies that significantly impact performance or "
                   "correctness. It may run but produces incorrect or incomplete results.\n"
                   "Score 3 Description: The code is mostly correct and executable, though there "
                   "may be minor logic issues, inefficiencies, or suboptimal use of data "
                   "structures or algorithms. The solution functions as intended, but "
                   "improvements could make it more efficient or robust.\n"
                   "Score 4 Description: The code is fully correct, functional, and reasonably "
                   "efficient. It completes the task as intended, balancing performance with "
                   "logical soundness. Minor optimizations could still enhance performance.\n"
                   "Score 5 Description: The code is fully correct, optimally efficient, and "
                   "logically robust, providing the best possible performance for the task. It "
                   "executes flawlessly without errors or any significant room for improvement.";
        case Domain::InstructionFollowing:
            return "Does the response consider a wide range of factors such as the helpfulness, "
                   "relevance, accuracy, depth, creativity, and level of detail?\n"
                   "\n"
                   "Score 1 Description: The response is not helpful at all or seems helpful on "
                   "the surface but is actually incorrect such as including incorrect "
                   "information, naive miscalculations, or unexecutable code.\n"
                   "Score 2 Description: The response contains some relevant or helpful "
                   "information, but also has major flaws interms of factuality, accuracy, and "
                   "relevance.\n"
                   "Score 3 Description: The response is mostly correct but minor flaws regarding "
                   "factuality, accuracy, and relevance still exists, while it is overall an "
                   "okay response.\n"
                   "Score 4 Description: The response is accurate, relevant, and helpful, "
                   "although there are some slight improvements that could be made when an "
                   "expert evaluates the response.\n"
                   "Score 5 Description: The response is excellent. It is completely factual, "
                   "accurate, relevant, and helpful, demonstrating a high degree of depth and "
                   "creativity.";
    }
    return "";
}

const char* instruction_difficulty_rubric(Domain domain) {
    switch (domain) {
        case Domain::Math:
            return "How complex and challenging is the math problem to solve?\n"
                   "\n"
                   "Score 1 Description: The problem requires only simple operations or direct "
                   "application of a single, basic concept. Minimal reasoning is needed, and the "
                   "solution follows immediately from applying a known rule or formula.\n"
                   "Score 2 Description: The problem requires basic reasoning and involves "
                   "applying a familiar formula or concept with slight variation. It may involve "
                   "a straightforward multi-step process, but each step is clear and relies on "
                   "commonly used methods.\n"
                   "Score 3 Description: The problem requires moderate reasoning, combining "
                   "multiple concepts that interact in a meaningful way. Solving it involves "
                   "several steps and may require logical sequencing or some abstraction, but "
                   "the approach is approachable with a solid foundational understanding.\n"
                   "Score 4 Description: The problem demands advanced reasoning, involving "
                   "multiple interdependent concepts that require careful coordination. Solution "
                   "steps are less obvious, requiring critical thinking and possibly choosing "
                   "between multiple solution paths. Solving the problem involves more abstract "
                   "reasoning or creative application of concepts.\n"
                   "Score 5 Description: The problem is extremely complex and demands "
                   "sophisticated reasoning and problem-solving skills. It may involve novel "
                   "combinations of concepts, intricate logical chains, or innovative approaches "
                   "to solve. This level typically requires significant abstraction, exploration "
                   "of unconventional methods, and flexibility in adapting mathematical tools.";
        case Domain::Code:
            return "How complex and challenging is the coding problem to solve?\n"
                   "\n"
                   "Score 1 Description: The problem involves implementing simple functionality "
                   "or a direct operation. It requires minimal logic, with a straightforward "
                   "approach and no complex decision-making.\n"
                   "Score 2 Description: The problem requires basic control flow, such as using "
                   "loops or conditional statements. The logic is clear and sequential, with "
                   "minimal interaction between different parts of the code.\n"
                   "Score 3 Description: The problem involves intermediate logic, combining "
                   "multiple programming constructs and requiring a coherent structure. Solving "
                   "it requires handling a sequence of steps with basic data manipulation, but "
                   "follows a familiar, manageable approach.\n"
                   "Score 4 Description: The problem demands advanced reasoning and use of "
                   "complex data structures or algorithms. It involves non-trivial interactions, "
                   "such as managing multiple components and optimizing for efficiency. The "
                   "solution requires significant algorithmic thinking and structured problem "
                   "decomposition.\n"
                   "Score 5 Description: The problem is extremely complex, requiring "
                   "sophisticated algorithm design, efficient data handling, and advanced "
                   "techniques. It demands innovative approaches, with intricate component "
                   "interactions and constraints that need careful optimization. Solving it "
                   "typically requires deep problem-solving skills and adaptability across "
                   "programming paradigms.";
        case Domain::InstructionFollowing:
            return "How complex and challenging is the given instruction to answer perfectly?\n"
                   "\n"
                   "Score 1 Description: The instruction requires only factual knowledge, without "
                   "any need for reasoning or critical thinking. A straightforward, single-step "
                   "response suffices.\n"
                   "Score 2 Description: The instruction requires some reasoning, such as "
                   "explaining a concept involving multiple simple ideas, solving a "
                   "straightforward problem, or providing a response that involves a few logical "
                   "steps, though still simple in nature.\n"
                   "Score 3 Description: The instruction requires a substantial amount of "
                   "reasoning and the integration of multiple related concepts. Answering it "
                   "accurately involves a multi-step process and may require intermediate-level "
                   "knowledge or analytical thinking.\n"
                   "Score 4 Description: The instruction requires advanced reasoning, demanding "
                   "deep understanding of complex concepts or substantial problem-solving. "
                   "Answering it requires carefully navigating multiple interrelated ideas or "
                   "steps, often involving specialized knowledge or sophisticated analytical "
                   "skills.\n"
                   "Score 5 Description: The instruction is exceptionally challenging and "
                   "requires high-level reasoning or novel problem-solving. It involves "
                   "extensive conceptual understanding, abstraction, and potentially innovative "
                   "thinking, with substantial effort required to arrive at an accurate and "
                   "complete answer.";
    }
    return "";
}

void replace_all(std::string& text, const std::string& token, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(RubricMode m) {
    return m == RubricMode::ResponseQuality ? "response_quality" : "instruction_difficulty";
}

RubricPrompt RubricPrompt::standard(RubricMode mode, Domain domain) {
    RubricPrompt rubric;
    rubric.mode = mode;
    rubric.domain = domain;
    rubric.judge_template = kJudgeFrame;
    rubric.rubric_text = mode == RubricMode::ResponseQuality
                             ? response_quality_rubric(domain)
                             : instruction_difficulty_rubric(domain);
    rubric.check();
    return rubric;
}

void RubricPrompt::check() const {
    for (int score = 1; score <= 5; ++score) {
        std::string marker = "Score " + std::to_string(score) + " Description:";
        if (rubric_text.find(marker) == std::string::npos)
            throw Error(ErrorKind::Config, "rubric lacks a description for score " +
                                               std::to_string(score));
    }
    for (int score : {0, 6}) {
        std::string marker = "Score " + std::to_string(score) + " Description:";
        if (rubric_text.find(marker) != std::string::npos)
            throw Error(ErrorKind::Config,
                        "rubric describes out-of-range score " + std::to_string(score));
    }
    if (judge_template.find("{score_rubric}") == std::string::npos ||
        judge_template.find("{instruction}") == std::string::npos)
        throw Error(ErrorKind::Config, "judge template lacks required slots");
}

std::string RubricPrompt::render(const Instance& instance) const {
    if (mode == RubricMode::ResponseQuality && !instance.response.has_value())
        throw Error(ErrorKind::Precondition,
                    "response-quality judging requires a response ('" + instance.id + "')");
    std::string prompt = judge_template;
    replace_all(prompt, "{instruction}", instance.instruction);
    replace_all(prompt, "{response}", instance.response.value_or(""));
    replace_all(prompt, "{score_rubric}", rubric_text);
    return prompt;
}

std::optional<JudgeVerdict> parse_judge_reply(const std::string& reply) {
    const std::string marker = "[RESULT]";
    std::size_t pos = reply.rfind(marker);
    if (pos == std::string::npos) return std::nullopt;
    std::string feedback = trimmed(reply.substr(0, pos));
    if (feedback.rfind("Feedback:", 0) == 0) feedback = trimmed(feedback.substr(9));

    std::size_t i = pos + marker.size();
    while (i < reply.size() && (reply[i] == ' ' || reply[i] == '\t' || reply[i] == '(')) ++i;
    bool negative = false;
    if (i < reply.size() && (reply[i] == '-' || reply[i] == '+')) {
        negative = reply[i] == '-';
        ++i;
    }
    std::size_t digits_begin = i;
    long value = 0;
    while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) {
        value = value * 10 + (reply[i] - '0');
        ++i;
    }
    if (i == digits_begin) return std::nullopt;
    // "4.5" is not an integer verdict
    if (i + 1 < reply.size() && reply[i] == '.' && std::isdigit(static_cast<unsigned char>(reply[i + 1])))
        return std::nullopt;
    if (negative) value = -value;
    if (value < 1 || value > 5)
        throw Error(ErrorKind::Scoring, "score out of range: " + std::to_string(value));
    return JudgeVerdict{static_cast<int>(value), feedback};
}

JudgeVerdict judge_score(const Instance& instance, const RubricPrompt& rubric, Gateway& gateway,
                         const GeneratorProfile& judge) {
    const std::string prompt = rubric.render(instance);
    ChatRequest request;
    request.messages.push_back({"user", prompt});
    request.sampling = judge.sampling;
    std::string last_reply;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResult reply = gateway.chat(judge, request);
        last_reply = reply.text;
        if (auto verdict = parse_judge_reply(reply.text)) return *verdict;
    }
    throw Error(ErrorKind::Scoring,
                "judge reply lacks a parseable [RESULT] score; raw reply: " + last_reply);
}

double perplexity_from_logprobs(const std::vector<double>& logprobs) {
    if (logprobs.empty())
        throw Error(ErrorKind::Precondition, "perplexity of an empty continuation is undefined");
    double sum = 0.0;
    for (double lp : logprobs) {
        if (lp > 0.0)
            throw Error(ErrorKind::Scoring, "invalid logprob " + std::to_string(lp) + " (> 0)");
        sum += lp;
    }
    return std::exp(-sum / static_cast<double>(logprobs.size()));
}

// Chat framing for conditioning: mirrors a generic instruction template.
static constexpr const char* kPerplexityFramePrefix = "<|user|>\n";
static constexpr const char* kPerplexityFrameSuffix = "\n<|assistant|>\n";

double response_perplexity(const Instance& instance, Gateway& gateway,
                           const GeneratorProfile& scorer) {
    if (!instance.response.has_value() || instance.response->empty())
        throw Error(ErrorKind::Precondition,
                    "instance '" + instance.id + "' has no response to score");
    std::string context = kPerplexityFramePrefix + instance.instruction + kPerplexityFrameSuffix;
    LogprobResult result = gateway.score_continuation(scorer, context, *instance.response);
    std::vector<double> logprobs;
    logprobs.reserve(result.tokens.size());
    for (const TokenLogprob& t : result.tokens) logprobs.push_back(t.logprob);
    return perplexity_from_logprobs(logprobs);
}

DiversityResult diversity_from_vectors(const std::vector<std::vector<double>>& vectors,
                                       std::uint64_t pair_budget, std::uint64_t rng_seed) {
    const std::size_t n = vectors.size();
    if (n < 2) throw Error(ErrorKind::Precondition, "diversity requires at least two texts");
    if (pair_budget < 1) throw Error(ErrorKind::Precondition, "pair_budget must be >= 1");

    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (double x : vectors[i]) sq += x * x;
        norms[i] = std::sqrt(sq);
        if (norms[i] == 0.0)
            throw Error(ErrorKind::Scoring, "zero-norm embedding at index " + std::to_string(i));
    }

    auto cosine = [&](std::size_t i, std::size_t j) {
        double dot = 0.0;
        for (std::size_t d = 0; d < vectors[i].size(); ++d) dot += vectors[i][d] * vectors[j][d];
        return dot / (norms[i] * norms[j]);
    };

    const std::uint64_t total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    double sum = 0.0;
    std::uint64_t used = 0;
    if (pair_budget >= total_pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += cosine(i, j);
        used = total_pairs;
    } else {
        SplitMix64 rng(rng_seed);
        std::vector<std::uint64_t> picks = sample_subset_sorted(rng, total_pairs, pair_budget);
        // Walk pair ranks in ascending order; rank t sits in row i where
        // rows are (0,1..n-1), (1,2..n-1), ...
        std::uint64_t i = 0;
        std::uint64_t row_start = 0;
        std::uint64_t row_len = n - 1;
        for (std::uint64_t t : picks) {
            while (t >= row_start + row_len) {
                row_start += row_len;
                --row_len;
                ++i;
            }
            std::uint64_t j = i + 1 + (t - row_start);
            sum += cosine(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
        used = pair_budget;
    }
    DiversityResult result;
    result.mean_cosine_similarity = sum / static_cast<double>(used);
    result.mean_cosine_distance = 1.0 - result.mean_cosine_similarity;
    result.pairs_evaluated = used;
    return result;
}

DiversityResult diversity(const std::vector<std::string>& texts, Gateway& gateway,
                          const GeneratorProfile& embedder, std::uint64_t pair_budget,
                          std::uint64_t rng_seed) {
    if (texts.size() < 2)
        throw Error(ErrorKind::Precondition, "diversity requires at least two texts");
    auto vectors = gateway.embed(embedder, texts);
    return diversity_from_vectors(vectors, pair_budget, rng_seed);
}

double reward_score(const Instance& instance, Gateway& gateway, const GeneratorProfile& scorer) {
    return gateway.reward(scorer, instance.instruction, instance.response.value_or(""));
}

std::string instance_metrics_to_line(const InstanceMetrics& m) {
    ordered_json j;
    j["id"] = m.instance_id;
    auto put_int = [&](const char* key, const std::optional<int>& v) {
        j[key] = v.has_value() ? ordered_json(*v) : ordered_json(nullptr);
    };
    put_int("judge_instruction_difficulty_a", m.judge_instruction_difficulty_a);
    put_int("judge_instruction_difficulty_b", m.judge_instruction_difficulty_b);
    put_int("judge_response_quality_a", m.judge_response_quality_a);
    put_int("judge_response_quality_b", m.judge_response_quality_b);
    j["reward"] = m.reward.has_value() ? ordered_json(*m.reward) : ordered_json(nullptr);
    j["perplexity"] = m.perplexity.has_value() ? ordered_json(*m.perplexity) : ordered_json(nullptr);
    return j.dump();
}

InstanceMetrics instance_metrics_from_line(const std::string& line) {
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorKind::Io, "malformed instance metrics record");
    InstanceMetrics m;
    m.instance_id = j.value("id", "");
    auto get_int = [&](const char* key) -> std::optional<int> {
        if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<int>();
        return std::nullopt;
    };
    m.judge_instruction_difficulty_a = get_int("judge_instruction_difficulty_a");
    m.judge_instruction_difficulty_b = get_int("judge_instruction_difficulty_b");
    m.judge_response_quality_a = get_int("judge_response_quality_a");
    m.judge_response_quality_b = get_int("judge_response_quality_b");
    if (auto it = j.find("reward"); it != j.end() && !it->is_null()) m.reward = it->get<double>();
    if (auto it = j.find("perplexity"); it != j.end() && !it->is_null())
        m.perplexity = it->get<double>();
    return m;
}

void write_instance_metrics_file(const std::vector<InstanceMetrics>& rows,
                                 const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    for (const InstanceMetrics& m : rows) out << instance_metrics_to_line(m) << '\n';
}

MetricVector summarize(const std::string& generator_id, const SettingKey& setting,
                       const std::vector<InstanceMetrics>& per_instance,
                       std::optional<DiversityResult> instruction_diversity,
                       std::optional<DiversityResult> response_diversity,
                       std::optional<double> problem_solving_avg, bool diversity_as_distance) {
    MetricVector mv;
    mv.generator_id = generator_id;
    mv.setting = setting;

    auto mean_int = [&](auto member) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const InstanceMetrics& m : per_instance) {
            if ((m.*member).has_value()) {
                sum += static_cast<double>(*(m.*member));
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    auto mean_real = [&](auto member) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const InstanceMetrics& m : per_instance) {
            if ((m.*member).has_value()) {
                sum += *(m.*member);
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };

    mv.judge_instruction_difficulty_a = mean_int(&InstanceMetrics::judge_instruction_difficulty_a);
    mv.judge_instruction_difficulty_b = mean_int(&InstanceMetrics::judge_instruction_difficulty_b);
    mv.judge_response_quality_a = mean_int(&InstanceMetrics::judge_response_quality_a);
    mv.judge_response_quality_b = mean_int(&InstanceMetrics::judge_response_quality_b);
    mv.reward_score = mean_real(&InstanceMetrics::reward);
    mv.response_perplexity = mean_real(&InstanceMetrics::perplexity);
    if (instruction_diversity)
        mv.instruction_diversity = diversity_as_distance
                                       ? instruction_diversity->mean_cosine_distance
                                       : instruction_diversity->mean_cosine_similarity;
    if (response_diversity)
        mv.response_diversity = diversity_as_distance ? response_diversity->mean_cosine_distance
                                                      : response_diversity->mean_cosine_similarity;
    mv.problem_solving_avg = problem_solving_avg;

    bool any = false;
    for (std::size_t i = 0; i < MetricVector::feature_names().size(); ++i)
        any = any || mv.feature(i).has_value();
    if (!any) throw Error(ErrorKind::Analysis, "all intrinsic metrics are missing");
    return mv;
}

IntrinsicEvalResult evaluate_corpus(const Dataset& corpus, const std::string& generator_id,
                                    const SettingKey& setting, Gateway& gateway,
                                    const IntrinsicEvalConfig& config) {
    if (corpus.instances.empty())
        throw Error(ErrorKind::Precondition, "cannot evaluate an empty corpus");

    // Seeded subsample for the per-instance metrics.
    std::vector<std::size_t> sample;
    if (config.judge_sample_size == 0 || config.judge_sample_size >= corpus.size()) {
        sample.resize(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) sample[i] = i;
    } else {
        SplitMix64 rng(config.rng_seed);
        sample = sample_indices(rng, corpus.size(), config.judge_sample_size);
    }

    std::vector<InstanceMetrics> per_instance(sample.size());
    const std::size_t max_round = std::max(1, gateway.config().max_in_flight);
    std::optional<RubricPrompt> difficulty_rubric, quality_rubric;
    if (config.judge_a || config.judge_b) {
        difficulty_rubric = RubricPrompt::standard(RubricMode::InstructionDifficulty, corpus.domain);
        quality_rubric = RubricPrompt::standard(RubricMode::ResponseQuality, corpus.domain);
    }

    for (std::size_t base = 0; base < sample.size(); base += max_round) {
        const std::size_t round = std::min(max_round, sample.size() - base);
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> failures(round);
        workers.reserve(round);
        for (std::size_t r = 0; r < round; ++r) {
            workers.emplace_back([&, r] {
                try {
                    const Instance& inst = corpus.instances[sample[base + r]];
                    InstanceMetrics& m = per_instance[base + r];
                    m.instance_id = inst.id;
                    if (config.judge_a) {
                        m.judge_instruction_difficulty_a =
                            judge_score(inst, *difficulty_rubric, gateway, *config.judge_a).score;
                        m.judge_response_quality_a =
                            judge_score(inst, *quality_rubric, gateway, *config.judge_a).score;
                    }
                    if (config.judge_b) {
                        m.judge_instruction_difficulty_b =
                            judge_score(inst, *difficulty_rubric, gateway, *config.judge_b).score;
                        m.judge_response_quality_b =
                            judge_score(inst, *quality_rubric, gateway, *config.judge_b).score;
                    }
                    if (config.reward_profile)
                        m.reward = reward_score(inst, gateway, *config.reward_profile);
                    if (config.perplexity_profile)
                        m.perplexity = response_perplexity(inst, gateway, *config.perplexity_profile);
                } catch (...) {
                    failures[r] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& eptr : failures)
            if (eptr) std::rethrow_exception(eptr);
    }

    std::optional<DiversityResult> instruction_div, response_div;
    if (config.embedding_profile && corpus.size() >= 2) {
        std::vector<std::string> instructions, responses;
        instructions.reserve(corpus.size());
        responses.reserve(corpus.size());
        for (const Instance& inst : corpus.instances) {
            instructions.push_back(inst.instruction);
            responses.push_back(inst.response.value_or(""));
        }
        instruction_div = diversity(instructions, gateway, *config.embedding_profile,
                                    config.pair_budget, config.rng_seed);
        response_div = diversity(responses, gateway, *config.embedding_profile,
                                 config.pair_budget, config.rng_seed + 1);
    }

    IntrinsicEvalResult result;
    result.per_instance = std::move(per_instance);
    result.sampled_instances = sample.size();
    result.summary = summarize(generator_id, setting, result.per_instance, instruction_div,
                               response_div, config.problem_solving_avg,
                               config.diversity_as_distance);
    return result;
}

}  // namespace agora
