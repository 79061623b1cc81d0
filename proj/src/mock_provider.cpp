#include "agora/mock_provider.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace agora {

std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ULL ^ seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string hex8(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(8, '0');
    for (int i = 7; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string last_user_message(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
        if (it->role == "user") return it->content;
    return request.messages.empty() ? "" : request.messages.back().content;
}

// Pull the last marker-delimited pair (or bare instruction) out of a rendered
// prompt so response-generation / quality-enhancement replies can reference
// their input. Falls back to a JSON "instruction"/"response" object.
struct PromptInput {
    std::string instruction;
    std::optional<std::string> response;
};

std::optional<PromptInput> extract_input(const std::string& prompt) {
    const OutputContract c = OutputContract::freeform();
    // The canonical templates place the rendered input before any format
    // clause that mentions the markers, so the first block is the input.
    auto find_first_block = [&](const std::string& begin, const std::string& end)
        -> std::optional<std::string> {
        std::size_t pos = prompt.find(begin);
        if (pos == std::string::npos) return std::nullopt;
        std::size_t content = pos + begin.size();
        std::size_t close = prompt.find(end, content);
        if (close == std::string::npos) return std::nullopt;
        std::string text = prompt.substr(content, close - content);
        std::size_t b = text.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return std::string();
        std::size_t e = text.find_last_not_of(" \t\r\n");
        return text.substr(b, e - b + 1);
    };
    if (auto inst = find_first_block(c.instruction_begin, c.instruction_end)) {
        PromptInput input;
        input.instruction = *inst;
        input.response = find_first_block(c.response_begin, c.response_end);
        return input;
    }
    // JSON-format prompts embed the input as an object.
    std::size_t key = prompt.rfind("\"instruction\"");
    if (key != std::string::npos) {
        std::size_t open = prompt.rfind('{', key);
        std::size_t close = prompt.find('}', key);
        if (open != std::string::npos && close != std::string::npos) {
            auto j = nlohmann::json::parse(prompt.substr(open, close - open + 1), nullptr, false);
            if (!j.is_discarded() && j.is_object() && j.contains("instruction")) {
                PromptInput input;
                input.instruction = j["instruction"].is_string() ? j["instruction"].get<std::string>() : "";
                if (j.contains("response") && j["response"].is_string())
                    input.response = j["response"].get<std::string>();
                return input;
            }
        }
    }
    return std::nullopt;
}

std::string format_pairs(const std::vector<ParsedPair>& pairs, OutputFormat format,
                         bool with_flags) {
    if (format == OutputFormat::Json) {
        auto to_json = [&](const ParsedPair& p) {
            nlohmann::ordered_json j;
            j["instruction"] = p.instruction;
            j["response"] = p.response;
            if (with_flags) {
                j["instruction_modified"] = p.instruction_modified.value_or(false);
                j["response_modified"] = p.response_modified.value_or(false);
            }
            return j;
        };
        if (pairs.size() == 1) return to_json(pairs.front()).dump(2);
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& p : pairs) arr.push_back(to_json(p));
        return arr.dump(2);
    }
    const OutputContract c = OutputContract::freeform();
    std::ostringstream out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0) out << "\n\n";
        out << c.instruction_begin << '\n'
            << pairs[i].instruction << '\n'
            << c.instruction_end << '\n'
            << c.response_begin << '\n'
            << pairs[i].response << '\n'
            << c.response_end;
    }
    return out.str();
}

ParsedPair synth_pair(std::uint64_t h) {
    std::uint64_t a = 2 + h % 89;
    std::uint64_t b = 3 + (h >> 8) % 97;
    std::uint64_t c = 1 + (h >> 16) % 23;
    ParsedPair pair;
    pair.instruction = "Task " + hex8(h) + ": compute (" + std::to_string(a) + " + " +
                       std::to_string(b) + ") * " + std::to_string(c) +
                       " and explain each step briefly.";
    pair.response = "First add " + std::to_string(a) + " and " + std::to_string(b) + " to get " +
                    std::to_string(a + b) + "; multiplying by " + std::to_string(c) +
                    " gives " + std::to_string((a + b) * c) + ". [" + hex8(h ^ 0x5bd1e995) + "]";
    return pair;
}

}  // namespace

std::string MockProvider::reply_for(const std::string& prompt) {
    const std::uint64_t h = fnv1a64(prompt, behavior_.seed);
    switch (behavior_.chat_mode) {
        case MockBehavior::ChatMode::Echo: return prompt;
        case MockBehavior::ChatMode::Garbage: return "@@ mock noise " + hex8(h) + " @@";
        case MockBehavior::ChatMode::FixedText: return behavior_.fixed_text;
        case MockBehavior::ChatMode::Auto: break;
    }
    // Domain-classification prompts end in a decision slot and expect "1"/"2".
    if (prompt.find("# Decision:") != std::string::npos) return h % 2 == 0 ? "1" : "2";
    // Judge prompts quote the [RESULT] output format.
    if (prompt.find("[RESULT]") != std::string::npos) {
        int score = 1 + static_cast<int>(h % 5);
        return "Feedback: deterministic mock assessment (band " + std::to_string(score) +
               " of 5). [RESULT] " + std::to_string(score);
    }
    switch (behavior_.method) {
        case Method::InstanceGeneration: {
            std::vector<ParsedPair> pairs;
            for (int i = 0; i < std::max(1, behavior_.pairs_per_call); ++i)
                pairs.push_back(synth_pair(fnv1a64(hex8(h) + std::to_string(i), h)));
            return format_pairs(pairs, behavior_.format, false);
        }
        case Method::ResponseGeneration: {
            auto input = extract_input(prompt);
            ParsedPair pair;
            pair.instruction = input ? input->instruction : "unparsed prompt " + hex8(h);
            std::uint64_t rh = fnv1a64(pair.instruction, behavior_.seed ^ 0x9e3779b9);
            pair.response = "Worked answer " + hex8(rh) + ": applying the stated requirements " +
                            "step by step yields result " + std::to_string(rh % 1000) + ".";
            return format_pairs({pair}, behavior_.format, false);
        }
        case Method::QualityEnhancement: {
            auto input = extract_input(prompt);
            ParsedPair pair;
            pair.instruction = input ? input->instruction : "unparsed prompt " + hex8(h);
            std::string response = input && input->response ? *input->response : "";
            switch (behavior_.refine_mode) {
                case MockBehavior::RefineMode::Annotate:
                    pair.response = response + " Additional verification: cross-checked, ref " +
                                    hex8(fnv1a64(response, h)) + ".";
                    pair.instruction_modified = false;
                    pair.response_modified = true;
                    break;
                case MockBehavior::RefineMode::UppercaseResponse: {
                    pair.response = response;
                    std::transform(pair.response.begin(), pair.response.end(),
                                   pair.response.begin(),
                                   [](unsigned char c) { return std::toupper(c); });
                    pair.instruction_modified = false;
                    pair.response_modified = pair.response != response;
                    break;
                }
                case MockBehavior::RefineMode::Identity:
                    pair.response = response;
                    pair.instruction_modified = false;
                    pair.response_modified = false;
                    break;
            }
            return format_pairs({pair}, behavior_.format, true);
        }
    }
    return "@@ mock noise " + hex8(h) + " @@";
}

ChatResult MockProvider::chat(const GeneratorProfile&, const ChatRequest& request) {
    int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    ++calls_;
    struct Depart {
        std::atomic<int>& c;
        ~Depart() { --c; }
    } depart{in_flight_};

    if (behavior_.fail_attempts > 0) {
        int expected = remaining_failures_.load();
        if (expected < 0) remaining_failures_.compare_exchange_strong(expected, behavior_.fail_attempts);
        int current = remaining_failures_.load();
        while (current > 0 && !remaining_failures_.compare_exchange_weak(current, current - 1)) {
        }
        if (current > 0)
            throw TransientError("mock transient failure (status " +
                                     std::to_string(behavior_.fail_status) + ")",
                                 behavior_.fail_status);
    }

    std::string prompt;
    for (const auto& m : request.messages) {
        prompt += m.role;
        prompt += ":\n";
        prompt += m.content;
        prompt += '\n';
    }
    ChatResult result;
    result.text = reply_for(last_user_message(request));
    result.prompt_tokens = whitespace_token_count(prompt);
    result.completion_tokens = whitespace_token_count(result.text);
    result.finish_reason = FinishReason::Stop;
    return result;
}

LogprobResult MockProvider::score_continuation(const GeneratorProfile&, const std::string& context,
                                               const std::string& continuation) {
    LogprobResult result;
    result.offset = static_cast<std::size_t>(whitespace_token_count(context));
    std::istringstream words(continuation);
    std::string word;
    while (words >> word) {
        double lp;
        if (behavior_.per_token_logprob.has_value()) {
            lp = *behavior_.per_token_logprob;
        } else {
            std::uint64_t h = fnv1a64(word, behavior_.seed ^ 0xabcdef);
            lp = -(0.05 + static_cast<double>(h % 3000) / 1000.0);
        }
        result.tokens.push_back({word, lp});
    }
    return result;
}

std::vector<std::vector<double>> MockProvider::embed(const GeneratorProfile&,
                                                     const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    const std::size_t dim = std::max<std::size_t>(behavior_.embed_dim, 2);
    for (const std::string& t : texts) {
        std::vector<double> v(dim, 0.0);
        std::uint64_t h1 = fnv1a64(t, behavior_.seed);
        std::uint64_t h2 = fnv1a64(t, behavior_.seed ^ 0x517cc1b727220a95ULL);
        v[h1 % dim] += 1.0;
        v[h2 % dim] += 0.5;
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

double MockProvider::reward(const GeneratorProfile&, const std::string& instruction,
                            const std::string& response) {
    if (behavior_.reward_is_response_length) return static_cast<double>(response.size());
    std::uint64_t h = fnv1a64(instruction + "\x1f" + response, behavior_.seed ^ 0x2545f491);
    return static_cast<double>(h % 4000) / 100.0 - 20.0;
}

}  // namespace agora
