#include "agora/output_parse.hpp"

#include <nlohmann/json.hpp>

namespace agora {
namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

ParseOutcome fail(std::string reason) {
    ParseOutcome out;
    out.error = ParseError{std::move(reason)};
    return out;
}

struct Block {
    bool is_instruction;
    std::size_t position;
    std::string text;
};

ParseOutcome parse_freeform(const std::string& text, const OutputContract& c) {
    std::vector<Block> blocks;
    std::size_t cursor = 0;
    for (;;) {
        std::size_t inst = text.find(c.instruction_begin, cursor);
        std::size_t resp = text.find(c.response_begin, cursor);
        if (inst == std::string::npos && resp == std::string::npos) break;
        bool is_instruction = inst != std::string::npos && (resp == std::string::npos || inst < resp);
        std::size_t begin = is_instruction ? inst : resp;
        const std::string& begin_marker = is_instruction ? c.instruction_begin : c.response_begin;
        const std::string& end_marker = is_instruction ? c.instruction_end : c.response_end;
        std::size_t content = begin + begin_marker.size();
        std::size_t end = text.find(end_marker, content);
        if (end == std::string::npos)
            return fail(std::string("unterminated ") +
                        (is_instruction ? "instruction" : "response") + " block");
        blocks.push_back({is_instruction, begin, trimmed(text.substr(content, end - content))});
        cursor = end + end_marker.size();
    }
    std::vector<Block> instructions, responses;
    for (Block& b : blocks) (b.is_instruction ? instructions : responses).push_back(std::move(b));
    if (instructions.empty() && responses.empty()) return fail("no pairs found");
    if (instructions.size() > responses.size()) return fail("unpaired instruction");
    if (responses.size() > instructions.size()) return fail("response without instruction");
    ParseOutcome out;
    for (std::size_t k = 0; k < instructions.size(); ++k) {
        if (responses[k].position < instructions[k].position)
            return fail("response precedes its instruction");
        out.pairs.push_back({instructions[k].text, responses[k].text, std::nullopt, std::nullopt});
    }
    return out;
}

// Cuts prose and code fences away, leaving the JSON payload candidate.
std::string isolate_json(const std::string& text) {
    std::string body = text;
    std::size_t fence = body.find("```");
    if (fence != std::string::npos) {
        std::size_t content = body.find('\n', fence);
        if (content != std::string::npos) {
            std::size_t close = body.find("```", content);
            body = close != std::string::npos ? body.substr(content + 1, close - content - 1)
                                              : body.substr(content + 1);
        } else {
            body = body.substr(fence + 3);
        }
    }
    std::size_t first_obj = body.find('{');
    std::size_t first_arr = body.find('[');
    std::size_t first = std::min(first_obj == std::string::npos ? body.size() : first_obj,
                                 first_arr == std::string::npos ? body.size() : first_arr);
    if (first == body.size()) return "";
    char open = body[first];
    char close = open == '{' ? '}' : ']';
    std::size_t last = body.rfind(close);
    if (last == std::string::npos || last < first) return "";
    return body.substr(first, last - first + 1);
}

ParseOutcome parse_json_format(const std::string& text) {
    std::string payload = isolate_json(text);
    if (payload.empty()) return fail("no JSON payload found");
    nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
    if (j.is_discarded()) return fail("invalid JSON payload");
    std::vector<nlohmann::json> records;
    if (j.is_object()) {
        records.push_back(std::move(j));
    } else if (j.is_array()) {
        for (auto& el : j) {
            if (!el.is_object()) return fail("JSON array element is not an object");
            records.push_back(std::move(el));
        }
        if (records.empty()) return fail("empty JSON array");
    } else {
        return fail("JSON payload is neither object nor array");
    }
    ParseOutcome out;
    for (const nlohmann::json& rec : records) {
        ParsedPair pair;
        for (const char* key : {"instruction", "response"}) {
            auto it = rec.find(key);
            if (it == rec.end() || !it->is_string())
                return fail(std::string("missing required key: ") + key);
        }
        pair.instruction = trimmed(rec["instruction"].get<std::string>());
        pair.response = trimmed(rec["response"].get<std::string>());
        if (auto it = rec.find("instruction_modified"); it != rec.end() && it->is_boolean())
            pair.instruction_modified = it->get<bool>();
        if (auto it = rec.find("response_modified"); it != rec.end() && it->is_boolean())
            pair.response_modified = it->get<bool>();
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

}  // namespace

ParseOutcome parse_generated(const std::string& output_text, const OutputContract& contract) {
    if (contract.format == OutputFormat::Json) return parse_json_format(output_text);
    return parse_freeform(output_text, contract);
}

}  // namespace agora
