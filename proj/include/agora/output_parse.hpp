#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agora/prompt.hpp"

namespace agora {

struct ParsedPair {
    std::string instruction;
    std::string response;
    // Present only for JSON quality-enhancement replies that tag which fields
    // they modified; absent flags are inferred by comparison downstream.
    std::optional<bool> instruction_modified;
    std::optional<bool> response_modified;
};

struct ParseError {
    std::string reason;
};

// Outcome of parsing generator output: either at least one pair or a typed
// error, never an exception.
struct ParseOutcome {
    std::vector<ParsedPair> pairs;
    std::optional<ParseError> error;

    bool ok() const noexcept { return !error.has_value(); }
};

// Extracts (instruction, response) pairs from raw model output.
//  - freeform_tagged: marker-delimited blocks in document order, pairing each
//    instruction block with the next response block.
//  - json: a single object or an array of objects with required keys
//    {"instruction","response"}; surrounding prose and code fences are
//    stripped first.
// Returned texts are whitespace-trimmed.
ParseOutcome parse_generated(const std::string& output_text, const OutputContract& contract);

}  // namespace agora
