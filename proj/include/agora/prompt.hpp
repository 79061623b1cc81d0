#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "agora/dataset.hpp"

namespace agora {

enum class OutputFormat { FreeformTagged, Json };

std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

// How generated text encodes (instruction, response) pairs. The freeform
// markers below are this project's canonical contract; templates instruct
// generators to use exactly these strings.
struct OutputContract {
    OutputFormat format = OutputFormat::FreeformTagged;
    std::string instruction_begin = "<INSTRUCTION>";
    std::string instruction_end = "</INSTRUCTION>";
    std::string response_begin = "<RESPONSE>";
    std::string response_end = "</RESPONSE>";

    static OutputContract freeform() { return OutputContract{}; }
    static OutputContract json() { return OutputContract{OutputFormat::Json}; }

    void check() const;  // markers non-empty and instruction/response markers distinct
};

constexpr const char* kPlaceholderDemonstrations = "DEMONSTRATIONS";
constexpr const char* kPlaceholderInstruction = "INSTRUCTION";
constexpr const char* kPlaceholderResponse = "RESPONSE";

// A meta-prompt: body text with declared {PLACEHOLDER} slots and an output
// format the generator is instructed to follow.
struct MetaPromptTemplate {
    std::string name;
    Method method = Method::InstanceGeneration;
    std::string body;
    std::vector<std::string> placeholders;  // declared set
    OutputFormat output_format = OutputFormat::FreeformTagged;

    // Declared placeholders must match the ones occurring in the body, and
    // the method dictates a required set (instance generation needs
    // DEMONSTRATIONS, response generation needs INSTRUCTION, quality
    // enhancement needs INSTRUCTION and RESPONSE).
    void check() const;
    OutputContract contract() const {
        return output_format == OutputFormat::Json ? OutputContract::json()
                                                   : OutputContract::freeform();
    }
};

// Replaces every declared placeholder; slots must cover exactly the declared
// set and no placeholder token may remain in the output.
std::string render(const MetaPromptTemplate& tmpl,
                   const std::map<std::string, std::string>& slots);

// Renders demonstrations in the contract's own output syntax so the
// generator sees worked examples of the expected format.
std::string format_demonstrations(const std::vector<Instance>& demos,
                                  const OutputContract& contract);

// Template pack files: a small header block (name/method/format/placeholders),
// a '---' separator line, then the body.
MetaPromptTemplate parse_template_text(const std::string& text, const std::string& origin = "");
MetaPromptTemplate load_template_file(const std::filesystem::path& path);

// Conventional pack layout: <dir>/<domain>.<method>.<variant>.<format>.prompt
std::filesystem::path template_pack_path(const std::filesystem::path& pack_dir,
                                         const SettingKey& setting, const std::string& variant,
                                         OutputFormat format);

}  // namespace agora
