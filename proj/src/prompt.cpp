#include "agora/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace agora {
namespace {

const std::vector<std::string>& known_placeholders() {
    static const std::vector<std::string> names = {
        kPlaceholderDemonstrations, kPlaceholderInstruction, kPlaceholderResponse};
    return names;
}

std::string placeholder_token(const std::string& name) { return "{" + name + "}"; }

bool body_contains(const std::string& body, const std::string& placeholder) {
    return body.find(placeholder_token(placeholder)) != std::string::npos;
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(OutputFormat f) {
    return f == OutputFormat::FreeformTagged ? "freeform_tagged" : "json";
}

OutputFormat output_format_from_string(const std::string& s) {
    if (s == "freeform_tagged") return OutputFormat::FreeformTagged;
    if (s == "json") return OutputFormat::Json;
    throw Error(ErrorKind::Config, "unknown output format '" + s + "'");
}

void OutputContract::check() const {
    for (const std::string* m :
         {&instruction_begin, &instruction_end, &response_begin, &response_end}) {
        if (m->empty()) throw Error(ErrorKind::Config, "output contract: empty marker");
    }
    if (instruction_begin == response_begin || instruction_end == response_end)
        throw Error(ErrorKind::Config,
                    "output contract: instruction and response markers must differ");
}

void MetaPromptTemplate::check() const {
    std::set<std::string> declared(placeholders.begin(), placeholders.end());
    if (declared.size() != placeholders.size())
        throw Error(ErrorKind::Config, "template '" + name + "': duplicate placeholder");
    for (const std::string& p : declared) {
        if (std::find(known_placeholders().begin(), known_placeholders().end(), p) ==
            known_placeholders().end())
            throw Error(ErrorKind::Config, "template '" + name + "': unknown placeholder " + p);
        if (!body_contains(body, p))
            throw Error(ErrorKind::Config,
                        "template '" + name + "': declared placeholder " + p + " not in body");
    }
    for (const std::string& p : known_placeholders()) {
        if (body_contains(body, p) && !declared.count(p))
            throw Error(ErrorKind::Config,
                        "template '" + name + "': body uses undeclared placeholder " + p);
    }
    auto require = [&](const char* p) {
        if (!declared.count(p))
            throw Error(ErrorKind::Config, "template '" + name + "': method " +
                                               to_string(method) + " requires placeholder " + p);
    };
    switch (method) {
        case Method::InstanceGeneration: require(kPlaceholderDemonstrations); break;
        case Method::ResponseGeneration: require(kPlaceholderInstruction); break;
        case Method::QualityEnhancement:
            require(kPlaceholderInstruction);
            require(kPlaceholderResponse);
            break;
    }
}

std::string render(const MetaPromptTemplate& tmpl,
                   const std::map<std::string, std::string>& slots) {
    std::set<std::string> declared(tmpl.placeholders.begin(), tmpl.placeholders.end());
    for (const auto& [name, value] : slots) {
        if (!declared.count(name))
            throw Error(ErrorKind::Precondition, "extra slot: " + name);
    }
    std::string out = tmpl.body;
    for (const std::string& p : tmpl.placeholders) {
        auto it = slots.find(p);
        if (it == slots.end())
            throw Error(ErrorKind::Precondition, "unfilled placeholder: " + p);
        const std::string token = placeholder_token(p);
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), it->second);
            pos += it->second.size();
        }
    }
    for (const std::string& p : known_placeholders()) {
        if (body_contains(out, p) && !slots.count(p))
            throw Error(ErrorKind::Precondition, "unfilled placeholder: " + p);
    }
    return out;
}

std::string format_demonstrations(const std::vector<Instance>& demos,
                                  const OutputContract& contract) {
    if (demos.empty())
        throw Error(ErrorKind::Precondition, "format_demonstrations: empty demonstration list");
    for (const Instance& d : demos) {
        if (!d.response.has_value())
            throw Error(ErrorKind::Precondition,
                        "format_demonstrations: demo '" + d.id + "' has no response");
    }
    if (contract.format == OutputFormat::Json) {
        auto to_json = [](const Instance& d) {
            nlohmann::ordered_json j;
            j["instruction"] = d.instruction;
            j["response"] = *d.response;
            return j;
        };
        if (demos.size() == 1) return to_json(demos.front()).dump(2);
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const Instance& d : demos) arr.push_back(to_json(d));
        return arr.dump(2);
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < demos.size(); ++i) {
        if (i > 0) out << "\n\n";
        out << contract.instruction_begin << '\n'
            << demos[i].instruction << '\n'
            << contract.instruction_end << '\n'
            << contract.response_begin << '\n'
            << *demos[i].response << '\n'
            << contract.response_end;
    }
    return out.str();
}

MetaPromptTemplate parse_template_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    MetaPromptTemplate tmpl;
    bool saw_separator = false;
    bool saw_method = false, saw_format = false;
    while (std::getline(in, line)) {
        std::string t = trimmed(line);
        if (t == "---") {
            saw_separator = true;
            break;
        }
        if (t.empty() || t[0] == '#') continue;
        std::size_t colon = t.find(':');
        if (colon == std::string::npos)
            throw Error(ErrorKind::Config,
                        "template " + origin + ": malformed header line '" + line + "'");
        std::string key = trimmed(t.substr(0, colon));
        std::string value = trimmed(t.substr(colon + 1));
        if (key == "name") {
            tmpl.name = value;
        } else if (key == "method") {
            tmpl.method = method_from_string(value);
            saw_method = true;
        } else if (key == "format") {
            tmpl.output_format = output_format_from_string(value);
            saw_format = true;
        } else if (key == "placeholders") {
            std::istringstream ps(value);
            std::string p;
            while (std::getline(ps, p, ',')) {
                p = trimmed(p);
                if (!p.empty()) tmpl.placeholders.push_back(p);
            }
        } else {
            throw Error(ErrorKind::Config, "template " + origin + ": unknown header key '" + key + "'");
        }
    }
    if (!saw_separator)
        throw Error(ErrorKind::Config, "template " + origin + ": missing '---' separator");
    if (tmpl.name.empty() || !saw_method || !saw_format)
        throw Error(ErrorKind::Config,
                    "template " + origin + ": header must declare name, method and format");
    std::ostringstream body;
    bool first = true;
    while (std::getline(in, line)) {
        if (!first) body << '\n';
        body << line;
        first = false;
    }
    tmpl.body = trimmed(body.str());
    tmpl.check();
    return tmpl;
}

MetaPromptTemplate load_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open template '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_template_text(buf.str(), "'" + path.string() + "'");
}

std::filesystem::path template_pack_path(const std::filesystem::path& pack_dir,
                                         const SettingKey& setting, const std::string& variant,
                                         OutputFormat format) {
    std::string file = to_string(setting.domain) + "." + to_string(setting.method) + "." +
                       variant + "." + to_string(format) + ".prompt";
    return pack_dir / file;
}

}  // namespace agora
