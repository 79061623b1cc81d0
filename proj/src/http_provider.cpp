#include "agora/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace agora {

using json = nlohmann::json;

namespace {

struct ParsedUrl {
    bool https = false;
    std::string host_port;  // "host" or "host:port"
    std::string path_prefix;
};

ParsedUrl split_endpoint(const std::string& endpoint) {
    ParsedUrl url;
    std::string rest = endpoint;
    if (rest.rfind("https://", 0) == 0) {
        url.https = true;
        rest = rest.substr(8);
    } else if (rest.rfind("http://", 0) == 0) {
        rest = rest.substr(7);
    } else {
        throw Error(ErrorKind::Config, "endpoint '" + endpoint + "' must start with http(s)://");
    }
    std::size_t slash = rest.find('/');
    url.host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
    url.path_prefix = slash == std::string::npos ? "" : rest.substr(slash);
    while (!url.path_prefix.empty() && url.path_prefix.back() == '/') url.path_prefix.pop_back();
    if (url.host_port.empty())
        throw Error(ErrorKind::Config, "endpoint '" + endpoint + "' has no host");
    return url;
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

json parse_body(const std::string& body, const std::string& what) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorKind::Gateway, what + ": response body is not JSON");
    return j;
}

}  // namespace

std::string HttpProvider::post_json(const GeneratorProfile& profile, const std::string& path,
                                    const std::string& body) {
    if (profile.endpoint.empty())
        throw Error(ErrorKind::Config, "profile '" + profile.name + "' has no endpoint");
    ParsedUrl url = split_endpoint(profile.endpoint);

    httplib::Headers headers;
    const char* key = std::getenv(profile.credential_env_var().c_str());
    if (key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    } else if (config_.require_credentials) {
        throw Error(ErrorKind::Config, "missing credential: set " + profile.credential_env_var());
    }

    auto issue = [&](auto& client) -> std::string {
        client.set_connection_timeout(config_.connect_timeout.count(), 0);
        client.set_read_timeout(config_.read_timeout.count(), 0);
        auto res = client.Post((url.path_prefix + path).c_str(), headers, body, "application/json");
        if (!res)
            throw TransientError("transport failure contacting " + profile.endpoint + ": " +
                                 httplib::to_string(res.error()));
        if (res->status >= 200 && res->status < 300) return res->body;
        if (retryable_status(res->status))
            throw TransientError("provider returned status " + std::to_string(res->status),
                                 res->status);
        throw Error(ErrorKind::Gateway, "provider returned status " + std::to_string(res->status) +
                                            ": " + res->body);
    };

    if (url.https) {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        httplib::SSLClient client(url.host_port);
        return issue(client);
#else
        throw Error(ErrorKind::Config, "built without TLS support; use an http:// endpoint");
#endif
    }
    httplib::Client client(url.host_port);
    return issue(client);
}

ChatResult HttpProvider::chat(const GeneratorProfile& profile, const ChatRequest& request) {
    json body;
    body["model"] = profile.model_id;
    body["messages"] = json::array();
    for (const ChatMessage& m : request.messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = request.sampling.temperature;
    body["top_p"] = request.sampling.top_p;
    body["max_tokens"] = request.sampling.max_new_tokens;

    json reply = parse_body(post_json(profile, "/chat/completions", body.dump()), "chat");
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
        throw Error(ErrorKind::Gateway, "chat: reply has no choices");
    const json& choice = reply["choices"][0];
    ChatResult result;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string())
        result.text = choice["message"]["content"].get<std::string>();
    std::string finish = choice.value("finish_reason", "stop");
    result.finish_reason = finish == "length" ? FinishReason::Length : FinishReason::Stop;
    if (reply.contains("usage")) {
        result.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
        result.completion_tokens = reply["usage"].value("completion_tokens", 0);
    }
    return result;
}

LogprobResult HttpProvider::score_continuation(const GeneratorProfile& profile,
                                               const std::string& context,
                                               const std::string& continuation) {
    json body;
    body["model"] = profile.model_id;
    body["prompt"] = context + continuation;
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = 0;

    json reply = parse_body(post_json(profile, "/completions", body.dump()), "score_continuation");
    if (!reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("logprobs"))
        throw Error(ErrorKind::Capability,
                    "endpoint does not return token logprobs (echo-scoring unsupported)");
    const json& lp = reply["choices"][0]["logprobs"];
    if (!lp.contains("tokens") || !lp.contains("token_logprobs") || !lp.contains("text_offset"))
        throw Error(ErrorKind::Capability, "logprobs reply lacks tokens/token_logprobs/text_offset");

    const json& tokens = lp["tokens"];
    const json& logprobs = lp["token_logprobs"];
    const json& offsets = lp["text_offset"];
    LogprobResult result;
    std::size_t start = tokens.size();
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (offsets[i].get<std::int64_t>() >= static_cast<std::int64_t>(context.size())) {
            start = i;
            break;
        }
    }
    result.offset = start;
    for (std::size_t i = start; i < tokens.size() && i < logprobs.size(); ++i) {
        double value = logprobs[i].is_null() ? 0.0 : logprobs[i].get<double>();
        result.tokens.push_back({tokens[i].get<std::string>(), value});
    }
    return result;
}

std::vector<std::vector<double>> HttpProvider::embed(const GeneratorProfile& profile,
                                                     const std::vector<std::string>& texts) {
    json body;
    body["model"] = profile.model_id;
    body["input"] = texts;

    json reply = parse_body(post_json(profile, "/embeddings", body.dump()), "embed");
    if (!reply.contains("data") || !reply["data"].is_array())
        throw Error(ErrorKind::Gateway, "embed: reply has no data array");
    std::vector<std::vector<double>> vectors(texts.size());
    for (const json& item : reply["data"]) {
        std::size_t index = item.value("index", vectors.size());
        if (index >= vectors.size() || !item.contains("embedding"))
            throw Error(ErrorKind::Gateway, "embed: malformed data item");
        vectors[index] = item["embedding"].get<std::vector<double>>();
    }
    return vectors;
}

double HttpProvider::reward(const GeneratorProfile& profile, const std::string& instruction,
                            const std::string& response) {
    json body;
    body["model"] = profile.model_id;
    body["instruction"] = instruction;
    body["response"] = response;
    json reply = parse_body(post_json(profile, "/score", body.dump()), "reward");
    if (!reply.contains("score") || !reply["score"].is_number())
        throw Error(ErrorKind::Capability, "scalar scorer reply has no numeric 'score'");
    return reply["score"].get<double>();
}

}  // namespace agora
