#pragma once

#include <chrono>

#include "agora/gateway.hpp"

namespace agora {

// OpenAI-compatible HTTP transport:
//   chat               POST {base}/chat/completions
//   logprob scoring    POST {base}/completions  (echo mode, max_tokens=0)
//   embeddings         POST {base}/embeddings
//   scalar scoring     POST {base}/score        ({model, instruction, response} -> {score})
// The /score shape targets user-hosted reward services; there is no standard
// public wire format for scalar reward models.
//
// Credentials come from the environment variable named by
// GeneratorProfile::credential_env_var() and are sent as a Bearer token.
struct HttpProviderConfig {
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
    bool require_credentials = true;  // turn off for local unauthenticated services
};

class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config = {}) : config_(config) {}

    ChatResult chat(const GeneratorProfile& profile, const ChatRequest& request) override;
    LogprobResult score_continuation(const GeneratorProfile& profile, const std::string& context,
                                     const std::string& continuation) override;
    std::vector<std::vector<double>> embed(const GeneratorProfile& profile,
                                           const std::vector<std::string>& texts) override;
    double reward(const GeneratorProfile& profile, const std::string& instruction,
                  const std::string& response) override;

private:
    std::string post_json(const GeneratorProfile& profile, const std::string& path,
                          const std::string& body);

    HttpProviderConfig config_;
};

}  // namespace agora
