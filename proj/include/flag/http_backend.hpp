#pragma once

#include <chrono>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "flag/backend.hpp"

namespace flag {

struct HttpBackendOptions {
    /// Base URL such as "https://api.openai.com/v1"; "/completions" or
    /// "/chat/completions" is appended per request.
    std::string endpoint;
    std::string model;
    std::string api_key;
    bool supports_suffix = true;
    bool supports_logprobs = true;
    bool supports_system_prompt = true;
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{8000};
    /// Upper bound on time spent backing off for a single request.
    std::chrono::milliseconds max_wait{60000};
    std::chrono::seconds timeout{60};
};

/// Body for POST {endpoint}/completions (auto-complete, insertion).
nlohmann::json completions_request(const Prompt& prompt, const GenerationParams& params,
                                   const BackendDescriptor& backend);

/// Body for POST {endpoint}/chat/completions (instructed-complete).
nlohmann::json chat_request(const Prompt& prompt, const GenerationParams& params, const BackendDescriptor& backend);

/// Extracts text, tokens and logprobs from either response shape. Throws
/// BackendError(protocol) on an unexpected body.
Completion parse_completion_response(const nlohmann::json& body, bool chat);

/// OpenAI-compatible HTTP client. Rate limits (429) and 5xx answers are retried
/// with jittered exponential backoff; 401/403 fail immediately.
class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(HttpBackendOptions options);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    Completion complete(const Prompt& prompt, const GenerationParams& params) override;

private:
    HttpBackendOptions options_;
    BackendDescriptor descriptor_;
    std::string scheme_host_port_;
    std::string base_path_;
};

}  // namespace flag
