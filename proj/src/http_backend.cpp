#include "flag/http_backend.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include <httplib.h>

#include "flag/error.hpp"

namespace flag {

namespace {

std::vector<std::string> stop_list(const GenerationParams& params) {
    if (params.stop.empty()) {
        return {};
    }
    return {params.stop};
}

// Chat models like to wrap code in a markdown fence.
std::string strip_fence(std::string text) {
    if (text.rfind("```", 0) == 0) {
        const auto eol = text.find('\n');
        text = eol == std::string::npos ? std::string() : text.substr(eol + 1);
    }
    return text;
}

}  // namespace

nlohmann::json completions_request(const Prompt& prompt, const GenerationParams& params,
                                   const BackendDescriptor& backend) {
    nlohmann::json body{{"model", backend.model_name},
                        {"prompt", prompt.continuation_text()},
                        {"max_tokens", params.max_tokens},
                        {"temperature", params.temperature},
                        {"top_p", params.top_p},
                        {"n", 1},
                        {"stop", stop_list(params)}};
    if (prompt.suffix) {
        body["suffix"] = "\n" + *prompt.suffix;
    }
    if (backend.supports_logprobs) {
        body["logprobs"] = 1;
    }
    return body;
}

nlohmann::json chat_request(const Prompt& prompt, const GenerationParams& params, const BackendDescriptor& backend) {
    nlohmann::json messages = nlohmann::json::array();
    if (prompt.system_instruction) {
        messages.push_back({{"role", "system"}, {"content", *prompt.system_instruction}});
    }
    messages.push_back({{"role", "user"}, {"content", prompt.continuation_text()}});
    nlohmann::json body{{"model", backend.model_name},
                        {"messages", messages},
                        {"max_tokens", params.max_tokens},
                        {"temperature", params.temperature},
                        {"top_p", params.top_p},
                        {"n", 1},
                        {"stop", stop_list(params)}};
    if (backend.supports_logprobs) {
        body["logprobs"] = true;
    }
    return body;
}

Completion parse_completion_response(const nlohmann::json& body, bool chat) {
    try {
        const auto& choice = body.at("choices").at(0);
        Completion out;
        const nlohmann::json* logprobs = choice.contains("logprobs") && !choice["logprobs"].is_null()
                                             ? &choice["logprobs"]
                                             : nullptr;
        if (chat) {
            const auto& content = choice.at("message").at("content");
            out.text = content.is_null() ? std::string() : strip_fence(content.get<std::string>());
            if (logprobs && logprobs->contains("content") && (*logprobs)["content"].is_array()) {
                std::vector<double> values;
                std::vector<std::string> tokens;
                for (const auto& t : (*logprobs)["content"]) {
                    values.push_back(t.at("logprob").get<double>());
                    tokens.push_back(t.value("token", ""));
                }
                out.token_logprobs = std::move(values);
                out.tokens = std::move(tokens);
            }
        } else {
            out.text = choice.at("text").get<std::string>();
            if (logprobs && logprobs->contains("token_logprobs")) {
                std::vector<double> values;
                std::vector<std::string> tokens;
                const auto& lp = (*logprobs)["token_logprobs"];
                const bool has_tokens = logprobs->contains("tokens") && (*logprobs)["tokens"].size() == lp.size();
                for (std::size_t i = 0; i < lp.size(); ++i) {
                    if (lp[i].is_null()) {
                        continue;
                    }
                    values.push_back(lp[i].get<double>());
                    if (has_tokens) {
                        tokens.push_back((*logprobs)["tokens"][i].get<std::string>());
                    }
                }
                out.token_logprobs = std::move(values);
                if (has_tokens) {
                    out.tokens = std::move(tokens);
                }
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendError::Kind::protocol, std::string("unexpected completion response: ") + e.what());
    }
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
    descriptor_.kind = BackendDescriptor::Kind::http_openai_compatible;
    descriptor_.model_name = options_.model;
    descriptor_.endpoint = options_.endpoint;
    descriptor_.supports_suffix = options_.supports_suffix;
    descriptor_.supports_logprobs = options_.supports_logprobs;
    descriptor_.supports_system_prompt = options_.supports_system_prompt;

    const auto scheme_end = options_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must be an http(s) URL: '" + options_.endpoint + "'");
    }
    const auto path_start = options_.endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = options_.endpoint.substr(0, path_start);
    base_path_ = path_start == std::string::npos ? std::string() : options_.endpoint.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') {
        base_path_.pop_back();
    }
}

Completion HttpBackend::complete(const Prompt& prompt, const GenerationParams& params) {
    const bool chat = prompt.mode == Mode::instructed_complete;
    const auto body = chat ? chat_request(prompt, params, descriptor_) : completions_request(prompt, params, descriptor_);
    const auto path = base_path_ + (chat ? "/chat/completions" : "/completions");
    const auto payload = body.dump();

    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    thread_local std::mt19937 rng{std::random_device{}()};
    auto backoff = options_.initial_backoff;
    std::chrono::milliseconds waited{0};
    for (int attempt = 0;; ++attempt) {
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        client.set_write_timeout(options_.timeout);
        auto res = client.Post(path, headers, payload, "application/json");

        BackendError::Kind kind = BackendError::Kind::transport;
        std::string message;
        if (!res) {
            message = "request to " + scheme_host_port_ + path + " failed: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            nlohmann::json parsed;
            try {
                parsed = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw BackendError(BackendError::Kind::protocol, std::string("invalid JSON from backend: ") + e.what());
            }
            return parse_completion_response(parsed, chat);
        } else if (res->status == 401 || res->status == 403) {
            throw BackendError(BackendError::Kind::auth,
                               "backend rejected credentials (HTTP " + std::to_string(res->status) + ")");
        } else if (res->status == 429) {
            kind = BackendError::Kind::rate_limit;
            message = "rate limited (HTTP 429)";
        } else if (res->status >= 500) {
            message = "backend error (HTTP " + std::to_string(res->status) + ")";
        } else {
            throw BackendError(BackendError::Kind::protocol,
                               "backend returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        }

        if (attempt >= options_.max_retries || waited >= options_.max_wait) {
            throw BackendError(kind, message);
        }
        std::uniform_int_distribution<long> jitter(0, std::max<long>(backoff.count() / 2, 0));
        auto delay = backoff + std::chrono::milliseconds(jitter(rng));
        delay = std::min(delay, options_.max_wait - waited);
        std::this_thread::sleep_for(delay);
        waited += delay;
        backoff = std::min(backoff * 2, options_.max_backoff);
    }
}

}  // namespace flag
