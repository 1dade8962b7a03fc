#include "flag/replay_cache.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "flag/error.hpp"

namespace flag {

nlohmann::json CacheRecord::to_json() const {
    nlohmann::json j{{"key", key}, {"request", request}, {"response_text", response_text}, {"created_at", created_at}};
    if (token_logprobs) {
        j["token_logprobs"] = *token_logprobs;
    }
    if (tokens) {
        j["tokens"] = *tokens;
    }
    return j;
}

CacheRecord CacheRecord::from_json(const nlohmann::json& j) {
    CacheRecord r;
    r.key = j.at("key").get<std::string>();
    r.request = j.value("request", nlohmann::json::object());
    r.response_text = j.at("response_text").get<std::string>();
    r.created_at = j.value("created_at", "");
    if (j.contains("token_logprobs") && !j["token_logprobs"].is_null()) {
        r.token_logprobs = j["token_logprobs"].get<std::vector<double>>();
    }
    if (j.contains("tokens") && !j["tokens"].is_null()) {
        r.tokens = j["tokens"].get<std::vector<std::string>>();
    }
    return r;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json describe_request(const Prompt& prompt, const GenerationParams& params,
                                const BackendDescriptor& backend) {
    nlohmann::json j{{"mode", std::string(to_string(prompt.mode))},
                     {"model", backend.model_name},
                     {"prefix", prompt.prefix},
                     {"assist", prompt.assist},
                     {"temperature", params.temperature},
                     {"max_tokens", params.max_tokens},
                     {"top_p", params.top_p},
                     {"stop", params.stop}};
    if (prompt.suffix) {
        j["suffix"] = *prompt.suffix;
    }
    if (prompt.system_instruction) {
        j["system"] = *prompt.system_instruction;
    }
    return j;
}

ReplayCache::ReplayCache(std::filesystem::path directory) : directory_(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    if (ec) {
        throw ConfigError("cannot create cache directory " + directory_.string() + ": " + ec.message());
    }
}

std::filesystem::path ReplayCache::record_path(const std::string& key) const {
    return directory_ / (key + ".json");
}

std::optional<CacheRecord> ReplayCache::lookup(const std::string& key) const {
    {
        std::shared_lock lock(mutex_);
        if (auto it = loaded_.find(key); it != loaded_.end()) {
            return it->second;
        }
    }
    std::ifstream in(record_path(key));
    if (!in) {
        return std::nullopt;
    }
    CacheRecord record;
    try {
        record = CacheRecord::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("corrupt cache record " + record_path(key).string() + ": " + e.what());
    }
    std::unique_lock lock(mutex_);
    loaded_.emplace(key, record);
    return record;
}

void ReplayCache::append(const CacheRecord& record) {
    std::lock_guard guard(append_mutex_);
    const auto path = record_path(record.key);
    if (!std::filesystem::exists(path)) {
        const auto tmp = directory_ / (record.key + ".json.tmp");
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << record.to_json().dump(2) << '\n';
            if (!out) {
                throw DataError("cannot write cache record " + tmp.string());
            }
        }
        std::filesystem::rename(tmp, path);
    }
    std::unique_lock lock(mutex_);
    loaded_.emplace(record.key, record);
}

CachingBackend::CachingBackend(std::shared_ptr<ReplayCache> cache, std::unique_ptr<CompletionBackend> upstream)
    : cache_(std::move(cache)), upstream_(std::move(upstream)), descriptor_(upstream_->descriptor()) {}

CachingBackend::CachingBackend(std::shared_ptr<ReplayCache> cache, BackendDescriptor descriptor)
    : cache_(std::move(cache)), descriptor_(std::move(descriptor)) {
    descriptor_.kind = BackendDescriptor::Kind::replay_cache;
}

Completion CachingBackend::complete(const Prompt& prompt, const GenerationParams& params) {
    const auto key = cache_key(prompt, params, descriptor_);
    if (auto record = cache_->lookup(key)) {
        ++hits_;
        return Completion{record->response_text, record->token_logprobs, record->tokens, true};
    }
    if (!upstream_) {
        throw BackendError(BackendError::Kind::cache_miss, "no cached completion for key " + key);
    }
    ++upstream_calls_;
    Completion fresh = upstream_->complete(prompt, params);
    CacheRecord record{key, describe_request(prompt, params, descriptor_), fresh.text, fresh.token_logprobs,
                       fresh.tokens, utc_timestamp()};
    cache_->append(record);
    fresh.from_cache = false;
    return fresh;
}

}  // namespace flag
