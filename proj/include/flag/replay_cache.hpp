#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "flag/backend.hpp"

namespace flag {

struct CacheRecord {
    std::string key;
    nlohmann::json request;
    std::string response_text;
    std::optional<std::vector<double>> token_logprobs;
    std::optional<std::vector<std::string>> tokens;
    std::string created_at;

    nlohmann::json to_json() const;
    static CacheRecord from_json(const nlohmann::json& j);
};

/**
 * Append-only directory of completion records, one `<key>.json` file each.
 * Reads may run concurrently; appends are serialized and never overwrite an
 * existing record.
 */
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path directory);

    std::optional<CacheRecord> lookup(const std::string& key) const;
    void append(const CacheRecord& record);

    const std::filesystem::path& directory() const noexcept { return directory_; }

private:
    std::filesystem::path record_path(const std::string& key) const;

    std::filesystem::path directory_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, CacheRecord> loaded_;
    std::mutex append_mutex_;
};

/// Serves completions from a ReplayCache. Misses go to the upstream backend and
/// are recorded; without an upstream a miss is a BackendError(cache_miss).
class CachingBackend : public CompletionBackend {
public:
    CachingBackend(std::shared_ptr<ReplayCache> cache, std::unique_ptr<CompletionBackend> upstream);

    /// Replay-only: `descriptor` stands in for the model that recorded the cache.
    CachingBackend(std::shared_ptr<ReplayCache> cache, BackendDescriptor descriptor);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    Completion complete(const Prompt& prompt, const GenerationParams& params) override;

    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t upstream_calls() const noexcept { return upstream_calls_.load(); }

private:
    std::shared_ptr<ReplayCache> cache_;
    std::unique_ptr<CompletionBackend> upstream_;
    BackendDescriptor descriptor_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> upstream_calls_{0};
};

/// Request payload stored alongside a cache record.
nlohmann::json describe_request(const Prompt& prompt, const GenerationParams& params, const BackendDescriptor& backend);

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace flag
