#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flag/backend.hpp"

namespace flag {

struct ScriptedResponse {
    std::string text;
    std::optional<std::vector<double>> token_logprobs;
};

/**
 * Deterministic backend for tests and offline runs.
 *
 * Responses are keyed by cache_key of the prompt. A key maps to a sequence of
 * completions served in order, the last one repeating. Scripting a line
 * registers both its plain and its assisted prompt against one shared
 * sequence, so "empty twice, then text" spans the retry loop.
 */
class ScriptedMock : public CompletionBackend {
public:
    ScriptedMock();
    explicit ScriptedMock(BackendDescriptor descriptor);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    Completion complete(const Prompt& prompt, const GenerationParams& params) override;

    void on_prompt(const std::string& key, std::vector<ScriptedResponse> sequence);

    void script_line(const PreprocessedFile& file, std::size_t loc, Mode mode, const GenerationParams& params,
                     std::vector<ScriptedResponse> sequence);

    /// Every line not otherwise scripted answers with its own original text
    /// (minus any assist), which makes ld 0 everywhere.
    void echo_original(const PreprocessedFile& file, Mode mode, const GenerationParams& params);

    static std::vector<ScriptedResponse> empty_then(int empties, ScriptedResponse response);

    std::size_t calls() const noexcept { return calls_.load(); }

private:
    struct Sequence {
        std::vector<ScriptedResponse> responses;
        std::size_t next = 0;
        std::mutex mutex;
    };

    void bind(const std::string& key, std::shared_ptr<Sequence> sequence, bool overwrite);

    BackendDescriptor descriptor_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<Sequence>> scripts_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace flag
