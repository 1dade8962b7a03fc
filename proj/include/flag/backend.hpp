#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flag/prompting.hpp"
#include "flag/srcmodel.hpp"

namespace flag {

struct BackendDescriptor {
    enum class Kind { http_openai_compatible, replay_cache, scripted_mock };

    Kind kind = Kind::scripted_mock;
    std::string model_name;
    std::optional<std::string> endpoint;
    bool supports_suffix = true;
    bool supports_logprobs = true;
    bool supports_system_prompt = true;
};

std::string_view to_string(BackendDescriptor::Kind kind) noexcept;

/// Throws BackendError(capability) when `mode` needs something the backend lacks.
void check_capabilities(const BackendDescriptor& backend, Mode mode);

/// One raw answer from a backend, before truncation at the stop token.
struct Completion {
    std::string text;
    std::optional<std::vector<double>> token_logprobs;
    std::optional<std::vector<std::string>> tokens;
    bool from_cache = false;
};

/// A completion model. Implementations must tolerate concurrent calls.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    virtual const BackendDescriptor& descriptor() const = 0;

    virtual Completion complete(const Prompt& prompt, const GenerationParams& params) = 0;
};

struct GeneratedLine {
    std::string text;
    std::optional<std::vector<double>> token_logprobs;
    int attempts_used = 1;
    std::vector<std::string> errors_noted;
    bool from_cache = false;

    /// Mean of the token logprobs; empty when none were returned.
    std::optional<double> mean_logprob() const;

    friend bool operator==(const GeneratedLine&, const GeneratedLine&) = default;
};

/// Content hash over everything that determines a completion request.
std::string cache_key(const Prompt& prompt, const GenerationParams& params, const BackendDescriptor& backend);

/// Short hash of backend, model, mode and generation parameters.
std::string config_fingerprint(const BackendDescriptor& backend, Mode mode, const GenerationParams& params);

/// A single round trip. The result holds only the first line of the completion
/// and the logprobs of the tokens before the stop token.
GeneratedLine complete_once(const Prompt& prompt, const GenerationParams& params, CompletionBackend& backend);

/**
 * Generates a replacement for line `loc` with bounded retries.
 *
 * Attempt 1 sends the plain prompt; later attempts carry the assist and the
 * returned text becomes assist + completion. A retry is triggered by an empty
 * completion or by a comment where the original line holds code, each at most
 * `max_attempts` times, so at most `max_attempts + 1` requests are made.
 * Retryable backend errors are noted and retried up to `max_attempts` times;
 * anything else propagates.
 */
GeneratedLine generate_line(const PreprocessedFile& file, std::size_t loc, Mode mode, const GenerationParams& params,
                            CompletionBackend& backend);

/// generate_line for every checkable line from start_index, in order, using up
/// to `parallelism` worker threads.
std::vector<GeneratedLine> generate_lines(const PreprocessedFile& file, Mode mode, const GenerationParams& params,
                                          CompletionBackend& backend, int parallelism = 1);

}  // namespace flag
