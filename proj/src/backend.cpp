#include "flag/backend.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "flag/digest.hpp"
#include "flag/error.hpp"

namespace flag {

std::string_view to_string(BackendDescriptor::Kind kind) noexcept {
    switch (kind) {
        case BackendDescriptor::Kind::http_openai_compatible: return "http";
        case BackendDescriptor::Kind::replay_cache: return "replay";
        case BackendDescriptor::Kind::scripted_mock: return "mock";
    }
    return "unknown";
}

void check_capabilities(const BackendDescriptor& backend, Mode mode) {
    if (mode == Mode::insertion && !backend.supports_suffix) {
        throw BackendError(BackendError::Kind::capability,
                           "model '" + backend.model_name + "' does not support insertion (suffix) prompts");
    }
    if (mode == Mode::instructed_complete && !backend.supports_system_prompt) {
        throw BackendError(BackendError::Kind::capability,
                           "model '" + backend.model_name + "' does not support system prompts");
    }
}

std::optional<double> GeneratedLine::mean_logprob() const {
    if (!token_logprobs || token_logprobs->empty()) {
        return std::nullopt;
    }
    const double sum = std::accumulate(token_logprobs->begin(), token_logprobs->end(), 0.0);
    return sum / static_cast<double>(token_logprobs->size());
}

std::string cache_key(const Prompt& prompt, const GenerationParams& params, const BackendDescriptor& backend) {
    std::string canonical = "flag-cache-v1;";
    append_field(canonical, to_string(prompt.mode));
    append_field(canonical, prompt.system_instruction ? "1" + *prompt.system_instruction : "0");
    append_field(canonical, prompt.prefix);
    append_field(canonical, prompt.assist);
    append_field(canonical, prompt.suffix ? "1" + *prompt.suffix : "0");
    append_field(canonical, backend.model_name);
    append_field(canonical, canonical_number(params.temperature));
    append_field(canonical, std::to_string(params.max_tokens));
    append_field(canonical, canonical_number(params.top_p));
    append_field(canonical, params.stop);
    return sha256_hex(canonical);
}

std::string config_fingerprint(const BackendDescriptor& backend, Mode mode, const GenerationParams& params) {
    std::string canonical = "flag-config-v1;";
    append_field(canonical, to_string(backend.kind));
    append_field(canonical, backend.model_name);
    append_field(canonical, to_string(mode));
    append_field(canonical, canonical_number(params.temperature));
    append_field(canonical, std::to_string(params.max_tokens));
    append_field(canonical, canonical_number(params.top_p));
    append_field(canonical, params.stop);
    append_field(canonical, std::to_string(params.max_attempts));
    append_field(canonical, std::to_string(params.assist_chars));
    append_field(canonical, std::to_string(params.max_prefix_lines));
    append_field(canonical, std::to_string(params.max_suffix_lines));
    return sha256_hex(canonical).substr(0, 16);
}

GeneratedLine complete_once(const Prompt& prompt, const GenerationParams& params, CompletionBackend& backend) {
    check_capabilities(backend.descriptor(), prompt.mode);
    Completion raw = backend.complete(prompt, params);

    GeneratedLine line;
    line.from_cache = raw.from_cache;
    const auto eol = raw.text.find('\n');
    line.text = raw.text.substr(0, eol);
    if (!line.text.empty() && line.text.back() == '\r') {
        line.text.pop_back();
    }

    if (raw.token_logprobs && backend.descriptor().supports_logprobs) {
        auto logprobs = std::move(*raw.token_logprobs);
        if (raw.tokens && raw.tokens->size() == logprobs.size()) {
            // Drop the stop token and anything generated after it.
            const auto stop = std::find_if(raw.tokens->begin(), raw.tokens->end(),
                                           [](const std::string& t) { return t.find('\n') != std::string::npos; });
            logprobs.resize(static_cast<std::size_t>(stop - raw.tokens->begin()));
        }
        line.token_logprobs = std::move(logprobs);
    }
    return line;
}

namespace {

bool looks_like_comment(std::string_view text, const LanguageProfile& language) {
    const auto split = split_line(text, language);
    return split.code_part.empty() && !split.comment_part.empty();
}

}  // namespace

GeneratedLine generate_line(const PreprocessedFile& file, std::size_t loc, Mode mode, const GenerationParams& params,
                            CompletionBackend& backend) {
    const Prompt base = build_prompt(file, loc, mode, params);
    const SourceLine& original = file.lines[loc];
    const auto& language = file.profile();

    std::vector<std::string> notes;
    int attempts = 0;
    int failures = 0;
    while (true) {
        const Prompt prompt = attempts > 0 ? apply_assist(base, original, params) : base;
        GeneratedLine response;
        try {
            response = complete_once(prompt, params, backend);
        } catch (const BackendError& e) {
            if (!e.retryable() || failures >= params.max_attempts) {
                throw;
            }
            ++failures;
            notes.push_back(std::string("error: ") + e.what());
            continue;
        }

        const bool empty = response.text.empty();
        // Judged on the completion alone; the assist always carries code.
        const bool comment_for_code = !empty && original.is_code() && looks_like_comment(response.text, language);
        if (!empty) {
            response.text = prompt.assist + response.text;
        }

        if (empty && attempts < params.max_attempts) {
            ++attempts;
            notes.emplace_back("empty-response");
            continue;
        }
        if (comment_for_code && attempts < params.max_attempts) {
            ++attempts;
            notes.emplace_back("comment-for-code");
            continue;
        }
        if (empty || comment_for_code) {
            notes.emplace_back(empty ? "empty-response" : "comment-for-code");
            notes.emplace_back("attempts-exhausted");
        }
        response.attempts_used = attempts + 1;
        response.errors_noted = std::move(notes);
        return response;
    }
}

namespace {

// Backend failures name the line they happened on.
GeneratedLine generate_located(const PreprocessedFile& file, std::size_t loc, Mode mode,
                               const GenerationParams& params, CompletionBackend& backend) {
    try {
        return generate_line(file, loc, mode, params, backend);
    } catch (const BackendError& e) {
        throw BackendError(e.kind(), file.path + ":" + std::to_string(file.lines[loc].original_line_no) + ": " +
                                         e.what());
    }
}

}  // namespace

std::vector<GeneratedLine> generate_lines(const PreprocessedFile& file, Mode mode, const GenerationParams& params,
                                          CompletionBackend& backend, int parallelism) {
    const std::size_t first = file.start_index;
    const std::size_t count = file.lines.size() - first;
    std::vector<GeneratedLine> out(count);

    const auto workers = static_cast<std::size_t>(std::clamp<long>(parallelism, 1, static_cast<long>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = generate_located(file, first + i, mode, params, backend);
        }
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (!failed.load()) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) {
                        return;
                    }
                    try {
                        out[i] = generate_located(file, first + i, mode, params, backend);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                        failed.store(true);
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

}  // namespace flag
