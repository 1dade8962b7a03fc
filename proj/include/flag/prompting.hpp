#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "flag/srcmodel.hpp"

namespace flag {

enum class Mode { auto_complete, insertion, instructed_complete };

std::string_view to_string(Mode mode) noexcept;

/// Accepts "auto", "insert", "instruct" and the long spellings.
Mode parse_mode(std::string_view name);

inline constexpr std::string_view kInstructedSystemPrompt =
    "You are a skilled AI programming assistant. Complete the next line of code.";

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 150;
    double top_p = 1.0;
    std::string stop = "\n";
    int max_attempts = 3;
    int assist_chars = 4;
    int max_prefix_lines = 50;
    int max_suffix_lines = 50;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

struct Prompt {
    std::string prefix;
    std::optional<std::string> suffix;
    std::string assist;
    Mode mode = Mode::auto_complete;
    std::optional<std::string> system_instruction;

    /// Text the model continues: the prefix, a newline, then any assist.
    std::string continuation_text() const;
};

Prompt build_prompt(const PreprocessedFile& file, std::size_t loc, Mode mode, const GenerationParams& params);

/// Leading indentation of the original line plus its next `assist_chars` characters.
std::string assist_text(const SourceLine& original, int assist_chars);

Prompt apply_assist(Prompt prompt, const SourceLine& original, const GenerationParams& params);

}  // namespace flag
