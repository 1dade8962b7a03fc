#include "flag/prompting.hpp"

#include <algorithm>

#include "flag/error.hpp"
#include "flag/utf8.hpp"

namespace flag {

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::auto_complete: return "auto";
        case Mode::insertion: return "insert";
        case Mode::instructed_complete: return "instruct";
    }
    return "unknown";
}

Mode parse_mode(std::string_view name) {
    if (name == "auto" || name == "auto_complete" || name == "auto-complete") return Mode::auto_complete;
    if (name == "insert" || name == "insertion") return Mode::insertion;
    if (name == "instruct" || name == "instructed_complete" || name == "instructed-complete") {
        return Mode::instructed_complete;
    }
    throw ConfigError("unknown mode '" + std::string(name) + "' (expected auto, insert or instruct)");
}

void GenerationParams::validate() const {
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (max_tokens <= 0) throw ConfigError("max_tokens must be > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (max_attempts < 0) throw ConfigError("max_attempts must be >= 0");
    if (assist_chars < 0) throw ConfigError("assist_chars must be >= 0");
    if (max_prefix_lines < 0 || max_suffix_lines < 0) throw ConfigError("window limits must be >= 0");
}

std::string Prompt::continuation_text() const {
    if (prefix.empty()) {
        return assist;
    }
    return prefix + "\n" + assist;
}

namespace {

std::string join_lines(const PreprocessedFile& file, std::size_t first, std::size_t last) {
    std::string out;
    for (std::size_t i = first; i < last; ++i) {
        if (i != first) {
            out.push_back('\n');
        }
        out += file.lines[i].raw;
    }
    return out;
}

}  // namespace

Prompt build_prompt(const PreprocessedFile& file, std::size_t loc, Mode mode, const GenerationParams& params) {
    if (loc < file.start_index || loc >= file.lines.size()) {
        throw ConfigError("line index " + std::to_string(loc) + " outside checkable range [" +
                          std::to_string(file.start_index) + ", " + std::to_string(file.lines.size()) + ")");
    }
    const auto pre = static_cast<std::size_t>(params.max_prefix_lines);
    const auto suf = static_cast<std::size_t>(params.max_suffix_lines);

    Prompt prompt;
    prompt.mode = mode;
    prompt.prefix = join_lines(file, loc > pre ? loc - pre : 0, loc);
    if (mode == Mode::insertion) {
        prompt.suffix = join_lines(file, loc + 1, std::min(file.lines.size(), loc + 1 + suf));
    }
    if (mode == Mode::instructed_complete) {
        prompt.system_instruction = std::string(kInstructedSystemPrompt);
    }
    return prompt;
}

std::string assist_text(const SourceLine& original, int assist_chars) {
    const std::string_view raw = original.raw;
    const auto body = raw.find_first_not_of(" \t");
    if (body == std::string_view::npos) {
        return std::string(raw);
    }
    return std::string(raw.substr(0, body)) +
           utf8::prefix(raw.substr(body), static_cast<std::size_t>(std::max(assist_chars, 0)));
}

Prompt apply_assist(Prompt prompt, const SourceLine& original, const GenerationParams& params) {
    prompt.assist = assist_text(original, params.assist_chars);
    return prompt;
}

}  // namespace flag
