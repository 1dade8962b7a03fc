#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace flag {

enum class Language { c, python, verilog };

std::string_view to_string(Language language) noexcept;

/// Accepts "c", "python", "verilog" (case-insensitive) plus the short forms "py", "v", "sv".
Language parse_language(std::string_view name);

/// .c/.h -> C, .py -> Python, .v/.sv -> Verilog.
std::optional<Language> language_from_extension(const std::filesystem::path& path);

struct BlockDelimiter {
    std::string open;
    std::string close;
};

/**
 * Per-language lexical knowledge used to separate code from comments and to
 * recognise lines that hold nothing but a keyword.
 *
 * When `docstring_blocks` is set (Python), a block delimiter only opens a
 * comment if nothing but whitespace precedes it on the line; anywhere else it
 * opens an ordinary multi-line string literal.
 */
struct LanguageProfile {
    Language id;
    std::vector<std::string> line_comment_markers;
    std::vector<BlockDelimiter> block_comment_delimiters;
    std::string string_quotes;
    bool docstring_blocks = false;
    std::set<std::string, std::less<>> keywords;
    std::set<std::string, std::less<>> structural_tokens;
};

const LanguageProfile& profile(Language language);

/// Multi-line region left open at the end of a line.
struct ScanState {
    std::string closing;  // delimiter that ends the region; empty when nothing is open
    bool comment = false;

    bool open() const noexcept { return !closing.empty(); }
    bool in_block_comment() const noexcept { return open() && comment; }

    friend bool operator==(const ScanState&, const ScanState&) = default;
};

struct LineSplit {
    std::string code_part;
    std::string comment_part;
    ScanState state;

    bool still_in_block() const noexcept { return state.in_block_comment(); }
};

/// Separates a raw line into code and comment. Comment markers inside string
/// literals are ignored; open block comments and multi-line strings carry over
/// through `state`. Leading indentation of the code part is preserved.
LineSplit split_line(std::string_view raw, const LanguageProfile& language, const ScanState& state = {});

/// True when the code is a single keyword, optionally followed by one of
/// `;` `:` `{`, or is a lone structural token such as `}`.
bool is_keyword_only(std::string_view code_part, const LanguageProfile& language);

struct SourceLine {
    int original_line_no = 0;
    std::string raw;
    std::string code_part;
    std::string comment_part;
    bool is_comment_only = false;
    bool has_trailing_comment = false;

    bool has_comment() const noexcept { return !comment_part.empty(); }
    bool is_code() const noexcept { return !code_part.empty(); }
};

struct PreprocessedFile {
    std::string path;
    Language language = Language::c;
    std::vector<SourceLine> lines;
    std::size_t start_index = 0;
    /// Index of the most recent comment-bearing line at or before each line.
    std::vector<std::optional<std::size_t>> prior_comment_index;
    std::size_t physical_line_count = 0;

    const LanguageProfile& profile() const { return flag::profile(language); }
    std::size_t size() const noexcept { return lines.size(); }
};

/// Preprocesses in-memory text. Lines keep their 1-based physical numbers.
PreprocessedFile preprocess(std::string_view text, Language language, std::optional<int> start_line = std::nullopt,
                            std::string path = "<memory>");

PreprocessedFile load_source(const std::filesystem::path& path, Language language,
                             std::optional<int> start_line = std::nullopt);

/// Reads a whole file as UTF-8 (malformed bytes become U+FFFD).
std::string read_text_file(const std::filesystem::path& path);

}  // namespace flag
