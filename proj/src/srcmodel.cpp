#include "flag/srcmodel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "flag/error.hpp"
#include "flag/utf8.hpp"

namespace flag {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

std::string_view rtrim(std::string_view s) {
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view trim(std::string_view s) {
    s = rtrim(s);
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    return s;
}

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view token) {
    return !token.empty() && s.substr(pos, token.size()) == token;
}

void append_comment(std::string& comment, std::string_view segment) {
    segment = trim(segment);
    if (segment.empty()) {
        return;
    }
    if (!comment.empty()) {
        comment.push_back(' ');
    }
    comment.append(segment);
}

// Position of `closing` at or after `from`, skipping backslash escapes when the
// region is a string literal.
std::size_t find_close(std::string_view raw, std::size_t from, std::string_view closing, bool escapes) {
    for (std::size_t i = from; i < raw.size(); ++i) {
        if (escapes && raw[i] == '\\') {
            ++i;
            continue;
        }
        if (starts_with_at(raw, i, closing)) {
            return i;
        }
    }
    return std::string_view::npos;
}

LanguageProfile make_c() {
    LanguageProfile p;
    p.id = Language::c;
    p.line_comment_markers = {"//"};
    p.block_comment_delimiters = {{"/*", "*/"}};
    p.string_quotes = "\"'";
    p.keywords = {"auto",     "break",    "case",       "char",          "const",      "continue",
                  "default",  "do",       "double",     "else",          "enum",       "extern",
                  "float",    "for",      "goto",       "if",            "inline",     "int",
                  "long",     "register", "restrict",   "return",        "short",      "signed",
                  "sizeof",   "static",   "struct",     "switch",        "typedef",    "union",
                  "unsigned", "void",     "volatile",   "while",         "_Alignas",   "_Alignof",
                  "_Atomic",  "_Bool",    "_Complex",   "_Generic",      "_Imaginary", "_Noreturn",
                  "_Static_assert",       "_Thread_local"};
    p.structural_tokens = {"{", "}", "};"};
    return p;
}

LanguageProfile make_python() {
    LanguageProfile p;
    p.id = Language::python;
    p.line_comment_markers = {"#"};
    p.block_comment_delimiters = {{"\"\"\"", "\"\"\""}, {"'''", "'''"}};
    p.string_quotes = "\"'";
    p.docstring_blocks = true;
    p.keywords = {"False", "None",   "True",     "and",   "as",     "assert", "async", "await",
                  "break", "class",  "continue", "def",   "del",    "elif",   "else",  "except",
                  "finally", "for",  "from",     "global", "if",    "import", "in",    "is",
                  "lambda", "nonlocal", "not",   "or",    "pass",   "raise",  "return", "try",
                  "while", "with",   "yield"};
    p.structural_tokens = {"{", "}", "[", "]", "(", ")", "),", "],", "},"};
    return p;
}

LanguageProfile make_verilog() {
    LanguageProfile p;
    p.id = Language::verilog;
    p.line_comment_markers = {"//"};
    p.block_comment_delimiters = {{"/*", "*/"}};
    // ' introduces sized literals (4'b1010), so only " quotes strings.
    p.string_quotes = "\"";
    p.keywords = {
        "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex", "casez",
        "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable", "edge", "else", "end",
        "endcase", "endconfig", "endfunction", "endgenerate", "endmodule", "endprimitive", "endspecify",
        "endtable", "endtask", "event", "for", "force", "forever", "fork", "function", "generate", "genvar",
        "highz0", "highz1", "if", "ifnone", "incdir", "include", "initial", "inout", "input", "instance",
        "integer", "join", "large", "liblist", "library", "localparam", "macromodule", "medium", "module",
        "nand", "negedge", "nmos", "nor", "noshowcancelled", "not", "notif0", "notif1", "or", "output",
        "parameter", "pmos", "posedge", "primitive", "pull0", "pull1", "pulldown", "pullup",
        "pulsestyle_onevent", "pulsestyle_ondetect", "rcmos", "real", "realtime", "reg", "release", "repeat",
        "rnmos", "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
        "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time", "tran",
        "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned", "use", "uwire",
        "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor", "xor",
        // SystemVerilog additions seen in .sv sources
        "always_comb", "always_ff", "always_latch", "logic", "bit", "byte", "endclass", "endinterface",
        "endpackage", "interface", "package", "unique", "priority"};
    p.structural_tokens = {"{", "}", "};", "end;"};
    return p;
}

}  // namespace

std::string_view to_string(Language language) noexcept {
    switch (language) {
        case Language::c: return "c";
        case Language::python: return "python";
        case Language::verilog: return "verilog";
    }
    return "unknown";
}

Language parse_language(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "c") return Language::c;
    if (lower == "python" || lower == "py") return Language::python;
    if (lower == "verilog" || lower == "v" || lower == "sv" || lower == "systemverilog") return Language::verilog;
    throw ConfigError("unknown language '" + std::string(name) + "'");
}

std::optional<Language> language_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".c" || ext == ".h") return Language::c;
    if (ext == ".py") return Language::python;
    if (ext == ".v" || ext == ".sv") return Language::verilog;
    return std::nullopt;
}

const LanguageProfile& profile(Language language) {
    static const LanguageProfile c = make_c();
    static const LanguageProfile python = make_python();
    static const LanguageProfile verilog = make_verilog();
    switch (language) {
        case Language::c: return c;
        case Language::python: return python;
        case Language::verilog: return verilog;
    }
    throw SourceError("unknown language");
}

LineSplit split_line(std::string_view raw, const LanguageProfile& language, const ScanState& state) {
    std::string code;
    std::string comment;
    ScanState next;
    std::size_t i = 0;

    if (state.open()) {
        const auto close = find_close(raw, 0, state.closing, !state.comment);
        const auto end = close == std::string_view::npos ? raw.size() : close + state.closing.size();
        if (state.comment) {
            append_comment(comment, raw.substr(0, end));
        } else {
            code.append(raw.substr(0, end));
        }
        if (close == std::string_view::npos) {
            next = state;
        }
        i = end;
    }

    char quote = 0;
    while (i < raw.size()) {
        const char c = raw[i];
        if (quote != 0) {
            code.push_back(c);
            if (c == '\\' && i + 1 < raw.size()) {
                code.push_back(raw[i + 1]);
                i += 2;
                continue;
            }
            if (c == quote) {
                quote = 0;
            }
            ++i;
            continue;
        }

        bool consumed = false;
        for (const auto& block : language.block_comment_delimiters) {
            if (!starts_with_at(raw, i, block.open)) {
                continue;
            }
            const bool is_comment = !language.docstring_blocks || trim(code).empty();
            const auto close = find_close(raw, i + block.open.size(), block.close, !is_comment);
            const auto end = close == std::string_view::npos ? raw.size() : close + block.close.size();
            if (is_comment) {
                append_comment(comment, raw.substr(i, end - i));
            } else {
                code.append(raw.substr(i, end - i));
            }
            if (close == std::string_view::npos) {
                next = ScanState{block.close, is_comment};
            }
            i = end;
            consumed = true;
            break;
        }
        if (consumed) {
            continue;
        }

        for (const auto& marker : language.line_comment_markers) {
            if (starts_with_at(raw, i, marker)) {
                append_comment(comment, raw.substr(i));
                i = raw.size();
                consumed = true;
                break;
            }
        }
        if (consumed) {
            break;
        }

        if (language.string_quotes.find(c) != std::string::npos) {
            quote = c;
        }
        code.push_back(c);
        ++i;
    }

    const auto trimmed = rtrim(code);
    if (trim(trimmed).empty()) {
        code.clear();
    } else {
        code.resize(trimmed.size());
    }
    return LineSplit{std::move(code), std::move(comment), std::move(next)};
}

bool is_keyword_only(std::string_view code_part, const LanguageProfile& language) {
    auto text = trim(code_part);
    if (text.empty()) {
        return false;
    }
    if (language.structural_tokens.contains(text)) {
        return true;
    }
    if (text.back() == ';' || text.back() == ':' || text.back() == '{') {
        text.remove_suffix(1);
        text = rtrim(text);
    }
    return language.keywords.contains(text);
}

PreprocessedFile preprocess(std::string_view text, Language language, std::optional<int> start_line,
                            std::string path) {
    const auto& lang = profile(language);
    const std::string clean = utf8::sanitize(text);

    PreprocessedFile file;
    file.path = std::move(path);
    file.language = language;

    ScanState state;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < clean.size()) {
        auto eol = clean.find('\n', pos);
        if (eol == std::string::npos) {
            eol = clean.size();
        }
        const std::string_view physical(clean.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        const auto raw = rtrim(physical);
        auto split = split_line(raw, lang, state);
        state = split.state;
        if (trim(raw).empty()) {
            continue;
        }
        SourceLine line;
        line.original_line_no = line_no;
        line.raw = std::string(raw);
        line.code_part = std::move(split.code_part);
        line.comment_part = std::move(split.comment_part);
        line.is_comment_only = line.code_part.empty() && !line.comment_part.empty();
        line.has_trailing_comment = !line.code_part.empty() && !line.comment_part.empty();
        file.lines.push_back(std::move(line));
    }
    file.physical_line_count = static_cast<std::size_t>(line_no);

    if (file.lines.empty()) {
        throw SourceError(file.path + ": no checkable lines");
    }

    std::optional<std::size_t> last_comment;
    file.prior_comment_index.reserve(file.lines.size());
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        if (file.lines[i].has_comment()) {
            last_comment = i;
        }
        file.prior_comment_index.push_back(last_comment);
    }

    const int first = start_line.value_or(1);
    if (first < 1) {
        throw SourceError(file.path + ": start line must be >= 1, got " + std::to_string(first));
    }
    if (static_cast<std::size_t>(first) > file.physical_line_count) {
        throw SourceError(file.path + ": start line " + std::to_string(first) + " is beyond end of file (" +
                          std::to_string(file.physical_line_count) + " lines)");
    }
    const auto it = std::find_if(file.lines.begin(), file.lines.end(),
                                 [first](const SourceLine& l) { return l.original_line_no >= first; });
    if (it == file.lines.end()) {
        throw SourceError(file.path + ": no checkable lines at or after line " + std::to_string(first));
    }
    file.start_index = static_cast<std::size_t>(it - file.lines.begin());
    return file;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SourceError(path.string() + ": cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw SourceError(path.string() + ": read error");
    }
    return buffer.str();
}

PreprocessedFile load_source(const std::filesystem::path& path, Language language, std::optional<int> start_line) {
    if (std::filesystem::is_directory(path)) {
        throw SourceError(path.string() + ": is a directory");
    }
    return preprocess(read_text_file(path), language, start_line, path.string());
}

}  // namespace flag
