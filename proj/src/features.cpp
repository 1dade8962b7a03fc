#include "flag/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "flag/error.hpp"
#include "flag/utf8.hpp"

namespace flag {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            const std::size_t substitute = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({above + 1, row[j - 1] + 1, substitute});
            diagonal = above;
        }
    }
    return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    return levenshtein(utf8::decode(a), utf8::decode(b));
}

namespace {

using Ngram = std::vector<std::string_view>;

std::map<Ngram, std::size_t> count_ngrams(std::span<const std::string> tokens, std::size_t n) {
    std::map<Ngram, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        Ngram gram;
        gram.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            gram.emplace_back(tokens[i + k]);
        }
        ++counts[gram];
    }
    return counts;
}

}  // namespace

std::vector<double> bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n) {
    if (max_n < 1) {
        throw ConfigError("bleu: max_n must be >= 1");
    }
    std::vector<double> scores(static_cast<std::size_t>(max_n), 0.0);
    if (candidate.empty() || reference.empty()) {
        return scores;
    }
    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);

    double log_sum = 0.0;
    bool zero = false;
    for (int n = 1; n <= max_n; ++n) {
        const auto cand = count_ngrams(candidate, static_cast<std::size_t>(n));
        const auto ref = count_ngrams(reference, static_cast<std::size_t>(n));
        std::size_t clipped = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            if (auto it = ref.find(gram); it != ref.end()) {
                clipped += std::min(count, it->second);
            }
        }
        if (clipped == 0 || total == 0) {
            zero = true;
        } else {
            log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
        }
        scores[static_cast<std::size_t>(n - 1)] = zero ? 0.0 : brevity * std::exp(log_sum / n);
    }
    return scores;
}

std::vector<std::string> comment_tokens(std::string_view comment, const LanguageProfile& language) {
    std::string text(comment);
    auto blank_out = [&text](const std::string& marker) {
        for (auto pos = text.find(marker); pos != std::string::npos; pos = text.find(marker, pos)) {
            text.replace(pos, marker.size(), std::string(marker.size(), ' '));
        }
    };
    for (const auto& block : language.block_comment_delimiters) {
        blank_out(block.open);
        blank_out(block.close);
    }
    for (const auto& marker : language.line_comment_markers) {
        blank_out(marker);
    }
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char ch) { return std::tolower(ch); });

    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) {
            std::string token = text.substr(i, j - i);
            // Block-comment continuation stars carry no words.
            if (token.find_first_not_of('*') != std::string::npos) {
                tokens.push_back(std::move(token));
            }
        }
        i = j;
    }
    return tokens;
}

std::string strip_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            out.push_back(ch);
        }
    }
    return out;
}

std::optional<std::size_t> distance_from_comment(const PreprocessedFile& file, std::size_t loc) {
    if (loc >= file.lines.size()) {
        throw ConfigError("line index out of range");
    }
    const auto prior = file.prior_comment_index[loc];
    if (!prior) {
        return std::nullopt;
    }
    return loc - *prior;
}

LineFeatures extract_features(const SourceLine& original, const GeneratedLine& generated,
                              const PreprocessedFile& file, std::size_t loc) {
    const auto& language = file.profile();
    const auto split = split_line(generated.text, language);

    LineFeatures f;
    f.ld = levenshtein(original.code_part, split.code_part);
    f.ld_no_ws = levenshtein(strip_whitespace(original.code_part), strip_whitespace(split.code_part));
    if (original.has_comment() && !split.comment_part.empty()) {
        const auto reference = comment_tokens(original.comment_part, language);
        const auto candidate = comment_tokens(split.comment_part, language);
        const auto scores = bleu(candidate, reference, 4);
        f.bleu1 = scores[0];
        f.bleu_cumulative = std::array<double, 4>{scores[0], scores[1], scores[2], scores[3]};
    }
    f.dfc = distance_from_comment(file, loc);
    f.mean_logprob = generated.mean_logprob();
    return f;
}

std::vector<LineFeatures> extract_file_features(const PreprocessedFile& file,
                                                std::span<const GeneratedLine> generated) {
    const std::size_t first = file.start_index;
    if (generated.size() != file.lines.size() - first) {
        throw DataError("expected " + std::to_string(file.lines.size() - first) + " generated lines, got " +
                        std::to_string(generated.size()));
    }
    std::vector<LineFeatures> out;
    out.reserve(generated.size());
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const std::size_t loc = first + i;
        out.push_back(extract_features(file.lines[loc], generated[i], file, loc));
        if (loc == 0) {
            continue;
        }
        const auto previous = file.prior_comment_index[loc - 1];
        if (previous && *previous >= first) {
            out.back().prev_comment_bleu1 = out[*previous - first].bleu1;
        }
    }
    return out;
}

}  // namespace flag
