#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flag/backend.hpp"
#include "flag/srcmodel.hpp"

namespace flag {

struct LineFeatures {
    std::size_t ld = 0;
    std::size_t ld_no_ws = 0;
    std::optional<double> bleu1;
    std::optional<std::array<double, 4>> bleu_cumulative;
    std::optional<std::size_t> dfc;
    std::optional<double> mean_logprob;
    std::optional<double> prev_comment_bleu1;

    friend bool operator==(const LineFeatures&, const LineFeatures&) = default;
};

/// Unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Cumulative BLEU-1..max_n (modified n-gram precision, uniform-weight
/// geometric mean, brevity penalty, no smoothing). Empty input scores 0.
std::vector<double> bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n);

/// Comment text with markers removed, lowercased and split on whitespace.
std::vector<std::string> comment_tokens(std::string_view comment, const LanguageProfile& language);

/// All whitespace removed.
std::string strip_whitespace(std::string_view text);

/// 0 on a comment-bearing line, otherwise the number of checkable lines back to
/// the closest preceding comment; empty when no comment precedes the line.
std::optional<std::size_t> distance_from_comment(const PreprocessedFile& file, std::size_t loc);

/// Features for one line. prev_comment_bleu1 needs the whole file and is left
/// empty here; extract_file_features fills it.
LineFeatures extract_features(const SourceLine& original, const GeneratedLine& generated,
                              const PreprocessedFile& file, std::size_t loc);

/// Features for every checkable line from start_index; `generated[i]` belongs
/// to line start_index + i.
std::vector<LineFeatures> extract_file_features(const PreprocessedFile& file, std::span<const GeneratedLine> generated);

}  // namespace flag
