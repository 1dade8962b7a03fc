#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flag/features.hpp"
#include "flag/srcmodel.hpp"

namespace flag {

struct Criterion {
    enum class Kind { c0, c1, c2 };

    Kind kind = Kind::c2;
    long ld_limit = 20;
    std::optional<long> dfc_limit = 10;
    double logprob_threshold = -0.5;
    /// Lines need ld strictly above this. 0 everywhere except the all-lines
    /// ROC sentinel, which uses -1.
    long ld_lower_bound = 0;

    static Criterion c0(long ld_limit);
    static Criterion c1(long ld_limit, long dfc_limit);
    static Criterion c2(long ld_limit, long dfc_limit, double logprob_threshold = -0.5);

    /// Rejects non-positive limits and C1/C2 without a dfc limit.
    void validate() const;

    friend bool operator==(const Criterion&, const Criterion&) = default;
};

std::string_view to_string(Criterion::Kind kind) noexcept;
Criterion::Kind parse_criterion_kind(std::string_view name);

/// "C2(20,10)" style label.
std::string label(const Criterion& criterion);

enum class FlagReason { within_ld, near_comment };
enum class Removal { ws_recompute, keyword_only, low_logprob };

std::string_view to_string(FlagReason reason) noexcept;
std::string_view to_string(Removal removal) noexcept;

struct ReportedLine {
    std::size_t line_index = 0;
    int line_no = 0;
    LineFeatures features;
    std::vector<FlagReason> reasons;
    std::optional<Removal> removed_by;

    bool flagged() const noexcept { return !removed_by.has_value(); }
};

/// Candidates in line order; removed entries are kept for auditing.
struct ReportedLines {
    std::vector<ReportedLine> entries;

    std::vector<int> flagged_line_numbers() const;
    std::size_t flagged_count() const;
};

/// Inclusion before false-positive reduction.
bool classify_line(const LineFeatures& features, const Criterion& criterion);

/// The inclusion clauses a line satisfies (empty when it is not included).
std::vector<FlagReason> inclusion_reasons(const LineFeatures& features, const Criterion& criterion);

/// Reason a candidate would be dropped, checked in the order whitespace-only
/// difference, keyword-only original, low mean logprob.
std::optional<Removal> removal_reason(const LineFeatures& features, std::string_view original_code,
                                      const LanguageProfile& language, const Criterion& criterion);

/// Marks removable candidates; never adds lines.
ReportedLines reduce_fp(ReportedLines candidates, const PreprocessedFile& file, const Criterion& criterion);

/// `features[i]` belongs to line start_index + i.
ReportedLines classify_file(const PreprocessedFile& file, std::span<const LineFeatures> features,
                            const Criterion& criterion);

}  // namespace flag
