#include "flag/classifier.hpp"

#include <algorithm>

#include "flag/error.hpp"

namespace flag {

Criterion Criterion::c0(long ld_limit) {
    return Criterion{Kind::c0, ld_limit, std::nullopt};
}

Criterion Criterion::c1(long ld_limit, long dfc_limit) {
    return Criterion{Kind::c1, ld_limit, dfc_limit};
}

Criterion Criterion::c2(long ld_limit, long dfc_limit, double logprob_threshold) {
    return Criterion{Kind::c2, ld_limit, dfc_limit, logprob_threshold};
}

void Criterion::validate() const {
    if (ld_limit <= 0) {
        throw ConfigError("ld_limit must be positive");
    }
    if (kind != Kind::c0) {
        if (!dfc_limit) {
            throw ConfigError(std::string(to_string(kind)) + " requires a dfc_limit");
        }
        if (*dfc_limit <= 0) {
            throw ConfigError("dfc_limit must be positive");
        }
    }
}

std::string_view to_string(Criterion::Kind kind) noexcept {
    switch (kind) {
        case Criterion::Kind::c0: return "C0";
        case Criterion::Kind::c1: return "C1";
        case Criterion::Kind::c2: return "C2";
    }
    return "?";
}

Criterion::Kind parse_criterion_kind(std::string_view name) {
    if (name == "C0" || name == "c0") return Criterion::Kind::c0;
    if (name == "C1" || name == "c1") return Criterion::Kind::c1;
    if (name == "C2" || name == "c2") return Criterion::Kind::c2;
    throw ConfigError("unknown criterion '" + std::string(name) + "' (expected C0, C1 or C2)");
}

std::string label(const Criterion& criterion) {
    std::string out(to_string(criterion.kind));
    out += "(" + std::to_string(criterion.ld_limit);
    if (criterion.kind != Criterion::Kind::c0 && criterion.dfc_limit) {
        out += "," + std::to_string(*criterion.dfc_limit);
    }
    return out + ")";
}

std::string_view to_string(FlagReason reason) noexcept {
    switch (reason) {
        case FlagReason::within_ld: return "within_ld";
        case FlagReason::near_comment: return "near_comment";
    }
    return "?";
}

std::string_view to_string(Removal removal) noexcept {
    switch (removal) {
        case Removal::ws_recompute: return "ws_recompute";
        case Removal::keyword_only: return "keyword_only";
        case Removal::low_logprob: return "low_logprob";
    }
    return "?";
}

std::vector<int> ReportedLines::flagged_line_numbers() const {
    std::vector<int> out;
    for (const auto& e : entries) {
        if (e.flagged()) {
            out.push_back(e.line_no);
        }
    }
    return out;
}

std::size_t ReportedLines::flagged_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const ReportedLine& e) { return e.flagged(); }));
}

std::vector<FlagReason> inclusion_reasons(const LineFeatures& features, const Criterion& criterion) {
    std::vector<FlagReason> reasons;
    const auto ld = static_cast<long>(features.ld);
    if (ld <= criterion.ld_lower_bound) {
        return reasons;
    }
    if (ld <= criterion.ld_limit) {
        reasons.push_back(FlagReason::within_ld);
    }
    if (criterion.kind != Criterion::Kind::c0 && criterion.dfc_limit && features.dfc) {
        const auto dfc = static_cast<long>(*features.dfc);
        if (0 < dfc && dfc < *criterion.dfc_limit) {
            reasons.push_back(FlagReason::near_comment);
        }
    }
    return reasons;
}

bool classify_line(const LineFeatures& features, const Criterion& criterion) {
    return !inclusion_reasons(features, criterion).empty();
}

std::optional<Removal> removal_reason(const LineFeatures& features, std::string_view original_code,
                                      const LanguageProfile& language, const Criterion& criterion) {
    if (features.ld_no_ws == 0) {
        return Removal::ws_recompute;
    }
    if (is_keyword_only(original_code, language)) {
        return Removal::keyword_only;
    }
    if (features.mean_logprob && *features.mean_logprob < criterion.logprob_threshold) {
        return Removal::low_logprob;
    }
    return std::nullopt;
}

ReportedLines reduce_fp(ReportedLines candidates, const PreprocessedFile& file, const Criterion& criterion) {
    if (criterion.kind != Criterion::Kind::c2) {
        throw ConfigError("reduce_fp applies to C2 only");
    }
    for (auto& entry : candidates.entries) {
        if (entry.removed_by) {
            continue;
        }
        entry.removed_by =
            removal_reason(entry.features, file.lines.at(entry.line_index).code_part, file.profile(), criterion);
    }
    return candidates;
}

ReportedLines classify_file(const PreprocessedFile& file, std::span<const LineFeatures> features,
                            const Criterion& criterion) {
    const std::size_t first = file.start_index;
    if (features.size() != file.lines.size() - first) {
        throw DataError("feature count does not match the checkable lines of " + file.path);
    }
    ReportedLines out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto reasons = inclusion_reasons(features[i], criterion);
        if (reasons.empty()) {
            continue;
        }
        out.entries.push_back(ReportedLine{first + i, file.lines[first + i].original_line_no, features[i],
                                           std::move(reasons), std::nullopt});
    }
    if (criterion.kind == Criterion::Kind::c2) {
        out = reduce_fp(std::move(out), file, criterion);
    }
    return out;
}

}  // namespace flag
