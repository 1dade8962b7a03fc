#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flag/classifier.hpp"
#include "flag/features.hpp"
#include "flag/prompting.hpp"
#include "flag/srcmodel.hpp"

namespace flag {

enum class DefectCategory { security, functional };

std::string_view to_string(DefectCategory category) noexcept;
DefectCategory parse_category(std::string_view name);

struct BenchmarkCase {
    std::string id;
    std::filesystem::path path;
    Language language = Language::c;
    std::set<int> defect_lines;
    DefectCategory category = DefectCategory::functional;
    std::string source_group;
    std::optional<int> start_line;
};

/// Manifest: a JSON array of case objects with fields id, path, language,
/// defect_lines, category, source_group and optional start_line. Relative
/// paths resolve against the manifest's directory.
std::vector<BenchmarkCase> load_manifest(const std::filesystem::path& manifest);
std::vector<BenchmarkCase> parse_manifest(const nlohmann::json& manifest, const std::filesystem::path& base_dir);

struct RunLine {
    std::size_t line_index = 0;
    int line_no = 0;
    std::string original;
    std::string original_code;
    std::string generated;
    int attempts_used = 1;
    bool from_cache = false;
    std::vector<std::string> notes;
    LineFeatures features;
};

/// One generation pass over one case, persisted as JSON lines: a header object
/// followed by one object per scored line.
struct RunRecord {
    std::string case_id;
    std::string path;
    Language language = Language::c;
    std::set<int> defect_lines;
    DefectCategory category = DefectCategory::functional;
    std::string source_group;
    std::string backend;
    std::string model;
    Mode mode = Mode::auto_complete;
    std::string fingerprint;
    std::string started_at;
    std::string finished_at;
    std::size_t file_lines = 0;
    std::size_t file_comment_lines = 0;
    std::vector<RunLine> lines;
};

nlohmann::json features_to_json(const LineFeatures& features);
LineFeatures features_from_json(const nlohmann::json& j);

void write_run_record(std::ostream& out, const RunRecord& run);
RunRecord read_run_record(std::istream& in, const std::string& source = "<stream>");
void save_run_record(const std::filesystem::path& path, const RunRecord& run);
RunRecord load_run_record(const std::filesystem::path& path);
/// Every *.jsonl file in `directory`, ordered by case id.
std::vector<RunRecord> load_run_directory(const std::filesystem::path& directory);

/// Fills the case fields of a record (defect lines, category, group).
void attach_case(RunRecord& run, const BenchmarkCase& benchmark);
BenchmarkCase case_of(const RunRecord& run);

struct LineRef {
    std::string case_id;
    int line_no = 0;

    auto operator<=>(const LineRef&) const = default;
};

struct EvalMetrics {
    std::size_t dd = 0;
    std::size_t total_defects = 0;
    std::size_t total_lines = 0;
    std::set<LineRef> true_positive_lines;
    std::set<LineRef> false_positive_lines;

    double tpr() const noexcept;
    double fpr() const noexcept;
};

/// Line numbers flagged in a stored run, re-classified from its features.
std::vector<int> flagged_lines(const RunRecord& run, const Criterion& criterion);

/// Case-level score: the defect counts once if any of its lines is flagged;
/// every other flagged line is a false positive over the lines scored.
EvalMetrics score_run(const RunRecord& run, const BenchmarkCase& benchmark, const Criterion& criterion);
EvalMetrics score_flagged(const RunRecord& run, const BenchmarkCase& benchmark, std::span<const int> flagged);

/// Pools defects, detections, false positives and line counts.
EvalMetrics aggregate(std::span<const EvalMetrics> metrics);

enum class Grouping { source_group, category, all };

struct ScoredCase {
    const BenchmarkCase* benchmark = nullptr;
    EvalMetrics metrics;
};

std::map<std::string, EvalMetrics> aggregate_by(std::span<const ScoredCase> scored, Grouping grouping);

/// Each run paired with the case of the same id (from `cases` when given,
/// otherwise from the run itself).
std::vector<std::pair<const RunRecord*, BenchmarkCase>> pair_runs(std::span<const RunRecord> runs,
                                                                  std::span<const BenchmarkCase> cases);

struct SweepCell {
    long ld_limit = 0;
    long dfc_limit = 0;
    EvalMetrics metrics;
};

/// Re-scores stored runs for every (ld_limit, dfc_limit) pair, ld-major.
std::vector<SweepCell> sweep(std::span<const RunRecord> runs, std::span<const BenchmarkCase> cases,
                             std::span<const long> ld_limits, std::span<const long> dfc_limits, Criterion::Kind kind,
                             double logprob_threshold = -0.5);

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells);

struct RocPoint {
    std::string threshold;
    double fpr = 0.0;
    double tpr = 0.0;
};

/**
 * Pooled (fpr, tpr) per ld_limit threshold under `base` (whose ld_limit is
 * replaced). With `all_lines_sentinel` a final point flags every line by
 * lowering the ld bound to -1 and raising the limit to 1000.
 */
std::vector<RocPoint> roc_points(std::span<const RunRecord> runs, std::span<const BenchmarkCase> cases,
                                 std::span<const long> thresholds, const Criterion& base, bool all_lines_sentinel);

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points);

struct BenchmarkMetadata {
    std::string case_id;
    std::optional<bool> detected;
    double average_ld = 0.0;
    std::optional<double> average_dfc;
    std::optional<double> average_bleu;
    std::optional<double> average_logprob;
    std::size_t comment_count = 0;
    std::size_t line_count = 0;
};

/// Averages over the scored lines; comment and line counts cover the whole
/// preprocessed file.
BenchmarkMetadata benchmark_metadata(const RunRecord& run, const PreprocessedFile& file);
BenchmarkMetadata benchmark_metadata(const RunRecord& run);

void write_metadata_csv(std::ostream& out, std::span<const BenchmarkMetadata> rows);

struct MetricsRow {
    std::string group;
    std::string criterion;
    EvalMetrics metrics;
};

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_metrics_table(std::ostream& out, std::span<const MetricsRow> rows);
nlohmann::json metrics_to_json(std::span<const MetricsRow> rows);

/// Formats a rate with three decimals, as in the result tables.
std::string format_rate(double value);

}  // namespace flag
