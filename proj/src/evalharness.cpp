#include "flag/evalharness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "flag/error.hpp"

namespace flag {

using nlohmann::json;

std::string_view to_string(DefectCategory category) noexcept {
    return category == DefectCategory::security ? "security" : "functional";
}

DefectCategory parse_category(std::string_view name) {
    if (name == "security") return DefectCategory::security;
    if (name == "functional") return DefectCategory::functional;
    throw DataError("unknown defect category '" + std::string(name) + "'");
}

std::vector<BenchmarkCase> parse_manifest(const json& manifest, const std::filesystem::path& base_dir) {
    if (!manifest.is_array()) {
        throw DataError("manifest must be a JSON array of cases");
    }
    std::vector<BenchmarkCase> cases;
    std::set<std::string> seen;
    for (const auto& entry : manifest) {
        try {
            BenchmarkCase c;
            c.id = entry.at("id").get<std::string>();
            c.path = entry.at("path").get<std::string>();
            if (c.path.is_relative()) {
                c.path = base_dir / c.path;
            }
            if (entry.contains("language")) {
                c.language = parse_language(entry["language"].get<std::string>());
            } else if (auto lang = language_from_extension(c.path)) {
                c.language = *lang;
            } else {
                throw DataError("case " + c.id + ": cannot infer language of " + c.path.string());
            }
            for (int line : entry.at("defect_lines").get<std::vector<int>>()) {
                if (line < 1) {
                    throw DataError("case " + c.id + ": defect line numbers are 1-based");
                }
                c.defect_lines.insert(line);
            }
            if (c.defect_lines.empty()) {
                throw DataError("case " + c.id + ": defect_lines must not be empty");
            }
            c.category = parse_category(entry.value("category", "functional"));
            c.source_group = entry.value("source_group", "");
            if (entry.contains("start_line") && !entry["start_line"].is_null()) {
                c.start_line = entry["start_line"].get<int>();
            }
            if (!seen.insert(c.id).second) {
                throw DataError("duplicate case id " + c.id);
            }
            cases.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed manifest entry: ") + e.what());
        } catch (const SourceError& e) {
            throw DataError(e.what());
        } catch (const ConfigError& e) {
            throw DataError(e.what());
        }
    }
    return cases;
}

std::vector<BenchmarkCase> load_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) {
        throw DataError(manifest.string() + ": cannot open manifest");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(manifest.string() + ": " + e.what());
    }
    return parse_manifest(j, manifest.parent_path());
}

namespace {

template <typename T>
json optional_json(const std::optional<T>& value) {
    return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) {
        return std::nullopt;
    }
    return j[key].get<T>();
}

}  // namespace

json features_to_json(const LineFeatures& f) {
    json j{{"ld", f.ld},
           {"ld_no_ws", f.ld_no_ws},
           {"bleu1", optional_json(f.bleu1)},
           {"dfc", optional_json(f.dfc)},
           {"mean_logprob", optional_json(f.mean_logprob)},
           {"prev_comment_bleu1", optional_json(f.prev_comment_bleu1)}};
    j["bleu_cumulative"] = f.bleu_cumulative ? json(*f.bleu_cumulative) : json(nullptr);
    return j;
}

LineFeatures features_from_json(const json& j) {
    LineFeatures f;
    f.ld = j.at("ld").get<std::size_t>();
    f.ld_no_ws = j.at("ld_no_ws").get<std::size_t>();
    f.bleu1 = optional_from<double>(j, "bleu1");
    f.bleu_cumulative = optional_from<std::array<double, 4>>(j, "bleu_cumulative");
    f.dfc = optional_from<std::size_t>(j, "dfc");
    f.mean_logprob = optional_from<double>(j, "mean_logprob");
    f.prev_comment_bleu1 = optional_from<double>(j, "prev_comment_bleu1");
    return f;
}

void write_run_record(std::ostream& out, const RunRecord& run) {
    json header{{"record", "header"},
                {"case_id", run.case_id},
                {"path", run.path},
                {"language", std::string(to_string(run.language))},
                {"defect_lines", run.defect_lines},
                {"category", std::string(to_string(run.category))},
                {"source_group", run.source_group},
                {"backend", run.backend},
                {"model", run.model},
                {"mode", std::string(to_string(run.mode))},
                {"fingerprint", run.fingerprint},
                {"started_at", run.started_at},
                {"finished_at", run.finished_at},
                {"file_lines", run.file_lines},
                {"file_comment_lines", run.file_comment_lines}};
    out << header.dump() << '\n';
    for (const auto& line : run.lines) {
        json j{{"record", "line"},
               {"line_index", line.line_index},
               {"line_no", line.line_no},
               {"original", line.original},
               {"original_code", line.original_code},
               {"generated", line.generated},
               {"attempts_used", line.attempts_used},
               {"from_cache", line.from_cache},
               {"notes", line.notes},
               {"features", features_to_json(line.features)}};
        out << j.dump() << '\n';
    }
}

RunRecord read_run_record(std::istream& in, const std::string& source) {
    RunRecord run;
    std::string text;
    std::size_t line_no = 0;
    bool have_header = false;
    try {
        while (std::getline(in, text)) {
            ++line_no;
            if (text.empty()) {
                continue;
            }
            const auto j = json::parse(text);
            const auto kind = j.at("record").get<std::string>();
            if (kind == "header") {
                run.case_id = j.at("case_id").get<std::string>();
                run.path = j.value("path", "");
                run.language = parse_language(j.at("language").get<std::string>());
                run.defect_lines = j.value("defect_lines", std::set<int>{});
                run.category = parse_category(j.value("category", "functional"));
                run.source_group = j.value("source_group", "");
                run.backend = j.value("backend", "");
                run.model = j.value("model", "");
                run.mode = parse_mode(j.value("mode", "auto"));
                run.fingerprint = j.value("fingerprint", "");
                run.started_at = j.value("started_at", "");
                run.finished_at = j.value("finished_at", "");
                run.file_lines = j.value("file_lines", std::size_t{0});
                run.file_comment_lines = j.value("file_comment_lines", std::size_t{0});
                have_header = true;
            } else if (kind == "line") {
                if (!have_header) {
                    throw DataError("line record before header");
                }
                RunLine line;
                line.line_index = j.at("line_index").get<std::size_t>();
                line.line_no = j.at("line_no").get<int>();
                line.original = j.at("original").get<std::string>();
                line.original_code = j.value("original_code", "");
                line.generated = j.at("generated").get<std::string>();
                line.attempts_used = j.value("attempts_used", 1);
                line.from_cache = j.value("from_cache", false);
                line.notes = j.value("notes", std::vector<std::string>{});
                line.features = features_from_json(j.at("features"));
                run.lines.push_back(std::move(line));
            } else {
                throw DataError("unknown record type '" + kind + "'");
            }
        }
    } catch (const json::exception& e) {
        throw DataError(source + ":" + std::to_string(line_no) + ": corrupt run record: " + e.what());
    } catch (const Error& e) {
        throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
        throw DataError(source + ": run record has no header");
    }
    return run;
}

void save_run_record(const std::filesystem::path& path, const RunRecord& run) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError(path.string() + ": cannot write run record");
    }
    write_run_record(out, run);
}

RunRecord load_run_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(path.string() + ": cannot open run record");
    }
    return read_run_record(in, path.string());
}

std::vector<RunRecord> load_run_directory(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory)) {
        throw DataError(directory.string() + ": run directory not found");
    }
    std::vector<RunRecord> runs;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            runs.push_back(load_run_record(entry.path()));
        }
    }
    if (runs.empty()) {
        throw DataError(directory.string() + ": no run records (*.jsonl)");
    }
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.case_id < b.case_id; });
    return runs;
}

void attach_case(RunRecord& run, const BenchmarkCase& benchmark) {
    run.case_id = benchmark.id;
    run.defect_lines = benchmark.defect_lines;
    run.category = benchmark.category;
    run.source_group = benchmark.source_group;
}

BenchmarkCase case_of(const RunRecord& run) {
    BenchmarkCase c;
    c.id = run.case_id;
    c.path = run.path;
    c.language = run.language;
    c.defect_lines = run.defect_lines;
    c.category = run.category;
    c.source_group = run.source_group;
    return c;
}

double EvalMetrics::tpr() const noexcept {
    return total_defects == 0 ? 0.0 : static_cast<double>(dd) / static_cast<double>(total_defects);
}

double EvalMetrics::fpr() const noexcept {
    return total_lines == 0 ? 0.0
                            : static_cast<double>(false_positive_lines.size()) / static_cast<double>(total_lines);
}

std::vector<int> flagged_lines(const RunRecord& run, const Criterion& criterion) {
    const auto& language = profile(run.language);
    std::vector<int> out;
    for (const auto& line : run.lines) {
        if (!classify_line(line.features, criterion)) {
            continue;
        }
        if (criterion.kind == Criterion::Kind::c2 &&
            removal_reason(line.features, line.original_code, language, criterion)) {
            continue;
        }
        out.push_back(line.line_no);
    }
    return out;
}

EvalMetrics score_flagged(const RunRecord& run, const BenchmarkCase& benchmark, std::span<const int> flagged) {
    if (run.case_id != benchmark.id) {
        throw DataError("run for case '" + run.case_id + "' scored against case '" + benchmark.id + "'");
    }
    EvalMetrics m;
    m.total_defects = 1;
    m.total_lines = run.lines.size();
    for (int line_no : flagged) {
        if (benchmark.defect_lines.contains(line_no)) {
            m.true_positive_lines.insert(LineRef{benchmark.id, line_no});
        } else {
            m.false_positive_lines.insert(LineRef{benchmark.id, line_no});
        }
    }
    m.dd = m.true_positive_lines.empty() ? 0 : 1;
    return m;
}

EvalMetrics score_run(const RunRecord& run, const BenchmarkCase& benchmark, const Criterion& criterion) {
    const auto flagged = flagged_lines(run, criterion);
    return score_flagged(run, benchmark, flagged);
}

EvalMetrics aggregate(std::span<const EvalMetrics> metrics) {
    if (metrics.empty()) {
        throw DataError("cannot aggregate an empty group");
    }
    EvalMetrics total;
    for (const auto& m : metrics) {
        total.dd += m.dd;
        total.total_defects += m.total_defects;
        total.total_lines += m.total_lines;
        total.true_positive_lines.insert(m.true_positive_lines.begin(), m.true_positive_lines.end());
        total.false_positive_lines.insert(m.false_positive_lines.begin(), m.false_positive_lines.end());
    }
    return total;
}

std::map<std::string, EvalMetrics> aggregate_by(std::span<const ScoredCase> scored, Grouping grouping) {
    std::map<std::string, std::vector<EvalMetrics>> groups;
    for (const auto& s : scored) {
        std::string key;
        switch (grouping) {
            case Grouping::source_group: key = s.benchmark->source_group; break;
            case Grouping::category: key = std::string(to_string(s.benchmark->category)); break;
            case Grouping::all: key = "all"; break;
        }
        groups[key].push_back(s.metrics);
    }
    std::map<std::string, EvalMetrics> out;
    for (const auto& [key, list] : groups) {
        out.emplace(key, aggregate(list));
    }
    return out;
}

std::vector<std::pair<const RunRecord*, BenchmarkCase>> pair_runs(std::span<const RunRecord> runs,
                                                                  std::span<const BenchmarkCase> cases) {
    std::unordered_map<std::string, const BenchmarkCase*> by_id;
    for (const auto& c : cases) {
        by_id.emplace(c.id, &c);
    }
    std::vector<std::pair<const RunRecord*, BenchmarkCase>> out;
    out.reserve(runs.size());
    for (const auto& run : runs) {
        if (cases.empty()) {
            out.emplace_back(&run, case_of(run));
            continue;
        }
        const auto it = by_id.find(run.case_id);
        if (it == by_id.end()) {
            throw DataError("no manifest case for run '" + run.case_id + "'");
        }
        out.emplace_back(&run, *it->second);
    }
    return out;
}

namespace {

// Scores every paired run under `criterion` and pools the result.
EvalMetrics pooled_score(const std::vector<std::pair<const RunRecord*, BenchmarkCase>>& pairs,
                         const Criterion& criterion) {
    std::vector<EvalMetrics> per_case;
    per_case.reserve(pairs.size());
    for (const auto& [run, benchmark] : pairs) {
        per_case.push_back(score_run(*run, benchmark, criterion));
    }
    return aggregate(per_case);
}

}  // namespace

std::vector<SweepCell> sweep(std::span<const RunRecord> runs, std::span<const BenchmarkCase> cases,
                             std::span<const long> ld_limits, std::span<const long> dfc_limits, Criterion::Kind kind,
                             double logprob_threshold) {
    if (ld_limits.empty() || dfc_limits.empty()) {
        throw ConfigError("sweep ranges must not be empty");
    }
    const auto pairs = pair_runs(runs, cases);
    if (pairs.empty()) {
        throw DataError("sweep needs at least one run");
    }
    std::vector<SweepCell> cells;
    cells.reserve(ld_limits.size() * dfc_limits.size());
    for (long ld : ld_limits) {
        for (long dfc : dfc_limits) {
            Criterion c{kind, ld, dfc, logprob_threshold};
            cells.push_back(SweepCell{ld, dfc, pooled_score(pairs, c)});
        }
    }
    return cells;
}

std::string format_rate(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", value);
    return buf;
}

namespace {

std::string full_precision(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells) {
    out << "ld_limit,dfc_limit,dd,fpr,tpr\n";
    for (const auto& cell : cells) {
        out << cell.ld_limit << ',' << cell.dfc_limit << ',' << cell.metrics.dd << ','
            << full_precision(cell.metrics.fpr()) << ',' << full_precision(cell.metrics.tpr()) << '\n';
    }
}

std::vector<RocPoint> roc_points(std::span<const RunRecord> runs, std::span<const BenchmarkCase> cases,
                                 std::span<const long> thresholds, const Criterion& base, bool all_lines_sentinel) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw ConfigError("ROC thresholds must be sorted ascending");
    }
    const auto pairs = pair_runs(runs, cases);
    if (pairs.empty()) {
        throw DataError("ROC needs at least one run");
    }
    std::vector<RocPoint> points;
    for (long threshold : thresholds) {
        Criterion c = base;
        c.ld_limit = threshold;
        const auto m = pooled_score(pairs, c);
        points.push_back(RocPoint{std::to_string(threshold), m.fpr(), m.tpr()});
    }
    if (all_lines_sentinel) {
        Criterion c = Criterion::c0(1000);
        c.ld_lower_bound = -1;
        const auto m = pooled_score(pairs, c);
        points.push_back(RocPoint{"all", m.fpr(), m.tpr()});
    }
    return points;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points) {
    out << "threshold,fpr,tpr\n";
    for (const auto& p : points) {
        out << p.threshold << ',' << full_precision(p.fpr) << ',' << full_precision(p.tpr) << '\n';
    }
}

namespace {

struct Mean {
    double sum = 0.0;
    std::size_t count = 0;

    void add(double v) {
        sum += v;
        ++count;
    }
    std::optional<double> value() const {
        return count == 0 ? std::nullopt : std::optional<double>(sum / static_cast<double>(count));
    }
};

BenchmarkMetadata line_averages(const RunRecord& run) {
    Mean ld, dfc, bleu, logprob;
    for (const auto& line : run.lines) {
        ld.add(static_cast<double>(line.features.ld));
        if (line.features.dfc) dfc.add(static_cast<double>(*line.features.dfc));
        if (line.features.bleu1) bleu.add(*line.features.bleu1);
        if (line.features.mean_logprob) logprob.add(*line.features.mean_logprob);
    }
    BenchmarkMetadata m;
    m.case_id = run.case_id;
    m.average_ld = ld.value().value_or(0.0);
    m.average_dfc = dfc.value();
    m.average_bleu = bleu.value();
    m.average_logprob = logprob.value();
    return m;
}

}  // namespace

BenchmarkMetadata benchmark_metadata(const RunRecord& run, const PreprocessedFile& file) {
    auto m = line_averages(run);
    m.line_count = file.lines.size();
    m.comment_count = static_cast<std::size_t>(
        std::count_if(file.lines.begin(), file.lines.end(), [](const SourceLine& l) { return l.has_comment(); }));
    return m;
}

BenchmarkMetadata benchmark_metadata(const RunRecord& run) {
    auto m = line_averages(run);
    m.line_count = run.file_lines;
    m.comment_count = run.file_comment_lines;
    return m;
}

namespace {

template <typename T>
std::string csv_optional(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_same_v<T, double>) {
        return full_precision(*v);
    } else {
        return std::to_string(*v);
    }
}

}  // namespace

void write_metadata_csv(std::ostream& out, std::span<const BenchmarkMetadata> rows) {
    out << "case_id,detected,average_ld,average_dfc,average_bleu,average_logprob,comment_count,line_count\n";
    for (const auto& r : rows) {
        out << r.case_id << ',' << (r.detected ? (*r.detected ? "1" : "0") : "") << ','
            << full_precision(r.average_ld) << ',' << csv_optional(r.average_dfc) << ','
            << csv_optional(r.average_bleu) << ',' << csv_optional(r.average_logprob) << ',' << r.comment_count
            << ',' << r.line_count << '\n';
    }
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
    out << "group,criterion,defects,dd,fpr,tpr,false_positives,total_lines\n";
    for (const auto& r : rows) {
        out << r.group << ',' << r.criterion << ',' << r.metrics.total_defects << ',' << r.metrics.dd << ','
            << format_rate(r.metrics.fpr()) << ',' << format_rate(r.metrics.tpr()) << ','
            << r.metrics.false_positive_lines.size() << ',' << r.metrics.total_lines << '\n';
    }
}

void write_metrics_table(std::ostream& out, std::span<const MetricsRow> rows) {
    std::size_t group_width = 5;
    std::size_t criterion_width = 9;
    for (const auto& r : rows) {
        group_width = std::max(group_width, r.group.size());
        criterion_width = std::max(criterion_width, r.criterion.size());
    }
    out << std::left << std::setw(static_cast<int>(group_width)) << "group" << "  "
        << std::setw(static_cast<int>(criterion_width)) << "criterion" << std::right << "  " << std::setw(7)
        << "defects" << "  " << std::setw(4) << "DD" << "  " << std::setw(5) << "FPR" << "  " << std::setw(5)
        << "TPR" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(group_width)) << r.group << "  "
            << std::setw(static_cast<int>(criterion_width)) << r.criterion << std::right << "  " << std::setw(7)
            << r.metrics.total_defects << "  " << std::setw(4) << r.metrics.dd << "  " << std::setw(5)
            << format_rate(r.metrics.fpr()) << "  " << std::setw(5) << format_rate(r.metrics.tpr()) << '\n';
    }
}

json metrics_to_json(std::span<const MetricsRow> rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"group", r.group},
                       {"criterion", r.criterion},
                       {"defects", r.metrics.total_defects},
                       {"dd", r.metrics.dd},
                       {"fpr", r.metrics.fpr()},
                       {"tpr", r.metrics.tpr()},
                       {"false_positives", r.metrics.false_positive_lines.size()},
                       {"total_lines", r.metrics.total_lines}});
    }
    return out;
}

}  // namespace flag
