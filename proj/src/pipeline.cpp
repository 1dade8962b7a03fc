#include "flag/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "flag/replay_cache.hpp"

namespace flag {

FileAnalysis analyze_file(PreprocessedFile file, Mode mode, const GenerationParams& params,
                          CompletionBackend& backend, int parallelism) {
    params.validate();
    check_capabilities(backend.descriptor(), mode);
    FileAnalysis analysis;
    analysis.generated = generate_lines(file, mode, params, backend, parallelism);
    analysis.features = extract_file_features(file, analysis.generated);
    analysis.file = std::move(file);
    return analysis;
}

nlohmann::json check_report_json(const FileAnalysis& analysis, const ReportedLines& reported,
                                 const Criterion& criterion, const std::string& fingerprint) {
    nlohmann::json flagged = nlohmann::json::array();
    const std::size_t first = analysis.file.start_index;
    for (const auto& entry : reported.entries) {
        nlohmann::json reasons = nlohmann::json::array();
        for (auto r : entry.reasons) {
            reasons.push_back(std::string(to_string(r)));
        }
        nlohmann::json item{{"line_no", entry.line_no},
                            {"original", analysis.file.lines[entry.line_index].raw},
                            {"generated", analysis.generated[entry.line_index - first].text},
                            {"features", features_to_json(entry.features)},
                            {"reasons", reasons}};
        if (entry.removed_by) {
            item["removed_by"] = std::string(to_string(*entry.removed_by));
        }
        flagged.push_back(std::move(item));
    }
    return nlohmann::json{{"file", analysis.file.path},
                          {"config_fingerprint", fingerprint},
                          {"criterion", label(criterion)},
                          {"flagged", flagged}};
}

std::string check_report_text(const FileAnalysis& analysis, const ReportedLines& reported,
                              const Criterion& criterion) {
    std::ostringstream out;
    const std::size_t first = analysis.file.start_index;
    const auto flagged = reported.flagged_count();
    out << analysis.file.path << ": " << flagged << " of " << analysis.generated.size() << " lines flagged under "
        << label(criterion);
    const auto removed = reported.entries.size() - flagged;
    if (removed > 0) {
        out << " (" << removed << " removed as likely false positives)";
    }
    out << '\n';
    for (const auto& entry : reported.entries) {
        if (!entry.flagged()) {
            continue;
        }
        const auto& f = entry.features;
        out << analysis.file.path << ':' << entry.line_no << ": ld=" << f.ld;
        out << " dfc=" << (f.dfc ? std::to_string(*f.dfc) : "-");
        if (f.mean_logprob) {
            out << " logprob=" << format_rate(*f.mean_logprob);
        }
        out << " [";
        for (std::size_t i = 0; i < entry.reasons.size(); ++i) {
            out << (i ? "," : "") << to_string(entry.reasons[i]);
        }
        out << "]\n";
        out << "    original:  " << analysis.file.lines[entry.line_index].raw << '\n';
        out << "    generated: " << analysis.generated[entry.line_index - first].text << '\n';
    }
    return out.str();
}

RunRecord make_run_record(const FileAnalysis& analysis, const BenchmarkCase& benchmark,
                          const BackendDescriptor& backend, Mode mode, const GenerationParams& params) {
    RunRecord run;
    attach_case(run, benchmark);
    run.path = analysis.file.path;
    run.language = analysis.file.language;
    run.backend = std::string(to_string(backend.kind));
    run.model = backend.model_name;
    run.mode = mode;
    run.fingerprint = config_fingerprint(backend, mode, params);
    run.file_lines = analysis.file.lines.size();
    run.file_comment_lines = static_cast<std::size_t>(std::count_if(
        analysis.file.lines.begin(), analysis.file.lines.end(), [](const SourceLine& l) { return l.has_comment(); }));
    const std::size_t first = analysis.file.start_index;
    run.lines.reserve(analysis.generated.size());
    for (std::size_t i = 0; i < analysis.generated.size(); ++i) {
        const auto& src = analysis.file.lines[first + i];
        const auto& gen = analysis.generated[i];
        run.lines.push_back(RunLine{first + i, src.original_line_no, src.raw, src.code_part, gen.text,
                                    gen.attempts_used, gen.from_cache, gen.errors_noted, analysis.features[i]});
    }
    return run;
}

}  // namespace flag
