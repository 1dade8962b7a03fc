#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flag/backend.hpp"
#include "flag/classifier.hpp"
#include "flag/evalharness.hpp"
#include "flag/features.hpp"
#include "flag/srcmodel.hpp"

namespace flag {

/// Generated lines and features for every checkable line from start_index.
struct FileAnalysis {
    PreprocessedFile file;
    std::vector<GeneratedLine> generated;
    std::vector<LineFeatures> features;
};

FileAnalysis analyze_file(PreprocessedFile file, Mode mode, const GenerationParams& params,
                          CompletionBackend& backend, int parallelism = 1);

/// {file, config_fingerprint, criterion, flagged: [...]}; removed candidates
/// carry removed_by.
nlohmann::json check_report_json(const FileAnalysis& analysis, const ReportedLines& reported,
                                 const Criterion& criterion, const std::string& fingerprint);

std::string check_report_text(const FileAnalysis& analysis, const ReportedLines& reported,
                              const Criterion& criterion);

RunRecord make_run_record(const FileAnalysis& analysis, const BenchmarkCase& benchmark,
                          const BackendDescriptor& backend, Mode mode, const GenerationParams& params);

}  // namespace flag
