#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "flag/backend.hpp"
#include "flag/evalharness.hpp"
#include "flag/prompting.hpp"
#include "flag/scripted_mock.hpp"
#include "flag/srcmodel.hpp"

namespace flag::testkit {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(FLAG_FIXTURE_DIR) / name;
}

inline PreprocessedFile get_value_file() {
    return load_source(fixture("get_value.c"), Language::c);
}

inline std::size_t index_of_line(const PreprocessedFile& file, int line_no) {
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        if (file.lines[i].original_line_no == line_no) return i;
    }
    throw std::out_of_range("no such line");
}

struct ScriptedRow {
    int line_no;
    const char* generated;
};

// Lines regenerated in the worked example, keyed by line of get_value.c.
// Anything not listed is echoed back unchanged.
inline constexpr ScriptedRow kWorkedExample[] = {
    {6, "    getValueFromArray(id_sequence, sizeof(id_sequence)/sizeof(int),id_index));"},
    {10, "int getValueFromArray(int* array,int size,int index) {"},
    {11, "//if the index is out of bounds return -1"},
    {12, "    if (index >= 0 && index <size) {"},
    {14, "    } else {"},
    {15, "else {"},
};

inline void script_worked_example(ScriptedMock& mock, const PreprocessedFile& file, Mode mode,
                                  const GenerationParams& params) {
    for (const auto& row : kWorkedExample) {
        mock.script_line(file, index_of_line(file, row.line_no), mode, params, {{row.generated, std::nullopt}});
    }
    mock.echo_original(file, mode, params);
}

struct SyntheticLine {
    std::size_t ld = 0;
    std::optional<std::size_t> dfc;
    std::optional<double> mean_logprob;
    std::string original_code = "x = y;";
    std::optional<std::size_t> ld_no_ws;
};

// Run record whose lines are numbered 1..n with the given features.
inline RunRecord synthetic_run(const std::string& id, std::set<int> defects, const std::vector<SyntheticLine>& lines,
                               std::string group = "synthetic",
                               DefectCategory category = DefectCategory::functional) {
    RunRecord run;
    run.case_id = id;
    run.path = id + ".c";
    run.defect_lines = std::move(defects);
    run.source_group = std::move(group);
    run.category = category;
    run.backend = "mock";
    run.model = "scripted-mock";
    run.file_lines = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        RunLine line;
        line.line_index = i;
        line.line_no = static_cast<int>(i + 1);
        line.original = lines[i].original_code;
        line.original_code = lines[i].original_code;
        line.generated = lines[i].original_code;
        line.features.ld = lines[i].ld;
        line.features.ld_no_ws = lines[i].ld_no_ws.value_or(lines[i].ld);
        line.features.dfc = lines[i].dfc;
        line.features.mean_logprob = lines[i].mean_logprob;
        run.lines.push_back(std::move(line));
    }
    return run;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("flag-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace flag::testkit
