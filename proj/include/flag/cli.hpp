#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flag/backend.hpp"
#include "flag/classifier.hpp"
#include "flag/prompting.hpp"

namespace flag::cli {

enum class OutputFormat { text, json };

/// Everything a command needs to run. Sources are layered: defaults, then the
/// environment, then a JSON config file, then command-line flags.
struct RunConfig {
    BackendDescriptor backend{BackendDescriptor::Kind::http_openai_compatible, "gpt-3.5-turbo-instruct",
                              std::string("https://api.openai.com/v1")};
    std::string api_key;
    Mode mode = Mode::auto_complete;
    GenerationParams params;
    Criterion criterion = Criterion::c2(20, 10);
    long c0_ld_limit = 10;
    int parallelism = 1;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> mock_script;
    OutputFormat output = OutputFormat::text;
    int http_retries = 5;
    int timeout_seconds = 60;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Applies FLAG_API_KEY, FLAG_ENDPOINT and FLAG_MODEL when set.
void apply_environment(RunConfig& config);

/// Applies recognised keys of a JSON config object; unknown keys are errors.
void apply_config_json(RunConfig& config, const nlohmann::json& j);

/// Builds the backend for one file. `file_keys` select the mock script entry
/// (case id, path, file name).
std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config, const PreprocessedFile& file,
                                                const std::vector<std::string>& file_keys);

/// Parses "a:b" or "a:b:step" (inclusive) or a comma list.
std::vector<long> parse_range(const std::string& text);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace flag::cli
