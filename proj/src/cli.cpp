#include "flag/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "flag/error.hpp"
#include "flag/evalharness.hpp"
#include "flag/http_backend.hpp"
#include "flag/pipeline.hpp"
#include "flag/replay_cache.hpp"
#include "flag/scripted_mock.hpp"

namespace flag::cli {

using nlohmann::json;

namespace {

BackendDescriptor::Kind parse_backend_kind(const std::string& name) {
    if (name == "http") return BackendDescriptor::Kind::http_openai_compatible;
    if (name == "mock") return BackendDescriptor::Kind::scripted_mock;
    if (name == "replay") return BackendDescriptor::Kind::replay_cache;
    throw ConfigError("unknown backend '" + name + "' (expected http, mock or replay)");
}

OutputFormat parse_output(const std::string& name) {
    if (name == "text") return OutputFormat::text;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("unknown output format '" + name + "' (expected text or json)");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
    if (!out) {
        throw DataError(path.string() + ": cannot write");
    }
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    criterion.validate();
    if (c0_ld_limit <= 0) throw ConfigError("C0 ld limit must be positive");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (backend.kind == BackendDescriptor::Kind::replay_cache && !cache_dir) {
        throw ConfigError("the replay backend needs --cache-dir");
    }
    if (backend.kind == BackendDescriptor::Kind::http_openai_compatible && (!backend.endpoint || backend.endpoint->empty())) {
        throw ConfigError("the http backend needs --endpoint");
    }
    check_capabilities(backend, mode);
}

void apply_environment(RunConfig& config) {
    if (const char* key = std::getenv("FLAG_API_KEY")) config.api_key = key;
    if (const char* endpoint = std::getenv("FLAG_ENDPOINT")) config.backend.endpoint = endpoint;
    if (const char* model = std::getenv("FLAG_MODEL")) config.backend.model_name = model;
}

void apply_config_json(RunConfig& config, const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config file must hold a JSON object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "backend") config.backend.kind = parse_backend_kind(value.get<std::string>());
            else if (key == "model") config.backend.model_name = value.get<std::string>();
            else if (key == "endpoint") config.backend.endpoint = value.get<std::string>();
            else if (key == "mode") config.mode = parse_mode(value.get<std::string>());
            else if (key == "criterion") config.criterion.kind = parse_criterion_kind(value.get<std::string>());
            else if (key == "ld_limit") config.criterion.ld_limit = value.get<long>();
            else if (key == "dfc_limit") config.criterion.dfc_limit = value.get<long>();
            else if (key == "logprob_threshold") config.criterion.logprob_threshold = value.get<double>();
            else if (key == "c0_ld_limit") config.c0_ld_limit = value.get<long>();
            else if (key == "assist_chars") config.params.assist_chars = value.get<int>();
            else if (key == "max_attempts") config.params.max_attempts = value.get<int>();
            else if (key == "temperature") config.params.temperature = value.get<double>();
            else if (key == "max_tokens") config.params.max_tokens = value.get<int>();
            else if (key == "top_p") config.params.top_p = value.get<double>();
            else if (key == "max_prefix_lines") config.params.max_prefix_lines = value.get<int>();
            else if (key == "max_suffix_lines") config.params.max_suffix_lines = value.get<int>();
            else if (key == "cache_dir") config.cache_dir = value.get<std::string>();
            else if (key == "mock_script") config.mock_script = value.get<std::string>();
            else if (key == "parallelism") config.parallelism = value.get<int>();
            else if (key == "output") config.output = parse_output(value.get<std::string>());
            else if (key == "supports_logprobs") config.backend.supports_logprobs = value.get<bool>();
            else if (key == "supports_suffix") config.backend.supports_suffix = value.get<bool>();
            else if (key == "supports_system_prompt") config.backend.supports_system_prompt = value.get<bool>();
            else if (key == "http_retries") config.http_retries = value.get<int>();
            else if (key == "timeout") config.timeout_seconds = value.get<int>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

namespace {

std::vector<ScriptedResponse> parse_script_sequence(const json& value) {
    std::vector<ScriptedResponse> out;
    const json list = value.is_array() ? value : json::array({value});
    for (const auto& item : list) {
        if (item.is_string()) {
            out.push_back(ScriptedResponse{item.get<std::string>(), std::nullopt});
        } else {
            ScriptedResponse r{item.at("text").get<std::string>(), std::nullopt};
            if (item.contains("logprobs")) {
                r.token_logprobs = item["logprobs"].get<std::vector<double>>();
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

// Script format: {"default": "echo" | "none", "files": {"<key>": {"<line_no>": responses}}}
// where responses is a string, an object {text, logprobs} or a list of those.
std::unique_ptr<ScriptedMock> make_mock(const RunConfig& config, const PreprocessedFile& file,
                                        const std::vector<std::string>& file_keys) {
    BackendDescriptor descriptor = config.backend;
    descriptor.kind = BackendDescriptor::Kind::scripted_mock;
    if (descriptor.model_name.empty()) {
        descriptor.model_name = "scripted-mock";
    }
    auto mock = std::make_unique<ScriptedMock>(descriptor);
    bool echo = true;
    if (config.mock_script) {
        const json script = read_json_file(*config.mock_script);
        try {
            echo = script.value("default", std::string("echo")) == "echo";
            const json files = script.value("files", json::object());
            const json* entry = nullptr;
            for (const auto& key : file_keys) {
                if (files.contains(key)) {
                    entry = &files[key];
                    break;
                }
            }
            if (!entry && files.contains("*")) {
                entry = &files["*"];
            }
            if (entry) {
                for (const auto& [line_key, value] : entry->items()) {
                    const int line_no = std::stoi(line_key);
                    const auto it = std::find_if(file.lines.begin(), file.lines.end(),
                                                 [&](const SourceLine& l) { return l.original_line_no == line_no; });
                    if (it == file.lines.end() ||
                        static_cast<std::size_t>(it - file.lines.begin()) < file.start_index) {
                        throw ConfigError("mock script: line " + line_key + " is not a checked line of " + file.path);
                    }
                    mock->script_line(file, static_cast<std::size_t>(it - file.lines.begin()), config.mode,
                                      config.params, parse_script_sequence(value));
                }
            }
        } catch (const json::exception& e) {
            throw ConfigError(config.mock_script->string() + ": " + e.what());
        } catch (const std::invalid_argument&) {
            throw ConfigError(config.mock_script->string() + ": line keys must be integers");
        }
    }
    if (echo) {
        mock->echo_original(file, config.mode, config.params);
    }
    return mock;
}

}  // namespace

std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config, const PreprocessedFile& file,
                                                const std::vector<std::string>& file_keys) {
    std::unique_ptr<CompletionBackend> upstream;
    switch (config.backend.kind) {
        case BackendDescriptor::Kind::scripted_mock:
            upstream = make_mock(config, file, file_keys);
            break;
        case BackendDescriptor::Kind::http_openai_compatible: {
            HttpBackendOptions options;
            options.endpoint = config.backend.endpoint.value_or("");
            options.model = config.backend.model_name;
            options.api_key = config.api_key;
            options.supports_suffix = config.backend.supports_suffix;
            options.supports_logprobs = config.backend.supports_logprobs;
            options.supports_system_prompt = config.backend.supports_system_prompt;
            options.max_retries = config.http_retries;
            options.timeout = std::chrono::seconds(config.timeout_seconds);
            upstream = std::make_unique<HttpBackend>(options);
            break;
        }
        case BackendDescriptor::Kind::replay_cache:
            return std::make_unique<CachingBackend>(std::make_shared<ReplayCache>(*config.cache_dir), config.backend);
    }
    if (config.cache_dir) {
        return std::make_unique<CachingBackend>(std::make_shared<ReplayCache>(*config.cache_dir), std::move(upstream));
    }
    return upstream;
}

std::vector<long> parse_range(const std::string& text) {
    std::vector<long> out;
    try {
        if (text.find(',') != std::string::npos || text.find(':') == std::string::npos) {
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) out.push_back(std::stol(item));
            }
        } else {
            std::vector<long> parts;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ':')) {
                parts.push_back(std::stol(item));
            }
            if (parts.size() < 2 || parts.size() > 3) throw ConfigError("bad range '" + text + "'");
            const long step = parts.size() == 3 ? parts[2] : 1;
            if (step <= 0 || parts[1] < parts[0]) throw ConfigError("bad range '" + text + "'");
            for (long v = parts[0]; v <= parts[1]; v += step) out.push_back(v);
        }
    } catch (const std::logic_error&) {
        throw ConfigError("bad range '" + text + "'");
    }
    if (out.empty()) {
        throw ConfigError("empty range '" + text + "'");
    }
    return out;
}

namespace {

/// Raw flag values; applied over the layered config only when given.
struct Flags {
    std::string config_file;
    std::string backend, model, endpoint, mode, criterion, output;
    long ld_limit = 0, dfc_limit = 0, c0_ld_limit = 0;
    double logprob_threshold = 0, temperature = 0, top_p = 0;
    int assist_chars = 0, max_attempts = 0, max_tokens = 0, parallelism = 0, http_retries = 0, timeout = 0;
    int max_prefix_lines = 0, max_suffix_lines = 0;
    std::string cache_dir, mock_script;
    bool no_logprobs = false, no_suffix = false, no_system_prompt = false;

    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

    template <typename T, typename Apply>
    void add(CLI::App& app, const std::string& name, T& target, const std::string& help, Apply apply) {
        auto* opt = app.add_option(name, target, help);
        setters.emplace_back(opt, [&target, apply](RunConfig& c) { apply(c, target); });
    }

    void add_flag(CLI::App& app, const std::string& name, bool& target, const std::string& help,
                  std::function<void(RunConfig&)> apply) {
        auto* opt = app.add_flag(name, target, help);
        setters.emplace_back(opt, std::move(apply));
    }

    void register_generation(CLI::App& app) {
        add(app, "--backend", backend, "http, mock or replay",
            [](RunConfig& c, const std::string& v) { c.backend.kind = parse_backend_kind(v); });
        add(app, "--model", model, "model name", [](RunConfig& c, const std::string& v) { c.backend.model_name = v; });
        add(app, "--endpoint", endpoint, "OpenAI-compatible base URL, e.g. http://localhost:8000/v1",
            [](RunConfig& c, const std::string& v) { c.backend.endpoint = v; });
        add(app, "--mode", mode, "auto, insert or instruct",
            [](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); });
        add(app, "--assist-chars", assist_chars, "characters of the original line given on retries (default 4)",
            [](RunConfig& c, int v) { c.params.assist_chars = v; });
        add(app, "--max-attempts", max_attempts, "retry bound for empty or comment responses (default 3)",
            [](RunConfig& c, int v) { c.params.max_attempts = v; });
        add(app, "--temperature", temperature, "sampling temperature (default 0)",
            [](RunConfig& c, double v) { c.params.temperature = v; });
        add(app, "--max-tokens", max_tokens, "completion token limit (default 150)",
            [](RunConfig& c, int v) { c.params.max_tokens = v; });
        add(app, "--top-p", top_p, "nucleus sampling mass (default 1)",
            [](RunConfig& c, double v) { c.params.top_p = v; });
        add(app, "--max-prefix-lines", max_prefix_lines, "prefix window in lines (default 50)",
            [](RunConfig& c, int v) { c.params.max_prefix_lines = v; });
        add(app, "--max-suffix-lines", max_suffix_lines, "suffix window in lines (default 50)",
            [](RunConfig& c, int v) { c.params.max_suffix_lines = v; });
        add(app, "--cache-dir", cache_dir, "record/replay cache directory",
            [](RunConfig& c, const std::string& v) { c.cache_dir = v; });
        add(app, "--mock-script", mock_script, "JSON script for the mock backend",
            [](RunConfig& c, const std::string& v) { c.mock_script = v; });
        add(app, "--parallelism", parallelism, "concurrent line generations (default 1)",
            [](RunConfig& c, int v) { c.parallelism = v; });
        add(app, "--http-retries", http_retries, "retries on rate limits and server errors (default 5)",
            [](RunConfig& c, int v) { c.http_retries = v; });
        add(app, "--timeout", timeout, "HTTP timeout in seconds (default 60)",
            [](RunConfig& c, int v) { c.timeout_seconds = v; });
        add_flag(app, "--no-logprobs", no_logprobs, "backend returns no logprobs",
                 [](RunConfig& c) { c.backend.supports_logprobs = false; });
        add_flag(app, "--no-suffix", no_suffix, "backend cannot take a suffix",
                 [](RunConfig& c) { c.backend.supports_suffix = false; });
        add_flag(app, "--no-system-prompt", no_system_prompt, "backend cannot take a system prompt",
                 [](RunConfig& c) { c.backend.supports_system_prompt = false; });
    }

    void register_criterion(CLI::App& app) {
        add(app, "--criterion", criterion, "C0, C1 or C2 (default C2)",
            [](RunConfig& c, const std::string& v) { c.criterion.kind = parse_criterion_kind(v); });
        add(app, "--ld-limit", ld_limit, "Levenshtein upper limit (default 20)",
            [](RunConfig& c, long v) { c.criterion.ld_limit = v; });
        add(app, "--dfc-limit", dfc_limit, "distance-from-comment limit (default 10)",
            [](RunConfig& c, long v) { c.criterion.dfc_limit = v; });
        add(app, "--logprob-threshold", logprob_threshold, "C2 drops lines with a lower mean logprob (default -0.5)",
            [](RunConfig& c, double v) { c.criterion.logprob_threshold = v; });
        add(app, "--c0-ld-limit", c0_ld_limit, "ld limit of the C0 column in eval tables (default 10)",
            [](RunConfig& c, long v) { c.c0_ld_limit = v; });
    }

    void register_common(CLI::App& app) {
        app.add_option("--config", config_file, "JSON config file");
        add(app, "--output", output, "text or json",
            [](RunConfig& c, const std::string& v) { c.output = parse_output(v); });
    }

    RunConfig resolve() const {
        RunConfig config;
        apply_environment(config);
        if (!config_file.empty()) {
            apply_config_json(config, read_json_file(config_file));
        }
        for (const auto& [opt, apply] : setters) {
            if (opt->count() > 0) {
                apply(config);
            }
        }
        return config;
    }
};

std::vector<std::string> file_keys(const std::string& case_id, const std::filesystem::path& path) {
    std::vector<std::string> keys;
    if (!case_id.empty()) keys.push_back(case_id);
    keys.push_back(path.string());
    keys.push_back(path.filename().string());
    return keys;
}

int cmd_check(const Flags& flags, const std::string& path, const std::string& language_name, int start_line,
              bool start_given, std::ostream& out) {
    RunConfig config = flags.resolve();
    config.validate();

    Language language;
    if (!language_name.empty()) {
        language = parse_language(language_name);
    } else if (auto inferred = language_from_extension(path)) {
        language = *inferred;
    } else {
        throw ConfigError(path + ": cannot infer language from extension; pass --language");
    }
    auto file = load_source(path, language, start_given ? std::optional<int>(start_line) : std::nullopt);
    auto backend = make_backend(config, file, file_keys("", path));
    const auto analysis = analyze_file(std::move(file), config.mode, config.params, *backend, config.parallelism);
    const auto reported = classify_file(analysis.file, analysis.features, config.criterion);
    if (config.output == OutputFormat::json) {
        const auto fingerprint = config_fingerprint(backend->descriptor(), config.mode, config.params);
        out << check_report_json(analysis, reported, config.criterion, fingerprint).dump(2) << '\n';
    } else {
        out << check_report_text(analysis, reported, config.criterion);
    }
    return 0;
}

std::vector<Criterion> table_criteria(const RunConfig& config) {
    const long dfc = config.criterion.dfc_limit.value_or(10);
    return {Criterion::c0(config.c0_ld_limit), Criterion::c1(config.criterion.ld_limit, dfc),
            Criterion::c2(config.criterion.ld_limit, dfc, config.criterion.logprob_threshold)};
}

std::vector<MetricsRow> metrics_rows(std::span<const RunRecord> runs, std::span<const BenchmarkCase> cases,
                                     const std::vector<Criterion>& criteria) {
    const auto pairs = pair_runs(runs, cases);
    std::vector<std::string> groups;
    for (const auto& [run, c] : pairs) {
        if (std::find(groups.begin(), groups.end(), c.source_group) == groups.end()) {
            groups.push_back(c.source_group);
        }
    }
    std::vector<MetricsRow> rows;
    for (const auto& criterion : criteria) {
        std::vector<ScoredCase> scored;
        for (const auto& [run, c] : pairs) {
            scored.push_back(ScoredCase{&c, score_run(*run, c, criterion)});
        }
        const auto by_group = aggregate_by(scored, Grouping::source_group);
        for (const auto& g : groups) {
            rows.push_back(MetricsRow{g.empty() ? "-" : g, label(criterion), by_group.at(g)});
        }
        for (const auto& [category, m] : aggregate_by(scored, Grouping::category)) {
            rows.push_back(MetricsRow{"category:" + category, label(criterion), m});
        }
        rows.push_back(MetricsRow{"all", label(criterion), aggregate_by(scored, Grouping::all).at("all")});
    }
    return rows;
}

int cmd_eval(const Flags& flags, const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
    RunConfig config = flags.resolve();
    config.validate();
    const auto cases = load_manifest(manifest_path);
    if (cases.empty()) {
        throw DataError(manifest_path + ": manifest has no cases");
    }
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir / "runs");

    std::vector<RunRecord> runs;
    std::vector<BenchmarkCase> scored_cases;
    json failures = json::array();
    bool backend_failed = false;
    for (const auto& c : cases) {
        try {
            auto file = load_source(c.path, c.language, c.start_line);
            for (int line : c.defect_lines) {
                if (static_cast<std::size_t>(line) > file.physical_line_count) {
                    throw DataError("case " + c.id + ": defect line " + std::to_string(line) + " beyond end of file");
                }
            }
            auto backend = make_backend(config, file, file_keys(c.id, c.path));
            const auto started = utc_timestamp();
            const auto analysis =
                analyze_file(std::move(file), config.mode, config.params, *backend, config.parallelism);
            auto run = make_run_record(analysis, c, backend->descriptor(), config.mode, config.params);
            run.started_at = started;
            run.finished_at = utc_timestamp();
            save_run_record(dir / "runs" / (c.id + ".jsonl"), run);
            runs.push_back(std::move(run));
            scored_cases.push_back(c);
        } catch (const BackendError& e) {
            backend_failed = true;
            err << "flag: case " << c.id << ": " << e.what() << '\n';
            failures.push_back({{"case_id", c.id}, {"error", e.what()}});
        } catch (const Error& e) {
            err << "flag: case " << c.id << ": " << e.what() << '\n';
            failures.push_back({{"case_id", c.id}, {"error", e.what()}});
        }
    }

    std::vector<MetricsRow> rows;
    if (!runs.empty()) {
        rows = metrics_rows(runs, scored_cases, table_criteria(config));
    }
    json report{{"manifest", manifest_path},
                {"config_fingerprint", config_fingerprint(config.backend, config.mode, config.params)},
                {"metrics", metrics_to_json(rows)},
                {"failures", failures}};
    json per_case = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        json flagged = json::object();
        for (const auto& criterion : table_criteria(config)) {
            flagged[label(criterion)] = flagged_lines(runs[i], criterion);
        }
        per_case.push_back({{"case_id", runs[i].case_id}, {"flagged", flagged}});
    }
    report["cases"] = per_case;

    std::ostringstream csv, table;
    write_metrics_csv(csv, rows);
    write_metrics_table(table, rows);
    write_text_file(dir / "metrics.csv", csv.str());
    write_text_file(dir / "metrics.txt", table.str());
    write_text_file(dir / "metrics.json", report.dump(2) + "\n");
    if (config.output == OutputFormat::json) {
        out << report.dump(2) << '\n';
    } else {
        out << table.str();
    }
    if (failures.empty()) return 0;
    return backend_failed ? 2 : 1;
}

struct OfflineArgs {
    std::string runs_dir;
    std::string manifest;
    std::string out_file;
};

std::vector<BenchmarkCase> offline_cases(const OfflineArgs& args) {
    return args.manifest.empty() ? std::vector<BenchmarkCase>{} : load_manifest(args.manifest);
}

void emit(const OfflineArgs& args, const std::string& text, std::ostream& out) {
    if (args.out_file.empty()) {
        out << text;
    } else {
        write_text_file(args.out_file, text);
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"flags anomalous source lines by comparing them with model regenerations", "flag"};
    app.require_subcommand(1);
    Flags flags;

    auto* check = app.add_subcommand("check", "flag suspicious lines in one source file");
    std::string check_path, language;
    int start_line = 1;
    check->add_option("file", check_path, "source file")->required();
    check->add_option("--language", language, "c, python or verilog (default: from extension)");
    auto* start_opt = check->add_option("--start-line", start_line, "first line to check (default 1)");

    auto* eval = app.add_subcommand("eval", "run a benchmark manifest and score it");
    std::string manifest_path, out_dir = "flag-eval";
    eval->add_option("manifest", manifest_path, "benchmark manifest (JSON)")->required();
    eval->add_option("--out-dir", out_dir, "directory for run records and metrics (default flag-eval)");

    for (auto* sub : {check, eval}) {
        flags.register_common(*sub);
        flags.register_generation(*sub);
        flags.register_criterion(*sub);
    }

    OfflineArgs offline;
    std::string ld_range = "0:30", dfc_range = "0:50", thresholds = "0:30";
    std::string sweep_criterion = "C2", roc_criterion = "C0";
    long roc_dfc_limit = 10;
    double logprob_threshold = -0.5;
    bool sentinel = false;
    std::string meta_criterion = "C2";
    long meta_ld = 20, meta_dfc = 10;

    auto* sweep_cmd = app.add_subcommand("sweep", "DD/FPR/TPR grid over ld and dfc limits from stored runs");
    auto* roc_cmd = app.add_subcommand("roc", "ROC points over ld_limit thresholds from stored runs");
    auto* meta_cmd = app.add_subcommand("metadata", "per-benchmark feature statistics from stored runs");
    for (auto* sub : {sweep_cmd, roc_cmd, meta_cmd}) {
        sub->add_option("--runs", offline.runs_dir, "directory of run records (*.jsonl)")->required();
        sub->add_option("--manifest", offline.manifest, "manifest overriding the cases stored in the runs");
        sub->add_option("--out", offline.out_file, "output CSV (default stdout)");
        sub->add_option("--logprob-threshold", logprob_threshold, "C2 logprob threshold (default -0.5)");
    }
    sweep_cmd->add_option("--ld-range", ld_range, "ld_limit values, a:b[:step] or list (default 0:30)");
    sweep_cmd->add_option("--dfc-range", dfc_range, "dfc_limit values (default 0:50)");
    sweep_cmd->add_option("--criterion", sweep_criterion, "C0, C1 or C2 (default C2)");
    roc_cmd->add_option("--thresholds", thresholds, "ascending ld_limit thresholds (default 0:30)");
    roc_cmd->add_option("--criterion", roc_criterion, "C0, C1 or C2 (default C0)");
    roc_cmd->add_option("--dfc-limit", roc_dfc_limit, "dfc limit for C1/C2 (default 10)");
    roc_cmd->add_flag("--sentinel", sentinel, "append the point that flags every line");
    meta_cmd->add_option("--criterion", meta_criterion, "criterion for the detected column (default C2)");
    meta_cmd->add_option("--ld-limit", meta_ld, "ld limit for the detected column (default 20)");
    meta_cmd->add_option("--dfc-limit", meta_dfc, "dfc limit for the detected column (default 10)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (check->parsed()) {
            return cmd_check(flags, check_path, language, start_line, start_opt->count() > 0, out);
        }
        if (eval->parsed()) {
            return cmd_eval(flags, manifest_path, out_dir, out, err);
        }
        const auto runs = load_run_directory(offline.runs_dir);
        const auto cases = offline_cases(offline);
        std::ostringstream csv;
        if (sweep_cmd->parsed()) {
            const auto lds = parse_range(ld_range);
            const auto dfcs = parse_range(dfc_range);
            const auto cells = sweep(runs, cases, lds, dfcs, parse_criterion_kind(sweep_criterion), logprob_threshold);
            write_sweep_csv(csv, cells);
        } else if (roc_cmd->parsed()) {
            Criterion base{parse_criterion_kind(roc_criterion), 0, roc_dfc_limit, logprob_threshold};
            const auto points = roc_points(runs, cases, parse_range(thresholds), base, sentinel);
            write_roc_csv(csv, points);
        } else if (meta_cmd->parsed()) {
            Criterion criterion{parse_criterion_kind(meta_criterion), meta_ld, meta_dfc, logprob_threshold};
            std::vector<BenchmarkMetadata> rows;
            for (const auto& [run, c] : pair_runs(runs, cases)) {
                auto row = benchmark_metadata(*run);
                row.detected = score_run(*run, c, criterion).dd > 0;
                rows.push_back(std::move(row));
            }
            write_metadata_csv(csv, rows);
        }
        emit(offline, csv.str(), out);
        return 0;
    } catch (const BackendError& e) {
        err << "flag: backend failure (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "flag: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "flag: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, std::cout, std::cerr);
}

}  // namespace flag::cli
