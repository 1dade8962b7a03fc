#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "flag/cli.hpp"
#include "flag/error.hpp"
#include "flag/evalharness.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace flag;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string bench(const std::string& name) { return testkit::fixture("bench/" + name).string(); }

std::vector<std::string> mock_eval(const std::filesystem::path& out_dir) {
    return {"eval", bench("manifest.json"), "--backend", "mock", "--mock-script", bench("mock_script.json"),
            "--out-dir", out_dir.string()};
}

}  // namespace

TEST(CliCheck, WorkedExampleJson) {
    const auto script = testkit::TempDir();
    const auto script_path = script.path() / "script.json";
    std::ofstream(script_path) << R"({"files": {"get_value.c": {
        "12": "    if (index >= 0 && index <size) {",
        "14": "    } else {"}}})";
    const auto r = run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "mock", "--mock-script",
                            script_path.string(), "--output", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(r.out);
    EXPECT_EQ(report["criterion"], "C2(20,10)");
    ASSERT_EQ(report["flagged"].size(), 2u);
    EXPECT_EQ(report["flagged"][0]["line_no"], 12);
    EXPECT_EQ(report["flagged"][0]["features"]["ld"], 15);
    EXPECT_EQ(report["flagged"][0]["features"]["dfc"], 1);
    EXPECT_FALSE(report["flagged"][0].contains("removed_by"));
    EXPECT_EQ(report["flagged"][1]["line_no"], 14);
    EXPECT_EQ(report["flagged"][1]["removed_by"], "keyword_only");
}

TEST(CliCheck, EchoIsEmptyText) {
    const auto r = run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "mock"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("0 of 15 lines flagged"), std::string::npos);
}

TEST(CliCheck, CriterionFlags) {
    const auto script = testkit::TempDir();
    const auto script_path = script.path() / "script.json";
    std::ofstream(script_path) << R"({"files": {"*": {"14": "    } else {"}}})";
    const auto r = run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "mock", "--mock-script",
                            script_path.string(), "--criterion", "C1", "--output", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(r.out);
    EXPECT_EQ(report["criterion"], "C1(20,10)");
    ASSERT_EQ(report["flagged"].size(), 1u);
    EXPECT_EQ(report["flagged"][0]["line_no"], 14);
}

TEST(CliCheck, Errors) {
    EXPECT_EQ(run_cli({"check", "/no/such/file.c", "--backend", "mock"}).code, 1);
    EXPECT_FALSE(run_cli({"check", "/no/such/file.c", "--backend", "mock"}).err.empty());
    EXPECT_EQ(run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "bogus"}).code, 1);
    EXPECT_EQ(run_cli({"check", testkit::fixture("get_value.c").string(), "--ld-limit", "0", "--backend", "mock"}).code,
              1);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    EXPECT_EQ(run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "replay"}).code, 1);
}

TEST(CliCheck, ReplayMissIsBackendFailure) {
    testkit::TempDir dir;
    const auto r = run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "replay", "--cache-dir",
                            dir.path().string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cache-miss"), std::string::npos);
}

TEST(CliCheck, CapabilityMismatch) {
    const auto r = run_cli({"check", testkit::fixture("get_value.c").string(), "--backend", "mock", "--mode", "insert",
                            "--no-suffix"});
    EXPECT_EQ(r.code, 2);
}

TEST(CliCheck, ConfigFileLayering) {
    testkit::TempDir dir;
    const auto cfg = dir.path() / "config.json";
    std::ofstream(cfg) << R"({"backend": "mock", "criterion": "C1", "ld_limit": 7, "output": "json"})";
    auto r = run_cli({"check", testkit::fixture("get_value.c").string(), "--config", cfg.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["criterion"], "C1(7,10)");
    r = run_cli({"check", testkit::fixture("get_value.c").string(), "--config", cfg.string(), "--ld-limit", "9"});
    EXPECT_EQ(json::parse(r.out)["criterion"], "C1(9,10)");

    std::ofstream(cfg) << R"({"colour": "blue"})";
    EXPECT_EQ(run_cli({"check", testkit::fixture("get_value.c").string(), "--config", cfg.string()}).code, 1);
}

TEST(CliEval, GoldenMetricsAndDeterminism) {
    testkit::TempDir a, b;
    const auto first = run_cli(mock_eval(a.path()));
    ASSERT_EQ(first.code, 0) << first.err;
    const auto second = run_cli(mock_eval(b.path()));
    ASSERT_EQ(second.code, 0) << second.err;
    EXPECT_EQ(slurp(a.path() / "metrics.json"), slurp(b.path() / "metrics.json"));
    EXPECT_EQ(slurp(a.path() / "metrics.csv"), slurp(b.path() / "metrics.csv"));
    EXPECT_EQ(first.out, second.out);

    // Hand-scored: 32 checkable lines over three cases.
    const auto report = json::parse(slurp(a.path() / "metrics.json"));
    std::map<std::string, json> all;
    for (const auto& row : report["metrics"]) {
        if (row["group"] == "all") all[row["criterion"]] = row;
    }
    EXPECT_EQ(all.at("C0(10)")["dd"], 2);
    EXPECT_EQ(all.at("C0(10)")["false_positives"], 4);
    EXPECT_EQ(all.at("C0(10)")["total_lines"], 32);
    EXPECT_EQ(all.at("C1(20,10)")["dd"], 3);
    EXPECT_EQ(all.at("C1(20,10)")["false_positives"], 6);
    EXPECT_EQ(all.at("C2(20,10)")["dd"], 3);
    EXPECT_EQ(all.at("C2(20,10)")["false_positives"], 2);
    EXPECT_DOUBLE_EQ(all.at("C2(20,10)")["fpr"].get<double>(), 2.0 / 32.0);

    ASSERT_EQ(report["cases"].size(), 3u);
    EXPECT_EQ(report["cases"][0]["case_id"], "cwe-125");
    EXPECT_EQ(report["cases"][0]["flagged"]["C2(20,10)"], json::array({6, 12}));
    EXPECT_EQ(report["cases"][1]["flagged"]["C2(20,10)"], json::array({4}));
    EXPECT_EQ(report["cases"][2]["flagged"]["C2(20,10)"], json::array({3, 9}));
    EXPECT_TRUE(std::filesystem::exists(a.path() / "runs" / "py-sum.jsonl"));
}

TEST(CliEval, EmptyManifest) {
    testkit::TempDir dir;
    const auto r = run_cli({"eval", bench("empty_manifest.json"), "--backend", "mock", "--out-dir", dir.path().string()});
    EXPECT_EQ(r.code, 1);
}

TEST(CliEval, WarmCacheReplays) {
    testkit::TempDir out1, out2, cache;
    auto args = mock_eval(out1.path());
    args.insert(args.end(), {"--cache-dir", cache.path().string()});
    ASSERT_EQ(run_cli(args).code, 0);
    const auto r = run_cli({"eval", bench("manifest.json"), "--backend", "replay", "--cache-dir", cache.path().string(),
                            "--out-dir", out2.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(out1.path() / "metrics.csv"), slurp(out2.path() / "metrics.csv"));
}

TEST(CliEval, FailedCaseIsReportedAndOthersScored) {
    testkit::TempDir dir;
    const auto manifest = dir.path() / "manifest.json";
    std::ofstream(manifest) << json::array({
        {{"id", "ok"}, {"path", bench("counter.v")}, {"defect_lines", {9}}},
        {{"id", "gone"}, {"path", (dir.path() / "missing.c").string()}, {"defect_lines", {1}}},
    });
    const auto r = run_cli({"eval", manifest.string(), "--backend", "mock", "--out-dir", (dir.path() / "o").string()});
    EXPECT_EQ(r.code, 1);
    const auto report = json::parse(slurp(dir.path() / "o" / "metrics.json"));
    EXPECT_EQ(report["failures"].size(), 1u);
    EXPECT_EQ(report["failures"][0]["case_id"], "gone");
    EXPECT_EQ(report["cases"].size(), 1u);
}

TEST(CliOffline, SweepRocMetadata) {
    testkit::TempDir dir;
    ASSERT_EQ(run_cli(mock_eval(dir.path())).code, 0);
    const auto runs = (dir.path() / "runs").string();

    auto r = run_cli({"sweep", "--runs", runs});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 31 * 51 + 1);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "ld_limit,dfc_limit,dd,fpr,tpr");

    r = run_cli({"roc", "--runs", runs, "--thresholds", "0,5,10,15,20", "--sentinel"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
    EXPECT_NE(r.out.find("\n0,0,0\n"), std::string::npos);

    const auto csv = dir.path() / "meta.csv";
    r = run_cli({"metadata", "--runs", runs, "--manifest", bench("manifest.json"), "--out", csv.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto meta = slurp(csv);
    EXPECT_EQ(std::count(meta.begin(), meta.end(), '\n'), 4);
    EXPECT_NE(meta.find("py-sum,1,"), std::string::npos);

    EXPECT_EQ(run_cli({"sweep", "--runs", runs, "--ld-range", "5:1"}).code, 1);
    EXPECT_EQ(run_cli({"sweep", "--runs", (dir.path() / "nope").string()}).code, 1);
}

TEST(CliEval, HttpStubWarmCacheHasNoUpstreamRequests) {
    testkit::StubServer stub([](const json& req, httplib::Response& res) {
        const std::string prompt = req["prompt"];
        res.set_content(testkit::completion_body("x" + std::to_string(prompt.size() % 7)).dump(), "application/json");
    });
    testkit::TempDir cache, out1, out2;
    auto args = [&](const std::filesystem::path& out) {
        return std::vector<std::string>{"eval", bench("manifest.json"), "--endpoint", stub.endpoint(), "--cache-dir",
                                        cache.path().string(), "--out-dir", out.string()};
    };
    ASSERT_EQ(run_cli(args(out1.path())).code, 0);
    const int cold = stub.requests.load();
    EXPECT_GT(cold, 0);
    ASSERT_EQ(run_cli(args(out2.path())).code, 0);
    EXPECT_EQ(stub.requests.load(), cold);
    EXPECT_EQ(slurp(out1.path() / "metrics.json"), slurp(out2.path() / "metrics.json"));
}

TEST(ParseRange, Forms) {
    EXPECT_EQ(cli::parse_range("0:3"), (std::vector<long>{0, 1, 2, 3}));
    EXPECT_EQ(cli::parse_range("0:10:5"), (std::vector<long>{0, 5, 10}));
    EXPECT_EQ(cli::parse_range("4,2,9"), (std::vector<long>{4, 2, 9}));
    EXPECT_EQ(cli::parse_range("7"), std::vector<long>{7});
    EXPECT_THROW(cli::parse_range("a:b"), ConfigError);
    EXPECT_THROW(cli::parse_range("3:1"), ConfigError);
}
