#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "scenarios.hpp"
#include "signflow/cli.hpp"
#include "signflow/io/json_io.hpp"
#include "test_support.hpp"

using namespace signflow;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "signflow");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = signflow::cli::run_cli(int(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliPipeline : public ::testing::Test {
protected:
    // ctest runs each case in its own process, possibly in parallel
    static fs::path root() { return test::tmp_dir("cli_" + std::to_string(::getpid())); }

    static void SetUpTestSuite() {
        fs::remove_all(root());
        fs::create_directories(root());
        io::write_json_file((root() / "synth.json").string(), io::to_json(test::easy_config()), "easy");
        io::write_json_file((root() / "train.json").string(),
                            nlohmann::json{{"gesture_k", 30}, {"posture_k", 30}, {"states", 5}}, "train");
        ASSERT_EQ(run({"synth", "--config", (root() / "synth.json").string(), "--out", (root() / "corpus").string(),
                       "--seed", "4"})
                      .code,
                  0);
        ASSERT_EQ(run({"train", "--manifest", manifest(), "--config", (root() / "train.json").string(), "--out",
                       bundle(), "--seed", "4"})
                      .code,
                  0);
    }

    static void TearDownTestSuite() { fs::remove_all(root()); }

    static std::string manifest() { return (root() / "corpus" / "manifest.json").string(); }
    static std::string bundle() { return (root() / "bundle.json").string(); }
};

} // namespace

TEST_F(CliPipeline, EvalOnEasyCorpusScoresHigh) {
    const auto r = run({"eval", "--bundle", bundle(), "--manifest", manifest(), "--split", "test", "--out",
                        (root() / "report").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto pos = r.out.find("macro F-score:");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_GE(std::stod(r.out.substr(pos + 14)), 0.9) << r.out;
    for (const char* f : {"metrics.csv", "confusion.csv", "predictions.csv", "timing.csv"}) {
        const auto text = slurp(root() / "report" / f);
        EXPECT_EQ(text.rfind("# signflow 1.0.0 config=", 0), 0u) << f;
    }
    EXPECT_NE(r.out.find("postures/descr"), std::string::npos);
}

TEST_F(CliPipeline, PredictMemorizesTrainingSequence) {
    const auto m = io::read_manifest(manifest());
    for (const auto& e : m.entries) {
        if (e.split != Split::Train)
            continue;
        const auto r = run({"predict", "--bundle", bundle(), "--sequence", (m.base_dir / e.sequence).string(),
                            "--masks", (m.base_dir / *e.masks).string()});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto doc = nlohmann::json::parse(r.out);
        EXPECT_EQ(doc.at("predicted").get<std::size_t>(), e.label) << e.id;
        EXPECT_EQ(doc.at("gesture").size(), 3u);
        EXPECT_TRUE(doc.contains("posture"));
    }
}

TEST_F(CliPipeline, EvalIsBitIdenticalAcrossRuns) {
    for (const char* tag : {"r1", "r2"})
        ASSERT_EQ(run({"eval", "--bundle", bundle(), "--manifest", manifest(), "--out", (root() / tag).string(),
                       "--fusion", "linear"})
                      .code,
                  0);
    for (const char* f : {"metrics.csv", "confusion.csv", "predictions.csv"})
        EXPECT_EQ(slurp(root() / "r1" / f), slurp(root() / "r2" / f)) << f;
}

TEST_F(CliPipeline, TrainIsBitIdenticalForTheSameSeed) {
    const auto again = (root() / "bundle2.json").string();
    ASSERT_EQ(run({"train", "--manifest", manifest(), "--config", (root() / "train.json").string(), "--out", again,
                   "--seed", "4"})
                  .code,
              0);
    EXPECT_EQ(slurp(again), slurp(bundle()));
}

TEST_F(CliPipeline, InspectSummarizesBundle) {
    const auto r = run({"inspect", "--bundle", bundle()});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("classes:        3"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("rbpd-t"), std::string::npos);
}

TEST_F(CliPipeline, SeedFallsBackToEnvironment) {
    const auto a = (root() / "env_a").string(), b = (root() / "env_b").string();
    ::setenv("SIGNFLOW_SEED", "4", 1);
    const auto r = run({"synth", "--config", (root() / "synth.json").string(), "--out", a});
    ::unsetenv("SIGNFLOW_SEED");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(slurp(fs::path(a) / "manifest.json"), slurp(root() / "corpus" / "manifest.json"));
    ASSERT_EQ(run({"synth", "--config", (root() / "synth.json").string(), "--out", b, "--seed", "5"}).code, 0);
    EXPECT_NE(slurp(fs::path(b) / "sequences" / "seq_00000.csv"),
              slurp(root() / "corpus" / "sequences" / "seq_00000.csv"));
}

TEST(Cli, FailuresExitNonZeroWithMessage) {
    auto r = run({"train", "--bogus"});
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(r.err.empty());
    r = run({"eval", "--bundle", "/nonexistent/b.json", "--manifest", "/nonexistent/m.json", "--out", "/tmp/x"});
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(r.err.empty());
    r = run({});
    EXPECT_NE(r.code, 0);

    const auto dir = test::tmp_dir("cli_bad");
    fs::create_directories(dir);
    std::ofstream(dir + "/broken.json") << "{\"classes\": [";
    r = run({"synth", "--config", dir + "/broken.json", "--out", dir + "/out"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("signflow:"), std::string::npos);
}
