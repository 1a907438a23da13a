#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "sleeper/sleeper.hpp"

namespace fs = std::filesystem;
using namespace sleeper;

namespace {

struct RunResult {
    int code;
    std::string out;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class CliTest : public ::testing::Test {
protected:
    static fs::path root;

    static void SetUpTestSuite() {
        root = fs::temp_directory_path() / ("sleeper_cli_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
        const auto r = run("synth --subjects 4 --epochs 20 --seed 3 --out " + (root / "data").string());
        ASSERT_EQ(r.code, 0) << r.out;
        const auto t = run(train_args("m1"));
        ASSERT_EQ(t.code, 0) << t.out;
    }

    static void TearDownTestSuite() { fs::remove_all(root); }

    static RunResult run(const std::string& args, const std::string& env = "") {
        const auto log = root / "last_run.txt";
        const std::string cmd = env + (env.empty() ? "" : " ") + std::string(SLEEPER_CLI_PATH) + " " + args + " > " +
                                log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
    }

    static std::string train_args(const std::string& out, const std::string& extra = "--rules 24") {
        return "train --data " + (root / "data").string() + " --out " + (root / out).string() +
               " --profile desk --cnn-epochs 1 --min-leaf 2 --test-fraction 0.25 --seed 11 " + extra;
    }
};

fs::path CliTest::root;

}  // namespace

TEST_F(CliTest, SynthWritesRecordingsAndLabels) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(root / "data")) n += e.path().extension() == ".psgb" ? 1 : 0;
    EXPECT_EQ(n, 4u);
    const auto rec = io::read_recording(root / "data" / (synth::subject_name(0) + ".psgb"));
    EXPECT_EQ(rec.epochs.size(), 20u);
    ASSERT_TRUE(rec.labels);
    EXPECT_EQ(io::parse_labels_csv(slurp(root / "data" / (synth::subject_name(0) + "_labels.csv"))), *rec.labels);
}

TEST_F(CliTest, TrainWritesArtifacts) {
    for (const char* f : {"cnn.bin", "rulebank.json", "prototypes.bin", "classifier.json", "split.json"})
        EXPECT_TRUE(fs::exists(root / "m1" / f)) << f;
    const auto bank = load_rulebank(root / "m1" / "rulebank.json");
    EXPECT_EQ(bank.active_rules().size(), 24u);
    const auto protos = load_prototypes(root / "m1" / "prototypes.bin");
    EXPECT_EQ(protos.n_prototypes(), 24u);
    EXPECT_EQ(protos.dim(), 160u);
    EXPECT_EQ(protos.rule_ids, bank.active_rules());
}

TEST_F(CliTest, TrainIsDeterministic) {
    const auto r = run(train_args("m1_again"));
    ASSERT_EQ(r.code, 0) << r.out;
    for (const char* f : {"rulebank.json", "cnn.bin", "prototypes.bin", "classifier.json"})
        EXPECT_EQ(slurp(root / "m1" / f), slurp(root / "m1_again" / f)) << f;
}

TEST_F(CliTest, NoSelectUsesAllRules) {
    const auto r = run(train_args("m_all", "--rules 240 --no-select"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(load_prototypes(root / "m_all" / "prototypes.bin").n_prototypes(), 240u);
    EXPECT_FALSE(load_rulebank(root / "m_all" / "rulebank.json").has_selection());

    // Selecting all 240 rules gives the same features and model as no selection.
    const auto k = run(train_args("m_240", "--rules 240"));
    ASSERT_EQ(k.code, 0) << k.out;
    EXPECT_EQ(slurp(root / "m_all" / "prototypes.bin"), slurp(root / "m_240" / "prototypes.bin"));
    EXPECT_EQ(slurp(root / "m_all" / "classifier.json"), slurp(root / "m_240" / "classifier.json"));

    EXPECT_NE(run(train_args("m_bad", "--rules 24 --no-select")).code, 0);
}

TEST_F(CliTest, ScoreLabeledWritesReport) {
    const auto r = run("score --model " + (root / "m1").string() + " --input " + (root / "data").string() + " --out " +
                       (root / "s1").string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(root / "s1" / "report.json"));
    const auto report = nlohmann::json::parse(slurp(root / "s1" / "report.json"));
    EXPECT_EQ(report["n"], 80);
    const auto hyp = slurp(root / "s1" / (synth::subject_name(2) + "_hypnogram.csv"));
    EXPECT_EQ(std::count(hyp.begin(), hyp.end(), '\n'), 21);
}

TEST_F(CliTest, ScoreUnlabeledWritesPredictionsOnly) {
    auto rec = io::read_recording(root / "data" / (synth::subject_name(1) + ".psgb"));
    rec.labels.reset();
    fs::create_directories(root / "unlabeled");
    io::write_recording(rec, root / "unlabeled" / "night.psgb");
    const auto r = run("score --model " + (root / "m1").string() + " --input " + (root / "unlabeled").string() +
                       " --out " + (root / "s2").string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(root / "s2" / (synth::subject_name(1) + "_hypnogram.csv")));
    EXPECT_FALSE(fs::exists(root / "s2" / "report.json"));
    EXPECT_NE(r.out.find("no report"), std::string::npos);
}

TEST_F(CliTest, EvalUsesHeldOutSubjects) {
    const auto r = run("eval --model " + (root / "m1").string() + " --data " + (root / "data").string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto report = nlohmann::json::parse(slurp(root / "m1" / "eval.json"));
    EXPECT_EQ(report["n"], 20);  // one of four subjects held out
}

TEST_F(CliTest, ExplainTracesWithinDepth) {
    ASSERT_EQ(run(train_args("m_d2", "--rules 24 --depth 2")).code, 0);
    const auto input = (root / "data" / (synth::subject_name(0) + ".psgb")).string();
    const auto r = run("explain --model " + (root / "m_d2").string() + " --input " + input + " --epoch 5");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(root / "m_d2" / "tree.txt"));
    EXPECT_TRUE(fs::exists(root / "m_d2" / "tree.dot"));
    std::istringstream is(r.out);
    std::string line;
    int nodes = 0, leaves = 0;
    while (std::getline(is, line)) {
        if (line.rfind("  node ", 0) == 0) ++nodes;
        if (line.rfind("  leaf ", 0) == 0) ++leaves;
    }
    EXPECT_LE(nodes, 2);
    EXPECT_EQ(leaves, 1);
    EXPECT_NE(run("explain --model " + (root / "m_d2").string() + " --input " + input + " --epoch 20").code, 0);
}

TEST_F(CliTest, SweepArgumentValidation) {
    const auto cfg = root / "empty_depths.json";
    std::ofstream(cfg) << R"({"depths": []})";
    const auto data = (root / "data").string();
    const auto r = run("sweep-depth --config " + cfg.string() + " --data " + data + " --out " + (root / "sw").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.out.find("--depths"), std::string::npos);
    const auto k = run("sweep-rules --ks 241 --data " + data + " --out " + (root / "sw").string());
    EXPECT_NE(k.code, 0);
    EXPECT_NE(run("sweep-rules --ks 0 --data " + data + " --out " + (root / "sw").string()).code, 0);
}

TEST_F(CliTest, SweepRulesWritesTable) {
    const auto r = run("sweep-rules --ks 12,240 --profile desk --cnn-epochs 1 --test-fraction 0.25 --seed 11 --data " +
                       (root / "data").string() + " --out " + (root / "sw_ok").string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto csv = slurp(root / "sw_ok" / "sweep_rules.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,roc_auc_prototype,roc_auc_rule");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
    const auto a = root / "env_a", b = root / "env_b", c = root / "env_c";
    ASSERT_EQ(run("synth --subjects 1 --epochs 2 --out " + a.string(), "SLEEPER_SEED=5").code, 0);
    ASSERT_EQ(run("synth --subjects 1 --epochs 2 --seed 5 --out " + b.string()).code, 0);
    ASSERT_EQ(run("synth --subjects 1 --epochs 2 --out " + c.string(), "SLEEPER_SEED=6").code, 0);
    const auto name = synth::subject_name(0) + ".psgb";
    EXPECT_EQ(slurp(a / name), slurp(b / name));
    EXPECT_NE(slurp(a / name), slurp(c / name));
    // An explicit flag wins over the environment.
    ASSERT_EQ(run("synth --subjects 1 --epochs 2 --seed 5 --out " + c.string(), "SLEEPER_SEED=6").code, 0);
    EXPECT_EQ(slurp(a / name), slurp(c / name));
    EXPECT_NE(run("synth --subjects 1 --epochs 2 --out " + c.string(), "SLEEPER_SEED=abc").code, 0);
}

TEST_F(CliTest, ErrorsGiveNonzeroExit) {
    const auto data = (root / "data").string();
    EXPECT_NE(run("train --data " + data).code, 0);  // no --out
    EXPECT_NE(run("train --out " + (root / "x").string()).code, 0);  // no --data
    const auto bad = run(train_args("x", "--classifier svm"));
    EXPECT_NE(bad.code, 0);
    EXPECT_NE(bad.out.find("svm"), std::string::npos);
    EXPECT_NE(run(train_args("x", "--profile huge")).code, 0);
    EXPECT_NE(run("score --model " + (root / "nowhere").string() + " --input " + data).code, 0);
    EXPECT_NE(run("synth --subjects 0 --out " + (root / "x").string()).code, 0);
    EXPECT_NE(run("").code, 0);
}
