#include "commands.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace ckb;
using namespace ckb::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ckb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write_pair(const DomainPair& p) {
        save_csv(path("source.csv"), p.source);
        save_csv(path("target.csv"), p.target);
    }

    int run(const std::string& args) const {
        const std::string cmd = std::string(CKB_CLI_PATH) + " " + args + " >" + path("stdout.txt") + " 2>" +
                                path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, MetricIdenticalFilesAndDefaultEpsilon) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(0)));
    MetricOptions o;
    o.source = o.target = path("source.csv");
    o.out = path("r.json");
    std::ostringstream log;
    const RunReport r = cmd_metric(o, log);
    const DiscrepancyReport& d = r.discrepancies.at(0);
    EXPECT_LE(std::abs(d.value), 1e-8 * d.trace_scale());
    EXPECT_NE(log.str().find("epsilon  0.01\n"), std::string::npos);
    EXPECT_EQ(r.config["epsilon"], 0.01);
    EXPECT_EQ(read_report(path("r.json")).discrepancies.at(0).value, d.value);
}

TEST_F(CliTest, MetricAllKinds) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(1)));
    for (const char* m : {"bures", "kernel-bures", "ckb", "mmd"}) {
        MetricOptions o;
        o.source = path("source.csv");
        o.target = path("target.csv");
        o.metric = m;
        o.out = path(std::string(m) + ".json");
        std::ostringstream log;
        const RunReport r = cmd_metric(o, log);
        EXPECT_GE(r.discrepancies.at(0).value, -1e-8 * r.discrepancies.at(0).trace_scale()) << m;
    }
    MetricOptions o;
    o.source = path("source.csv");
    o.target = path("target.csv");
    o.out = path("fixed.json");
    o.sigma2 = 2.0;
    std::ostringstream log;
    EXPECT_EQ(*cmd_metric(o, log).discrepancies.at(0).sigma2.x_cross, 2.0);
}

TEST_F(CliTest, MetricExitCodes) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(2)));
    const std::string files = path("source.csv") + " " + path("target.csv");
    EXPECT_EQ(run("metric " + files + " --out " + path("ok.json")), 0);
    EXPECT_EQ(run("metric " + path("missing.csv") + " " + path("target.csv")), 2);
    EXPECT_EQ(run("metric " + files + " --epsilon -1"), 2);
    EXPECT_EQ(run("metric " + files + " --metric nope"), 2);
    EXPECT_EQ(run("metric " + files + " --kernel-x poly"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    // Labels are required for ckb.
    std::ofstream(path("nolabels.csv")) << "f0,f1\n0,1\n1,0\n2,2\n";
    EXPECT_EQ(run("metric " + path("nolabels.csv") + " " + path("nolabels.csv")), 2);
    EXPECT_EQ(run("metric " + path("nolabels.csv") + " " + path("nolabels.csv") + " --metric kernel-bures --out " +
                  path("kb.json")),
              0);
}

TEST_F(CliTest, MetricNumericalFailureExitCode) {
    std::ofstream(path("huge.csv")) << "f0,label\n1e308,0\n-1e308,1\n1e308,1\n";
    EXPECT_EQ(run("metric " + path("huge.csv") + " " + path("huge.csv") + " --kernel-x linear --out " +
                  path("h.json")),
              3);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(3)));
    const std::string cmd = "env CKB_OUT_DIR=" + path("outdir") + " " + std::string(CKB_CLI_PATH) + " metric " +
                            path("source.csv") + " " + path("target.csv") + " >/dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir_ / "outdir" / "metric_report.json"));
}

TEST_F(CliTest, VerifyPassesAndDetectsFault) {
    VerifyOptions o;
    o.seeds = 10;
    o.out = path("v.json");
    std::ostringstream log;
    const RunReport r = cmd_verify(o, log);
    EXPECT_TRUE(r.verification->passed);
    EXPECT_LE(r.verification->max_deviation, 1e-6);
    EXPECT_EQ(r.verification->instances.size(), 10u);

    o.fault = "flip-cross-sign";
    EXPECT_THROW(cmd_verify(o, log), VerificationError);
    EXPECT_EQ(run("verify --seeds 3 --fault flip-cross-sign --out " + path("f.json")), 4);
    EXPECT_NE(slurp("stderr.txt").find("seed"), std::string::npos);
    EXPECT_EQ(run("verify --seeds 3 --out " + path("g.json")), 0);
}

TEST_F(CliTest, VerifySingleSmallInstance) {
    VerifyOptions o;
    o.seeds = 1;
    o.dims = "1";
    o.sizes = "10";
    o.out = path("v.json");
    std::ostringstream log;
    const RunReport r = cmd_verify(o, log);
    const VerifyInstance& v = r.verification->instances.at(0);
    EXPECT_EQ(v.d, 1);
    EXPECT_EQ(v.n, 10);
    EXPECT_EQ(v.m, 10);
    EXPECT_LE(v.deviation, 1e-6);
}

TEST_F(CliTest, VerifyIndependentOfJobs) {
    VerifyOptions o;
    o.seeds = 8;
    o.out = path("a.json");
    std::ostringstream log;
    const RunReport a = cmd_verify(o, log);
    o.jobs = 3;
    o.out = path("b.json");
    const RunReport b = cmd_verify(o, log);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(a.verification->instances[i].estimate, b.verification->instances[i].estimate);
        EXPECT_EQ(a.verification->instances[i].primal, b.verification->instances[i].primal);
    }
}

TEST_F(CliTest, ConvergeSmallRunIsDeterministic) {
    ConvergeOptions o;
    o.sizes = {16, 32, 64, 128};
    o.seeds = 5;
    o.out = path("c1.json");
    std::ostringstream log;
    const RunReport a = cmd_converge(o, log);
    o.out = path("c2.json");
    o.jobs = 2;
    const RunReport b = cmd_converge(o, log);
    EXPECT_EQ(a.convergence->medians, b.convergence->medians);
    EXPECT_EQ(slurp("c1_medians.csv"), slurp("c2_medians.csv"));
    EXPECT_LT(a.convergence->slope, 0.0);
    EXPECT_NEAR(a.convergence->epsilons[0], std::pow(16.0, -0.25), 1e-15);
}

TEST_F(CliTest, ConvergeValidation) {
    ConvergeOptions o;
    o.out = path("c.json");
    std::ostringstream log;
    o.sizes = {64};
    EXPECT_THROW(cmd_converge(o, log), InputError);
    o.sizes = {64, 32};
    EXPECT_THROW(cmd_converge(o, log), InputError);
    o.sizes = {32, 64};
    o.epsilon_schedule = "n^";
    EXPECT_THROW(cmd_converge(o, log), InputError);
}

TEST(EpsilonSchedule, Parse) {
    EXPECT_DOUBLE_EQ(EpsilonSchedule::parse("n^-0.25").at(16), 0.5);
    EXPECT_DOUBLE_EQ(EpsilonSchedule::parse("2*n^-0.5").at(4), 1.0);
    EXPECT_DOUBLE_EQ(EpsilonSchedule::parse("0.01").at(1000), 0.01);
    EXPECT_THROW(EpsilonSchedule::parse("x"), InputError);
    EXPECT_THROW(EpsilonSchedule::parse("-1*n^2"), InputError);
    EXPECT_EQ(EpsilonSchedule::parse("n^-0.25").to_string(), "n^-0.25");
}

TEST(LogLogFit, ExactPowerLaw) {
    const std::vector<Index> x{10, 20, 40, 80};
    std::vector<double> y;
    for (Index v : x)
        y.push_back(3.0 * std::pow(static_cast<double>(v), -0.5));
    const auto [slope, intercept] = loglog_fit(x, y);
    EXPECT_NEAR(slope, -0.5, 1e-12);
    EXPECT_NEAR(intercept, std::log(3.0), 1e-12);
}

TEST_F(CliTest, AdaptZeroEpochsAndCurves) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(0)));
    AdaptOptions o;
    o.source = path("source.csv");
    o.target = path("target.csv");
    o.config.epochs = 0;
    o.out = path("a.json");
    std::ostringstream log;
    const RunReport r = cmd_adapt(o, log);
    EXPECT_EQ(*r.training->target_accuracy_before, *r.training->target_accuracy_after);
    EXPECT_EQ(r.config["lambda1"], 0.5);
    EXPECT_EQ(r.config["lambda2"], 1.0);
    EXPECT_EQ(r.config["epsilon"], 0.01);
    EXPECT_TRUE(fs::exists(path("a_curves.csv")));
}

TEST_F(CliTest, AdaptVariantColumns) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(1)));
    for (const std::string v : {"ckb", "ckb+mmd"}) {
        const std::string stem = v == "ckb" ? "plain" : "joint";
        ASSERT_EQ(run("adapt --source " + path("source.csv") + " --target " + path("target.csv") +
                      " --epochs 7 --variant " + v + " --out " + path(stem + ".json")),
                  0);
        const std::string curves = slurp(stem + "_curves.csv");
        const std::string header = curves.substr(0, curves.find('\n'));
        EXPECT_EQ(header.find("mmd") != std::string::npos, v == "ckb+mmd");
        const RunReport r = read_report(path(stem + ".json"));
        bool nonzero = false;
        for (const LossRecord& h : r.training->history) {
            EXPECT_EQ(h.mmd.has_value(), v == "ckb+mmd");
            nonzero = nonzero || h.mmd.value_or(0.0) != 0.0;
        }
        EXPECT_EQ(nonzero, v == "ckb+mmd");
    }
}

TEST_F(CliTest, AdaptExitCodes) {
    write_pair(synth_conditional_shift(ShiftConfig::default_benchmark(2)));
    const std::string base = "adapt --source " + path("source.csv") + " --target " + path("target.csv");
    EXPECT_EQ(run(base + " --batch-size 2"), 2);
    EXPECT_EQ(run(base + " --variant mmd"), 2);
    EXPECT_EQ(run(base + " --learning-rate 1e200 --epochs 20 --out " + path("div.json")), 3);
    std::ofstream(path("nolabels.csv")) << "f0,f1\n0,1\n1,0\n2,2\n";
    EXPECT_EQ(run("adapt --source " + path("nolabels.csv") + " --target " + path("target.csv")), 2);
}

TEST_F(CliTest, GenWritesReadableCsv) {
    GenOptions o;
    o.benchmark = "swap";
    o.out_dir = path("gen");
    std::ostringstream log;
    const DomainPair p = cmd_gen(o, log);
    const LabeledDataset back = load_csv(path("gen/target.csv"));
    EXPECT_EQ(back.X, p.target.X);
    EXPECT_EQ(run("gen --benchmark unknown"), 2);
}

TEST(IntRange, Parse) {
    EXPECT_EQ(IntRange::parse("3", "x").lo, 3);
    EXPECT_EQ(IntRange::parse("2-10", "x").hi, 10);
    EXPECT_THROW(IntRange::parse("5-2", "x"), InputError);
    EXPECT_THROW(IntRange::parse("a", "x"), InputError);
}
