#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "powerlaw/cli.hpp"

namespace fs = std::filesystem;
using namespace powerlaw;
using cli::RunConfig;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("powerlaw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        std::ofstream(dir_ / name) << text;
        return (dir_ / name).string();
    }

    std::string simulated_panel(std::size_t periods = 240) {
        RunConfig c;
        c.subcommand = "simulate";
        c.output_dir = (dir_ / "sim").string();
        c.periods = periods;
        c.n = 6;
        c.seed = 3;
        std::ostringstream log;
        EXPECT_EQ(cli::run(c, log), cli::kOk) << log.str();
        return (dir_ / "sim" / "panel.csv").string();
    }

    int run(RunConfig c, const std::string& out) {
        c.output_dir = (dir_ / out).string();
        std::ostringstream log;
        return cli::run(c, log);
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, EstimateWritesOutputsAndManifest) {
    RunConfig c;
    c.subcommand = "estimate";
    c.input = simulated_panel();
    ASSERT_EQ(run(c, "est"), cli::kOk);
    for (const char* f : {"estimates.json", "alpha.csv", "sigma2.csv", "kappa.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir_ / "est" / f)) << f;
    std::ifstream in(dir_ / "est" / "estimates.json");
    const auto j = io::Json::parse(in);
    EXPECT_EQ(j["alpha"].size(), 6u);
    EXPECT_EQ(j["n"], 6);
}

TEST_F(CliTest, MissingInputFileIsInputError) {
    RunConfig c;
    c.subcommand = "estimate";
    c.input = (dir_ / "nope.csv").string();
    EXPECT_EQ(run(c, "x"), cli::kInputError);
    EXPECT_FALSE(fs::exists(dir_ / "x"));
}

TEST_F(CliTest, BadPanelIsInputError) {
    RunConfig c;
    c.subcommand = "estimate";
    c.input = write("bad.csv", "d,a,b\n1,1,0\n2,1,1\n");
    EXPECT_EQ(run(c, "x"), cli::kInputError);
}

TEST_F(CliTest, PredictWithViolatingEstimatesIsStationarityError) {
    RunConfig c;
    c.subcommand = "predict";
    c.estimates = write("est.json", R"({"alpha":[0.1,-0.1],"sigma2":[0.2],"kappa":[-0.2]})");
    EXPECT_EQ(run(c, "p"), cli::kStationarityViolation);
    EXPECT_FALSE(fs::exists(dir_ / "p"));
}

TEST_F(CliTest, PredictFromEstimatesFile) {
    RunConfig c;
    c.subcommand = "predict";
    c.estimates = write("est.json", R"({"alpha":[-0.05,-0.05,0.1],"sigma2":[0.2,0.2],"kappa":[0.1,0.2]})");
    ASSERT_EQ(run(c, "p"), cli::kOk);
    std::ifstream in(dir_ / "p" / "prediction.json");
    const auto j = io::Json::parse(in);
    EXPECT_NEAR(j["predicted_gaps"][0].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["predicted_gaps"][1].get<double>(), 0.5, 1e-12);
}

TEST_F(CliTest, FailedRunRemovesPartialOutputs) {
    // Estimates succeed, then prediction fails: nothing may be left behind.
    RunConfig c;
    c.subcommand = "predict";
    c.input = simulated_panel();
    c.smoothing = "none";
    c.estimates = write("est.json", R"({"alpha":[0.1,-0.1],"sigma2":[0.2],"kappa":[-0.2]})");
    fs::create_directories(dir_ / "keep");
    std::ofstream(dir_ / "keep" / "other.txt") << "x";
    EXPECT_NE(run(c, "keep"), cli::kOk);
    EXPECT_TRUE(fs::exists(dir_ / "keep" / "other.txt"));
    EXPECT_FALSE(fs::exists(dir_ / "keep" / "predicted.csv"));
    EXPECT_FALSE(fs::exists(dir_ / "keep" / "manifest.json"));
}

TEST_F(CliTest, BacktestAndReport) {
    RunConfig c;
    c.input = simulated_panel();
    c.subcommand = "backtest";
    ASSERT_EQ(run(c, "bt"), cli::kOk);
    EXPECT_TRUE(fs::exists(dir_ / "bt" / "portfolio.csv"));
    c.subcommand = "report";
    c.resamples = 50;
    ASSERT_EQ(run(c, "rep"), cli::kOk);
    for (const char* f : {"estimates.json", "relative_prices.csv", "local_times.csv", "portfolio.csv", "backtest.json"})
        EXPECT_TRUE(fs::exists(dir_ / "rep" / f)) << f;
}

TEST_F(CliTest, SimulateFromSpec) {
    RunConfig c;
    c.subcommand = "simulate";
    c.sim_spec = write("spec.json", R"({"model":"stable","kappa":[0.5,1.0],"sigma":[1.0,1.0],"steps":1000,"seed":5})");
    ASSERT_EQ(run(c, "s"), cli::kOk);
    std::ifstream in(dir_ / "s" / "truth.json");
    const auto j = io::Json::parse(in);
    EXPECT_EQ(j["seed"], 5);
    EXPECT_NEAR(j["truth"]["kappa"][1].get<double>(), 1.0, 1e-15);

    c.sim_spec = write("bad.json", R"({"model":"nope"})");
    EXPECT_EQ(run(c, "s2"), cli::kInputError);
}

TEST_F(CliTest, OutputDirResolution) {
    ::setenv(cli::kOutputDirEnv, "from_env", 1);
    EXPECT_EQ(cli::resolve_output_dir(std::string("flag")), "flag");
    EXPECT_EQ(cli::resolve_output_dir(std::nullopt), "from_env");
    ::unsetenv(cli::kOutputDirEnv);
    EXPECT_EQ(cli::resolve_output_dir(std::nullopt), "out");
}

TEST_F(CliTest, BinaryExitCodes) {
    const std::string bin = POWERLAW_CLI_PATH;
    const auto code = [](const std::string& cmd) {
        const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    EXPECT_EQ(code(bin + " --version"), 0);
    EXPECT_EQ(code(bin + " estimate --bogus"), 2);
    EXPECT_EQ(code(bin + " estimate"), 2);
    const std::string bad = write("bad.csv", "d,a,b\n1,1,0\n2,1,1\n");
    EXPECT_EQ(code(bin + " estimate -i " + bad + " -o " + (dir_ / "o").string()), 2);
    const std::string est = write("est.json", R"({"alpha":[0.1,-0.1],"sigma2":[0.2],"kappa":[-0.2]})");
    EXPECT_EQ(code(bin + " predict --estimates " + est + " -o " + (dir_ / "o").string()), 3);
    EXPECT_EQ(code(bin + " simulate --steps 100 --seed 2 -o " + (dir_ / "o").string()), 0);
    EXPECT_TRUE(fs::exists(dir_ / "o" / "panel.csv"));
}
