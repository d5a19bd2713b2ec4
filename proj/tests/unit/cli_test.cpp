#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int status;
    std::string out;
};

CliRun run(const std::string& args) {
    static int counter = 0;
    std::string tag = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::path out = fs::temp_directory_path() / ("wdrm_cli_" + tag + std::to_string(counter++) + ".out");
    std::string cmd = std::string(WDRM_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
    int raw = std::system(cmd.c_str());
    std::ifstream f(out);
    std::stringstream s;
    s << f.rdbuf();
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, s.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
    std::string tag = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::path p = fs::temp_directory_path() / (tag + "_" + name);
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace

TEST(Cli, GenIsReproducible) {
    CliRun a = run("gen --n 3 --seed 7");
    CliRun b = run("gen --n 3 --seed 7");
    EXPECT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 3);
}

TEST(Cli, GenLargeSampleMean) {
    CliRun a = run("gen --n 200 --seed 42 --lo 0 --hi 10");
    std::istringstream in(a.out);
    double x, sum = 0;
    int n = 0;
    while (in >> x) sum += x, ++n;
    ASSERT_EQ(n, 200);
    EXPECT_NEAR(sum / n, 5.0, 0.5);
}

TEST(Cli, GenRejectsEmpty) { EXPECT_NE(run("gen --n 0").status, 0); }

TEST(Cli, EvalTwoPoints) {
    std::string s = write_temp("wdrm_cli_two.txt", "0.2\n0.8\n");
    CliRun r = run("eval --samples " + s + " --g dual:2");
    ASSERT_EQ(r.status, 0);
    EXPECT_NEAR(nlohmann::json::parse(r.out)["value"].get<double>(), 0.65, 1e-12);
}

TEST(Cli, WassersteinPointMassCurve) {
    std::string s = write_temp("wdrm_cli_ends.txt", "0\n1\n");
    std::string c = write_temp("wdrm_cli_delta.csv", "x,F\n0,0\n0.5,0\n0.5,1\n1,1\n");
    CliRun r = run("wasserstein --samples " + s + " --curve " + c + " --p 3");
    ASSERT_EQ(r.status, 0);
    EXPECT_NEAR(nlohmann::json::parse(r.out)["value"].get<double>(), 0.5, 1e-9);
}

TEST(Cli, ReportKeySet) {
    std::string s = write_temp("wdrm_cli_pair.txt", "0.25\n0.75\n");
    CliRun r = run("solve-a --samples " + s + " --g dual:2 --p 2 --eps 0.2");
    ASSERT_EQ(r.status, 0);
    auto j = nlohmann::json::parse(r.out);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    std::vector<std::string> expected{"binding",    "budget_used", "config_echo", "eta1",  "etap",
                                      "iterations", "lambda",      "residuals",   "value"};
    EXPECT_EQ(keys, expected);
    EXPECT_NEAR(j["value"].get<double>(), 0.8507, 1e-9);
}

TEST(Cli, CurveRoundTrip) {
    std::string s = write_temp("wdrm_cli_pair.txt", "0.25\n0.75\n");
    std::string curve = (fs::temp_directory_path() / "wdrm_cli_roundtrip_curve.csv").string();
    CliRun r = run("solve-b --samples " + s + " --g dual:2 --p 2 --eps 0.15 --c1 0.5 --cp 0.29 --curve " + curve);
    ASSERT_EQ(r.status, 0);
    double value = nlohmann::json::parse(r.out)["value"].get<double>();
    CliRun e = run("eval --curve " + curve + " --g dual:2");
    ASSERT_EQ(e.status, 0);
    EXPECT_NEAR(nlohmann::json::parse(e.out)["value"].get<double>(), value, 2e-3);
}

TEST(Cli, ExitCodes) {
    std::string s = write_temp("wdrm_cli_pair.txt", "0.25\n0.75\n");
    EXPECT_EQ(run("solve-b --samples " + s + " --g dual:2 --eps 0.1 --cp 0.3").status, 2);
    EXPECT_EQ(run("solve-a --samples " + s + " --g dual:2 --eps 0.1 --support unbounded --p 3").status, 2);
    EXPECT_EQ(run("solve-a --samples " + s + " --g cubic:2 --eps 0.1").status, 2);
    EXPECT_EQ(run("solve-a --bogus").status, 2);
    EXPECT_EQ(run("solve-b --samples " + s + " --g dual:3 --eps 0.05 --c1 0.55 --cp 0.35").status, 1);
}
