#include "gridgbm/config.hpp"
#include "gridgbm/pricing.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace gridgbm;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gridgbm_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(GRIDGBM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json readJson(const fs::path& p) {
    std::ifstream is(p);
    return nlohmann::json::parse(is);
}

std::string readText(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, PriceAtSigmaBarIsBlackScholes) {
    const auto dir = scratch("price");
    ASSERT_EQ(run("price --out " + dir.string() + " --set vol.kind=black-scholes"), 0);
    const auto q = readJson(dir / "quote.json");
    EXPECT_NEAR(q["price"].get<double>(), bsPrice(100.0, 100.0, 0.05, 0.2, 1.0), 1e-12);
    EXPECT_TRUE(fs::exists(dir / "config.ini"));
    EXPECT_EQ(parseConfigString(readText(dir / "config.ini")).vol.kind, "black-scholes");
}

TEST(Cli, InvertThenPriceReproducesTarget) {
    const auto dir = scratch("invert");
    ASSERT_EQ(run("invert-nu --target 30 --out " + dir.string()), 0);
    const double nu = readJson(dir / "invert.json")["nu"].get<double>();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", nu);
    ASSERT_EQ(run("price --out " + dir.string() + " --set vol.nu=" + buf), 0);
    EXPECT_NEAR(readJson(dir / "quote.json")["price"].get<double>(), 30.0, 1e-6);
}

TEST(Cli, ValidateDefaultConfigPassesAndIsDeterministic) {
    const auto a = scratch("validate_a"), b = scratch("validate_b");
    ASSERT_EQ(run("validate --out " + a.string()), 0);
    ASSERT_EQ(run("validate --out " + b.string() + " --threads 3"), 0);
    EXPECT_EQ(readText(a / "validation.json"), readText(b / "validation.json"));
    ASSERT_EQ(run("simulate --out " + a.string() + " --set run.n_paths=50"), 0);
    ASSERT_EQ(run("simulate --out " + b.string() + " --set run.n_paths=50"), 0);
    EXPECT_EQ(readText(a / "paths.csv"), readText(b / "paths.csv"));
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("codes");
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("price --out " + dir.string() + " --set market.s0=abc"), 2);
    EXPECT_EQ(run("invert-nu --target 500 --out " + dir.string()), 2);
    EXPECT_EQ(run("fp-residual --out " + dir.string() + " --set fp.nt=20 --set fp.nx=20 --set fp.t_min=0.3 --set fp.x_min=60"), 1);
    EXPECT_EQ(run("fp-residual --out " + dir.string() + " --set fp.nt=20 --set fp.nx=20"), 2);
    EXPECT_EQ(run("drift-check --out " + dir.string() + " --set vol.kind=sqrt-proportional --set vol.nu=2"), 0);
    EXPECT_EQ(run("bounds --out " + dir.string()), 0);
}

TEST(Cli, OutputDirFromEnvironment) {
    const auto dir = scratch("env");
    ASSERT_EQ(setenv("GRIDGBM_OUTPUT_DIR", dir.c_str(), 1), 0);
    EXPECT_EQ(run("bounds"), 0);
    unsetenv("GRIDGBM_OUTPUT_DIR");
    EXPECT_TRUE(fs::exists(dir / "bounds.json"));
}
