#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include <koba/cli.hpp>
#include <koba/version.hpp>

namespace fs = std::filesystem;

namespace
{

struct Result {
    int code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("koba-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    std::string prefix(const std::string &name) const { return (dir_ / name).string(); }

    static Result run(std::vector<std::string> args)
    {
        std::ostringstream out, err;
        const int code = koba::cli::run(args, out, err);
        return {code, out.str(), err.str()};
    }

    static std::string slurp(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

TEST_F(Cli, DiniPrintsInverseLogTwo)
{
    const Result r = run({"dini", "--modulus", "log:1", "--sigma", "0.5", "--out", prefix("d")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(std::stod(r.out), 1.442695, 1e-6);
}

TEST_F(Cli, UnknownModulusKindIsConfigError)
{
    const Result r = run({"dini", "--modulus", "bogus:1", "--sigma", "0.5", "--out", prefix("d")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("unknown modulus kind"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(prefix("d") + ".csv"));
}

TEST_F(Cli, AlmostGeodesicCsvHeader)
{
    const Result r = run({"almost-geodesic", "--domain", "ball:2", "--xi", "1,0,0,0", "--eps", "0.25", "--T", "8",
                          "--out", prefix("ag")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(prefix("ag") + ".csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,t,lo,hi,defect");
}

TEST_F(Cli, SidecarEmbedsConfigAndVersion)
{
    ASSERT_EQ(run({"dini", "--modulus", "hoelder:0.5:1", "--sigma", "0.25", "--out", prefix("d")}).code, 0);
    const auto j = nlohmann::json::parse(slurp(prefix("d") + ".json"));
    EXPECT_EQ(j["version"], std::string(koba::version));
    EXPECT_EQ(j["command"], "dini");
    EXPECT_EQ(j["config"]["modulus"], "hoelder:0.5:1");
    EXPECT_EQ(j["config"]["sigma"], "0.25");
    EXPECT_EQ(j["config"]["tol"], "1e-10");
    EXPECT_EQ(j["status"], "ok");
    EXPECT_NEAR(j["summary"]["value"].get<double>(), 1.0, 1e-9);
}

TEST_F(Cli, ConfigFileWithFlagOverride)
{
    const std::string cfg = prefix("cfg.json");
    std::ofstream(cfg) << R"({"modulus": "hoelder:0.5:1", "sigma": 0.5, "tol": 1e-10})";
    Result r = run({"dini", "--config", cfg, "--out", prefix("a")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(std::stod(r.out), 2 * std::sqrt(0.5), 1e-9);
    r = run({"dini", "--config", cfg, "--sigma", "0.25", "--out", prefix("b")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(std::stod(r.out), 1.0, 1e-9);
}

TEST_F(Cli, UnknownConfigKeyRejected)
{
    const std::string cfg = prefix("cfg.json");
    std::ofstream(cfg) << R"({"modulus": "log:1", "sigma": 0.5, "sigmaa": 0.25})";
    const Result r = run({"dini", "--config", cfg, "--out", prefix("d")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("sigmaa"), std::string::npos);
}

TEST_F(Cli, ConfigErrors)
{
    EXPECT_EQ(run({"dini", "--modulus", "log:1"}).code, 2);
    EXPECT_EQ(run({"dini", "--modulus", "log:1", "--sigma", "abc"}).code, 2);
    EXPECT_EQ(run({"dini", "--modulus", "log:1", "--sigma", "0.5", "--nope", "1"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    const Result r = run({"metric", "--domain", "cube:2", "--point", "0,0", "--dir", "1,0"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cube"), std::string::npos);
    EXPECT_EQ(run({"metric", "--domain", "ball:2", "--point", "0,0", "--dir", "1,0"}).code, 2);
    EXPECT_EQ(run({"dini", "--config", prefix("missing.json")}).code, 2);
}

TEST_F(Cli, SeedMandatoryForSampling)
{
    EXPECT_EQ(run({"embed-check", "--domain", "ball:2", "--modulus", "linear:2", "--out", prefix("e")}).code, 2);
    EXPECT_EQ(run({"distance", "--domain", "ball:1", "--random-pairs", "3", "--out", prefix("e")}).code, 2);
    EXPECT_EQ(run({"almost-geodesic", "--domain", "ball:1", "--xi", "1,0", "--modulus", "linear:2"}).code, 2);
    EXPECT_EQ(run({"embed-check", "--domain", "ball:2", "--modulus", "linear:2", "--seed", "7", "--out",
                   prefix("e")})
                  .code,
              0);
}

TEST_F(Cli, ByteIdenticalRerun)
{
    const std::vector<std::string> a{"distance", "--domain", "ball:2", "--random-pairs", "5", "--seed", "11",
                                     "--oracle", "ball", "--out", prefix("one")};
    std::vector<std::string> b = a;
    b.back() = prefix("two");
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    const std::string one = slurp(prefix("one") + ".csv");
    EXPECT_FALSE(one.empty());
    EXPECT_EQ(one, slurp(prefix("two") + ".csv"));
}

TEST_F(Cli, ToleranceFailureReportsBestBracket)
{
    const Result r = run({"metric", "--domain", "ball:1", "--point", "0.5,0", "--dir", "1,0", "--tol", "1e-17",
                          "--out", prefix("m")});
    EXPECT_EQ(r.code, 1);
    const auto j = nlohmann::json::parse(slurp(prefix("m") + ".json"));
    EXPECT_EQ(j["status"], "failure");
    EXPECT_EQ(j["error"]["kind"], "tolerance-not-met");
    EXPECT_LE(j["summary"]["best_lo"].get<double>(), 0.5);
    EXPECT_GE(j["summary"]["best_hi"].get<double>(), 0.5 - 1e-15);
}

TEST_F(Cli, ExperimentFailureExitsOne)
{
    const Result r = run({"gromov-experiment", "--domain", "ball:1", "--xi", "1,0", "--expect",
                          "bounded", "--out", prefix("g")});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "diverging\n");
}

TEST_F(Cli, MetricOracle)
{
    const Result r = run({"metric", "--domain", "ball:1", "--point", "0.5,0", "--dir", "1,0", "--oracle", "disc",
                          "--out", prefix("m")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(prefix("m") + ".json"));
    EXPECT_NEAR(j["summary"]["exact"].get<double>(), 4.0 / 3.0, 1e-12);
    EXPECT_TRUE(j["summary"]["contained"].get<bool>());
}

TEST_F(Cli, ExtensionProbe)
{
    const Result r = run({"extension-probe", "--map", "disc-aut:0.3,0.1", "--xi", "1,0", "--out", prefix("x")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(prefix("x") + ".csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "tail_start,diameter");
    EXPECT_EQ(run({"extension-probe", "--map", "rotate:1", "--xi", "1,0"}).code, 2);
}

TEST_F(Cli, ThreadEnvValidated)
{
    ::setenv("KOBA_THREADS", "zero", 1);
    EXPECT_EQ(run({"dini", "--modulus", "log:1", "--sigma", "0.5", "--out", prefix("d")}).code, 2);
    ::setenv("KOBA_THREADS", "0", 1);
    EXPECT_EQ(run({"dini", "--modulus", "log:1", "--sigma", "0.5", "--out", prefix("d")}).code, 2);
    ::setenv("KOBA_THREADS", "2", 1);
    EXPECT_EQ(run({"dini", "--modulus", "log:1", "--sigma", "0.5", "--out", prefix("d")}).code, 0);
    ::unsetenv("KOBA_THREADS");
}

TEST_F(Cli, HelpExitsZero)
{
    const Result r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("gromov-experiment"), std::string::npos);
}

} // namespace
