#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fnlab/cli.hpp"

using namespace fnlab;
using namespace fnlab::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "fnlab_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

int run_cli(const std::string& args, const std::string& out_name = "") {
    std::string cmd = std::string(FNLAB_CLI_PATH) + " " + args;
    if (!out_name.empty()) cmd += " --out " + scratch(out_name).string();
    cmd += " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ParseConfig, RunScenarioIdUsesDefaults) {
    const RunConfig c = parse_config({"run", "scn_kesten"});
    EXPECT_EQ(c.scenario, "kesten");
    EXPECT_EQ(c.seed, 0u);
    EXPECT_FALSE(c.radii.has_value());
    const KestenParams defaults;
    EXPECT_EQ(defaults.radii, (std::vector<int>{2, 4, 6, 8}));
    EXPECT_EQ(defaults.levels, 100000u);
}

TEST(ParseConfig, ListsAndSeed) {
    const RunConfig c = parse_config({"haagerup", "--dims", "50,100,200", "--seed", "7"});
    EXPECT_EQ(c.scenario, "haagerup");
    EXPECT_EQ(c.seed, 7u);
    ASSERT_TRUE(c.dims.has_value());
    EXPECT_EQ(*c.dims, (std::vector<Index>{50, 100, 200}));
    const RunConfig d = parse_config({"rho-flatness", "--t-grid=0,0.5,1", "--format", "csv", "--threads", "2"});
    EXPECT_EQ(*d.t_grid, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(d.format, "csv");
    EXPECT_EQ(d.threads, 2);
}

TEST(ParseConfig, NegativeRadiusIsUsageError) {
    try {
        (void)parse_config({"fell", "--radius", "-1"});
        FAIL() << "expected a usage error";
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("radius"), std::string::npos);
    }
}

TEST(ParseConfig, MalformedValuesNameTheKey) {
    for (const auto& args : std::vector<std::vector<std::string>>{{"kesten", "--levels", "abc"},
                                                                 {"kesten", "--seed", "-3"},
                                                                 {"haagerup", "--dims", "10,,20"},
                                                                 {"equicont", "--s-grid", "0,1.5"},
                                                                 {"kesten", "--tol", "0"},
                                                                 {"kesten", "--format", "xml"}}) {
        try {
            (void)parse_config(args);
            ADD_FAILURE() << args[1];
        } catch (const UsageError& e) {
            EXPECT_NE(std::string(e.what()).find(args[1].substr(2)), std::string::npos) << e.what();
        }
    }
}

TEST(ParseConfig, UnknownScenarioAndFlag) {
    EXPECT_THROW(parse_config({"nope"}), UsageError);
    EXPECT_THROW(parse_config({"run", "scn_nope"}), UsageError);
    EXPECT_THROW(parse_config({}), UsageError);
    EXPECT_THROW(parse_config({"kesten", "--bogus", "1"}), UsageError);
    EXPECT_THROW(parse_config({"kesten", "extra"}), UsageError);
}

TEST(ParseConfig, FilePrecedence) {
    const auto path = scratch("precedence.cfg");
    {
        std::ofstream f(path);
        f << "# comment\nseed = 11\ndims = 4, 6\nradius = 2  # trailing\n\n";
    }
    const RunConfig fromfile = parse_config({"semiinv", "--config", path.string()});
    EXPECT_EQ(fromfile.seed, 11u);
    EXPECT_EQ(*fromfile.dims, (std::vector<Index>{4, 6}));
    EXPECT_EQ(*fromfile.radius, 2);
    const RunConfig flags = parse_config({"semiinv", "--config", path.string(), "--seed", "3"});
    EXPECT_EQ(flags.seed, 3u);
    EXPECT_EQ(*flags.dims, (std::vector<Index>{4, 6}));
}

TEST(ParseConfig, UnknownKeyInFile) {
    const auto path = scratch("unknown.cfg");
    {
        std::ofstream f(path);
        f << "seed = 1\nwibble = 2\n";
    }
    try {
        (void)parse_config({"kesten", "--config", path.string()});
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("wibble"), std::string::npos);
    }
    EXPECT_THROW(parse_config({"kesten", "--config", scratch("missing.cfg").string()}), UsageError);
}

TEST(ParseConfig, AllNamesResolve) {
    for (const auto& [cmd, id] : scenario_names()) {
        EXPECT_EQ(canonical_scenario(cmd), cmd);
        EXPECT_EQ(canonical_scenario(id), cmd);
    }
    EXPECT_EQ(canonical_scenario("all"), "all");
}

TEST(Dispatch, KestenDefaultsWritesJson) {
    EXPECT_EQ(run_cli("kesten", "kesten.json"), 0);
    const auto j = nlohmann::json::parse(slurp(scratch("kesten.json")));
    EXPECT_EQ(j["schema"], "free-norm-lab/1");
    EXPECT_EQ(j["scenario"], "scn_kesten");
    EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(Dispatch, TamperedFellToleranceExitsOne) {
    EXPECT_EQ(run_cli("fell --radius 3 --check-tol 1e-20"), 1);
}

TEST(Dispatch, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli("not-a-scenario"), 2);
    EXPECT_EQ(run_cli("kesten --radius -1"), 2);
    EXPECT_EQ(run_cli("m-decomp --dims 4,4 --radius 1 --t 9"), 2);
}

TEST(Dispatch, CsvOutput) {
    EXPECT_EQ(run_cli("semiinv --radius 1 --dims 2,3,2 --format csv", "semiinv.csv"), 0);
    const std::string csv = slurp(scratch("semiinv.csv"));
    EXPECT_EQ(csv.rfind("scenario,block,", 0), 0u);
    EXPECT_NE(csv.find("\nscn_semiinv,1,moving,"), std::string::npos);
}

TEST(Dispatch, SameCommandTwiceIsIdentical) {
    const std::string args = "tensor-bound --dims 3,4 --contrast-dim 0 --seed 5";
    ASSERT_EQ(run_cli(args, "tb1.json"), 0);
    ASSERT_EQ(run_cli(args, "tb2.json"), 0);
    auto a = nlohmann::ordered_json::parse(slurp(scratch("tb1.json")));
    auto b = nlohmann::ordered_json::parse(slurp(scratch("tb2.json")));
    strip_metadata(a);
    strip_metadata(b);
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Dispatch, HelpExitsZero) { EXPECT_EQ(run_cli("--help"), 0); }
