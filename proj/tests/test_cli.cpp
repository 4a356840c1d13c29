#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "tollcap/cli.hpp"

using namespace tollcap;
using io::json;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(cli::RunConfig cfg) {
    std::ostringstream out, err;
    const int code = cli::run(cfg, out, err);
    return {code, out.str()};
}

cli::RunConfig preset(const std::string& command, const std::string& name) {
    cli::RunConfig cfg;
    cfg.command = command;
    cfg.preset = name;
    return cfg;
}

std::string data_file(const std::string& name) {
    const char* dir = std::getenv("TOLLCAP_DATA");
    return std::string(dir ? dir : TOLLCAP_DATA_DIR) + "/" + name;
}

/// Runs the built binary; stdout captured, exit status decoded.
Result shell(const std::string& args) {
    const char* env = std::getenv("TOLLCAP_CLI");
    const std::string exe = env ? env : TOLLCAP_CLI_PATH;
    const std::string cmd = exe + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST(Cli, WardropFigAlg) {
    auto cfg = preset("wardrop", "fig-alg");
    cfg.tolls = std::vector<double>{0.0, 0.0};
    const auto r = run(cfg);
    ASSERT_EQ(r.code, 0);
    const auto doc = json::parse(r.out);
    EXPECT_NEAR(doc["flow"][0].get<double>(), 0.75, 1e-12);
    EXPECT_NEAR(doc["flow"][1].get<double>(), 0.25, 1e-12);
    EXPECT_TRUE(doc["verified"].get<bool>());
}

TEST(Cli, OptimalCapFigAlg) {
    const auto r = run(preset("optimal-cap", "fig-alg"));
    ASSERT_EQ(r.code, 0);
    const auto doc = json::parse(r.out);
    EXPECT_NEAR(doc["c_star"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(doc["cost"].get<double>(), 0.71875, 1e-12);
    EXPECT_NEAR(doc["breakpoints"][0].get<double>(), 7.0 / 6.0, 1e-12);
    EXPECT_NEAR(doc["breakpoints"][1].get<double>(), 0.5, 1e-12);
}

TEST(Cli, SpneFigBadUncapped) {
    auto cfg = preset("spne", "fig-bad");
    cfg.preset_params.a2 = 2.0;
    cfg.cap = kInf;
    const auto r = run(cfg);
    ASSERT_EQ(r.code, 0);
    const auto doc = json::parse(r.out);
    EXPECT_NEAR(doc["tolls"][0].get<double>(), 5.0 / 3.0, 1e-9);
    EXPECT_NEAR(doc["tolls"][1].get<double>(), 4.0 / 3.0, 1e-9);
    EXPECT_EQ(doc["cap"].get<std::string>(), "inf");
}

TEST(Cli, SpneGeneralPaths) {
    auto aff = preset("spne", "fig-aff");
    aff.preset_params.n = 3;
    aff.cap = 0.1;
    const auto r = run(aff);
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["status"].get<std::string>(), "verified");
    const auto mul = run(preset("spne", "fig-mul"));
    EXPECT_EQ(mul.code, 0);
}

TEST(Cli, DuopolySearchNonexistence) {
    auto cfg = preset("duopoly-search", "fig-non");
    cfg.cap = 1.0;
    const auto r = run(cfg);
    EXPECT_EQ(r.code, 4);
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["status"].get<std::string>(), "none_found");
    EXPECT_FALSE(doc["certificate"].get<std::string>().empty());
}

TEST(Cli, NotApplicable) {
    EXPECT_EQ(run(preset("optimal-cap", "fig-mul")).code, 3);
    EXPECT_EQ(run(preset("optimal-cap", "fig-non")).code, 3);
    EXPECT_EQ(run(preset("sweep", "fig-aff")).code, 3);
}

TEST(Cli, ParseFailures) {
    EXPECT_EQ(run(preset("wardrop", "fig-nope")).code, 1);
    cli::RunConfig none;
    none.command = "wardrop";
    EXPECT_EQ(run(none).code, 1);
    auto both = preset("wardrop", "fig-alg");
    both.instance_path = data_file("fig-alg.json");
    EXPECT_EQ(run(both).code, 1);
    cli::RunConfig missing;
    missing.command = "wardrop";
    missing.instance_path = data_file("missing.json");
    EXPECT_EQ(run(missing).code, 1);
    EXPECT_EQ(run(preset("fly", "fig-alg")).code, 1);
    EXPECT_EQ(run(preset("spne", "fig-bad")).code, 1);  // needs --a2
    auto grid = preset("best-response", "fig-alg");
    grid.grid_n = 0;
    EXPECT_EQ(run(grid).code, 1);
}

TEST(Cli, ValidationFailure) {
    cli::RunConfig cfg;
    cfg.command = "wardrop";
    cfg.instance_path = data_file("negative.json");
    const auto r = run(cfg);
    EXPECT_EQ(r.code, 2);
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["error"]["links"], json::array({2, 3}));
    auto wrong = preset("wardrop", "fig-alg");
    wrong.tolls = std::vector<double>{0.0};
    EXPECT_EQ(run(wrong).code, 2);
}

TEST(Cli, CsvOutputs) {
    auto sw = preset("sweep", "fig-alg");
    sw.format = "csv";
    sw.c_lo = 0.0;
    sw.c_hi = 1.5;
    sw.steps = 4;
    const auto r = run(sw);
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "c,K,cost,t_1,t_2,x_1,x_2");

    auto br = preset("best-response", "fig-non");
    br.format = "csv";
    br.cap = 3.0;
    br.grid_n = 30;
    const auto t = run(br);
    ASSERT_EQ(t.code, 0);
    EXPECT_EQ(t.out.substr(0, t.out.find('\n')), "t_opponent,br_lo,br_hi,profit");

    cli::RunConfig bounds;
    bounds.command = "bounds";
    bounds.format = "csv";
    bounds.d_max = 4;
    const auto b = run(bounds);
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(b.out.substr(0, b.out.find('\n')), "d,upper_bound,lower_bound_nonexistence");
}

TEST(Cli, ReportBundles) {
    cli::RunConfig cfg;
    cfg.command = "report";
    cfg.instance_path = data_file("fig-alg.json");
    const auto r = run(cfg);
    ASSERT_EQ(r.code, 0);
    const auto doc = json::parse(r.out);
    for (const char* key : {"validation", "wardrop", "optimal_flow", "spne", "optimal_cap", "efficiency"})
        EXPECT_TRUE(doc.contains(key)) << key;
    EXPECT_NEAR(doc["efficiency"]["ratio"].get<double>(), 1.0, 1e-12);

    auto non_affine = preset("report", "fig-aff");
    const auto a = run(non_affine);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(json::parse(a.out)["optimal_cap"]["status"].get<std::string>(), "not_applicable");
}

TEST(Cli, VerifyAcceptsOwnOutputs) {
    const auto dir = std::filesystem::temp_directory_path() / "tollcap_cli_test";
    std::filesystem::create_directories(dir);
    struct Case {
        std::string command;
        std::string name;
        std::optional<double> a2;
        std::optional<double> cap;
    };
    const std::vector<Case> cases{{"spne", "fig-alg", {}, {}},       {"spne", "fig-alg", {}, 0.8},
                                  {"spne", "fig-bad", 2.0, {}},      {"spne", "fig-bad", 10.0, 3.0},
                                  {"optimal-cap", "fig-alg", {}, {}}, {"optimal-cap", "fig-bad", 5.0, {}}};
    for (const auto& c : cases) {
        auto cfg = preset(c.command, c.name);
        cfg.preset_params.a2 = c.a2;
        cfg.cap = c.cap;
        cfg.output = (dir / "result.json").string();
        ASSERT_EQ(run(cfg).code, 0);
        auto check = preset("verify", c.name);
        check.preset_params.a2 = c.a2;
        check.result_path = cfg.output;
        check.eps = 1e-7;
        const auto v = run(check);
        EXPECT_EQ(v.code, 0) << c.command << " " << c.name;
        EXPECT_LE(json::parse(v.out)["max_deviation_gain"].get<double>(), 1e-7);
    }
    auto bad = preset("verify", "fig-alg");
    bad.tolls = std::vector<double>{2.0, 2.0};
    bad.cap = 100.0;
    EXPECT_EQ(run(bad).code, 5);
    std::filesystem::remove_all(dir);
}

TEST(Cli, Deterministic) {
    for (const auto& cmd : {"optimal-cap", "report", "spne"}) {
        const auto a = run(preset(cmd, "fig-alg"));
        const auto b = run(preset(cmd, "fig-alg"));
        EXPECT_EQ(a.out, b.out) << cmd;
    }
    auto search = preset("duopoly-search", "fig-non");
    search.cap = 0.3;
    search.grid_n = 300;
    EXPECT_EQ(run(search).out, run(search).out);
}

TEST(CliBinary, ExitCodesAndDeterminism) {
    const auto a = shell("optimal-cap --preset fig-alg");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, shell("optimal-cap --preset fig-alg").out);
    EXPECT_NEAR(json::parse(a.out)["c_star"].get<double>(), 1.0, 1e-12);

    const auto spne = shell("spne --preset fig-bad --a2 2 --cap inf");
    EXPECT_EQ(spne.code, 0);
    EXPECT_NEAR(json::parse(spne.out)["tolls"][0].get<double>(), 5.0 / 3.0, 1e-9);

    EXPECT_EQ(shell("duopoly-search --preset fig-non --cap 1.0").code, 4);
    EXPECT_EQ(shell("optimal-cap --preset fig-mul").code, 3);
    EXPECT_EQ(shell("wardrop --preset nowhere").code, 1);
    EXPECT_EQ(shell("wardrop --preset fig-alg --cap abc").code, 1);
    EXPECT_EQ(shell("wardrop --instance " + data_file("negative.json")).code, 2);

    const auto w = shell("wardrop --preset fig-alg --tolls 0,0");
    EXPECT_EQ(w.code, 0);
    EXPECT_NEAR(json::parse(w.out)["flow"][0].get<double>(), 0.75, 1e-12);
}
