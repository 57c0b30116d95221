/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "wedge/cli.hpp"

using namespace wedge;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Scratch directory per test, removed afterwards.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("wedge_cli_" + std::string(info->name()) + "_" + std::to_string(getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    CliResult run(const std::string& args) const {
        const std::string cmd = std::string(WEDGE_CLI_PATH) + " " + args + " >" + path("stdout").string() + " 2>" +
                                path("stderr").string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(path("stdout")), slurp(path("stderr"))};
    }

    fs::path dir_;
};

const char* kFig3Config = R"({
  "model": {"mu": [0.1, -0.2], "sigma": [1.2, 0.5], "rho": 0, "x0": [1, 1]},
  "grid": {"start": 0.1, "stop": 3, "step": 0.1}
})";

const char* kFig1Config = R"({
  "model": {"mu": [2, 3], "sigma": [4, 5], "rho": -0.5, "x0": [9, 10]},
  "observations": [{"t": 0, "x1": 9, "x2": 10}],
  "defaults": [{"firm": 1, "time": 2}],
  "grid": {"start": 1.5, "stop": 2.5, "step": 0.05}
})";

}  // namespace

TEST_F(CliTest, MalformedJsonExitsTwoWithoutOutput) {
    const auto cfg = write("bad.json", "{\"model\": ");
    const CliResult r = run("intensity --config " + cfg.string() + " --out " + path("out.csv").string());
    EXPECT_EQ(r.code, cli::kExitConfig);
    EXPECT_FALSE(fs::exists(path("out.csv")));
    EXPECT_FALSE(fs::exists(path("out.csv.tmp")));
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, InvalidModelExitsTwo) {
    const auto cfg = write("neg.json", R"({"model": {"mu": [0, 0], "sigma": [1, -1], "rho": 0, "x0": [1, 1]}})");
    EXPECT_EQ(run("survival --config " + cfg.string()).code, cli::kExitConfig);
    const auto rho = write("rho.json", R"({"model": {"mu": [0, 0], "sigma": [1, 1], "rho": 1, "x0": [1, 1]}})");
    EXPECT_EQ(run("survival --config " + rho.string()).code, cli::kExitConfig);
    EXPECT_EQ(run("intensity").code, cli::kExitConfig);
    EXPECT_EQ(run("intensity --config " + path("missing.json").string()).code, cli::kExitConfig);
    const auto good = write("good.json", kFig3Config);
    EXPECT_EQ(run("intensity --config " + good.string() + " --tol -1").code, cli::kExitConfig);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, IndependentConfigMatchesClosedForm) {
    const auto cfg = write("fig3.json", kFig3Config);
    const CliResult r = run("intensity --config " + cfg.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const csv::Parsed t = csv::parse(r.out);
    EXPECT_EQ(t.header, (std::vector<std::string>{"u", "lambda1", "lambda2", "regime1", "regime2", "series_terms",
                                                   "quad_err"}));
    ASSERT_EQ(t.rows.size(), 30u);
    const double z1 = 1.0 / 1.2, m1 = 0.1 / 1.2, z2 = 1.0 / 0.5, m2 = -0.2 / 0.5;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double u = *t.value(i, "u");
        const double l2 = pi_hit(z2, u, m2) / pi_survival(z2, u, m2);
        const double l1 = pi_hit(z1, u, m1) / pi_survival(z1, u, m1);
        EXPECT_NEAR(*t.value(i, "lambda2"), l2, 1e-6 * l2) << "u=" << u;
        EXPECT_NEAR(*t.value(i, "lambda1"), l1, 1e-6 * l1) << "u=" << u;
        EXPECT_EQ(t.rows[i][t.column("regime2")], "both_alive");
    }
}

TEST_F(CliTest, NegativeCorrelationDropsAtDefault) {
    const auto cfg = write("fig1.json", kFig1Config);
    const auto out = path("fig1.csv");
    const CliResult r = run("intensity --config " + cfg.string() + " --out " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const csv::Parsed t = csv::parse(slurp(out));
    double before = NAN, after = NAN;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double u = *t.value(i, "u");
        if (std::abs(u - 1.95) < 1e-9)
            before = *t.value(i, "lambda2");
        if (std::abs(u - 2.0) < 1e-9) {
            after = *t.value(i, "lambda2");
            EXPECT_FALSE(t.value(i, "lambda1").has_value());
            EXPECT_EQ(t.rows[i][t.column("regime1")], "target_defaulted");
            EXPECT_EQ(t.rows[i][t.column("regime2")], "co_default_in_window");
        }
    }
    EXPECT_LT(after, 0.1 * before);
}

TEST_F(CliTest, SurvivalIsProductWhenIndependent) {
    const auto cfg = write("fig3.json", kFig3Config);
    const CliResult r = run("survival --config " + cfg.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const csv::Parsed t = csv::parse(r.out);
    const double z1 = 1.0 / 1.2, m1 = 0.1 / 1.2, z2 = 1.0 / 0.5, m2 = -0.2 / 0.5;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double u = *t.value(i, "t");
        const double want = pi_survival(z1, u, m1) * pi_survival(z2, u, m2);
        EXPECT_NEAR(*t.value(i, "survival"), want, 1e-8 * want) << "t=" << u;
    }
}

TEST_F(CliTest, JointGridHasEmptyFieldsBelowDiagonal) {
    const auto cfg = write("fig1.json", kFig1Config);
    const CliResult r = run("joint --config " + cfg.string() + " --s-grid 0:2:0.5 --t-grid 0.5,1,1.5,3");
    ASSERT_EQ(r.code, 0) << r.err;
    const csv::Parsed t = csv::parse(r.out);
    EXPECT_EQ(t.header, (std::vector<std::string>{"s", "t", "g", "quad_err"}));
    ASSERT_EQ(t.rows.size(), 20u);
    int filled = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double s = *t.value(i, "s"), u = *t.value(i, "t");
        const auto g = t.value(i, "g");
        EXPECT_EQ(g.has_value(), s > 0 && u > s) << s << "," << u;
        if (g) {
            ++filled;
            EXPECT_GE(*g, 0.0);
        }
    }
    EXPECT_EQ(filled, 7);
    EXPECT_EQ(run("joint --config " + cfg.string() + " --s-grid 1:x:2 --t-grid 1").code, cli::kExitConfig);
}

TEST_F(CliTest, NumericalFailureExitsThree) {
    // Firm 2 is as good as certain to have defaulted by u = 60, so the
    // conditioning event has no mass.
    const auto cfg = write("deep.json", R"({
      "model": {"mu": [0, -4], "sigma": [1, 1], "rho": -0.3, "x0": [1, 1]},
      "defaults": [{"firm": 1, "time": 0.5}],
      "observations": [{"t": 0, "x1": 1, "x2": 1}],
      "grid": {"start": 60, "stop": 60, "step": 1}})");
    const CliResult r = run("intensity --config " + cfg.string() + " --out " + path("o.csv").string());
    EXPECT_EQ(r.code, cli::kExitNumeric) << r.err;
    EXPECT_NE(r.err.find("u=60"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("o.csv")));
}

TEST_F(CliTest, CorruptedAnalyticFailsValidation) {
    const CliResult r = run("validate --paths 20000 --corrupt-analytic 1.5");
    EXPECT_EQ(r.code, cli::kExitValidation) << r.err;
    EXPECT_NE(r.err.find("FAIL"), std::string::npos);
    const csv::Parsed t = csv::parse(r.out);
    EXPECT_EQ(t.header, (std::vector<std::string>{"model", "quantity", "analytic", "mc", "std_err", "z", "precision",
                                                  "status"}));
}

TEST_F(CliTest, FewPathsAreFlaggedAsLowPrecision) {
    const CliResult r = run("validate --paths 1000 --seed 7");
    ASSERT_TRUE(r.code == 0 || r.code == cli::kExitValidation) << r.err;
    EXPECT_NE(r.err.find("increase --paths"), std::string::npos) << r.err;
    const csv::Parsed t = csv::parse(r.out);
    int low = 0;
    for (const auto& row : t.rows)
        low += row[t.column("precision")] == "low";
    EXPECT_GT(low, 0);
}

TEST_F(CliTest, ValidateIsDeterministic) {
    const CliResult a = run("validate --paths 5000 --seed 11");
    const CliResult b = run("validate --paths 5000 --seed 11");
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
}

TEST_F(CliTest, FiguresWriteCsvAndSvg) {
    const CliResult r = run("figures --paths 3000 --out " + path("figs").string());
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* stem : {"fig1", "fig2", "fig3", "fig5", "fig6"}) {
        EXPECT_TRUE(fs::exists(path("figs") / (std::string(stem) + ".csv"))) << stem;
        const std::string svg = slurp(path("figs") / (std::string(stem) + ".svg"));
        EXPECT_EQ(svg.rfind("<svg", 0), 0u) << stem;
        EXPECT_NE(svg.find("<polyline"), std::string::npos) << stem;
    }
    const csv::Parsed fig1 = csv::parse(slurp(path("figs") / "fig1.csv"));
    EXPECT_EQ(fig1.header, (std::vector<std::string>{"u", "lambda2_rho_0", "lambda2_rho_-0.5", "lambda2_rho_-0.7"}));
    EXPECT_EQ(fig1.rows.size(), 200u);
    const csv::Parsed fig3 = csv::parse(slurp(path("figs") / "fig3.csv"));
    EXPECT_EQ(fig3.header,
              (std::vector<std::string>{"u", "lambda2_closed_form", "lambda2_model", "lambda2_mc", "mc_std_err"}));
    const CliResult bad = run("figures --paths 10 --out /proc/wedge_no_such_dir");
    EXPECT_EQ(bad.code, cli::kExitIo) << bad.err;
}

TEST_F(CliTest, CsvRoundTrips) {
    const auto cfg = write("fig1.json", kFig1Config);
    const CliResult r = run("intensity --config " + cfg.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const csv::Parsed t = csv::parse(r.out);
    csv::Table again(t.header);
    for (const auto& row : t.rows) {
        std::vector<std::string> fields;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const bool numeric = t.header[k] != "regime1" && t.header[k] != "regime2" && !row[k].empty();
            fields.push_back(numeric ? csv::number(std::stod(row[k])) : row[k]);
        }
        again.add_row(std::move(fields));
    }
    EXPECT_EQ(again.str(), r.out);
    EXPECT_EQ(r.out.find('\r'), std::string::npos);
}

TEST(CliConfig, ParsesScenario) {
    const Scenario sc = cli::parse_scenario(nlohmann::json::parse(kFig1Config));
    EXPECT_EQ(sc.model.sigma1, 4.0);
    EXPECT_EQ(sc.model.rho, -0.5);
    ASSERT_EQ(sc.defaults.size(), 1u);
    EXPECT_EQ(sc.defaults[0].firm, 1);
    EXPECT_EQ(sc.grid.points().size(), 21u);

    const Scenario plain = cli::parse_scenario(nlohmann::json::parse(kFig3Config));
    ASSERT_EQ(plain.observations.size(), 1u);
    EXPECT_EQ(plain.observations[0].x2, 1.0);
}

TEST(CliConfig, RejectsBadScenarios) {
    auto bad = [](const char* text) { return cli::parse_scenario(nlohmann::json::parse(text)); };
    EXPECT_THROW(bad("[]"), cli::ConfigError);
    EXPECT_THROW(bad(R"({"model": {"mu": [0], "sigma": [1, 1], "rho": 0, "x0": [1, 1]}})"), cli::ConfigError);
    EXPECT_THROW(bad(R"({"model": {"mu": [0, 0], "sigma": [1, 1], "rho": "x", "x0": [1, 1]}})"), cli::ConfigError);
    EXPECT_THROW(bad(R"({"model": {"mu": [0, 0], "sigma": [1, 1], "rho": 0, "x0": [1, 1]},
                         "defaults": [{"firm": 3, "time": 1}]})"),
                 cli::ConfigError);
    EXPECT_THROW(bad(R"({"model": {"mu": [0, 0], "sigma": [1, 1], "rho": 0, "x0": [1, 1]},
                         "grid": {"start": 2, "stop": 1, "step": 0.1}})"),
                 cli::ConfigError);
}

TEST(CliConfig, GridSpecs) {
    EXPECT_EQ(cli::parse_grid_spec("0:1:0.5"), (std::vector<double>{0, 0.5, 1}));
    EXPECT_EQ(cli::parse_grid_spec("0.25,2"), (std::vector<double>{0.25, 2}));
    EXPECT_THROW(cli::parse_grid_spec("0:1"), cli::ConfigError);
    EXPECT_THROW(cli::parse_grid_spec("a,b"), cli::ConfigError);
    EXPECT_THROW(cli::parse_grid_spec(""), cli::ConfigError);
}
