// Copyright 2026 The swssb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "swssb/config.hpp"
#include "swssb/runner.hpp"

using namespace swssb;

namespace {

std::string slurp(const std::string &name) {
    std::ifstream in(std::string(SWSSB_TEST_DATA) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string &text) {
    try {
        parse_config(text, "t.ini");
    } catch (const ValidationError &e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, MinimalTfimDefaults) {
    ExperimentConfig c = parse_config("[run]\nbackend = tfim\n[sweep]\nT = 1, 2\n");
    EXPECT_EQ(c.backend, "tfim");
    EXPECT_EQ(c.mode, "exact");
    EXPECT_EQ(c.threads, 1u);
    EXPECT_EQ(c.format, "csv");
    EXPECT_EQ(c.d, 1);
    EXPECT_EQ(c.L, 4);
    EXPECT_EQ(c.J, 1.0);
    EXPECT_EQ(c.g, 1.0);
    EXPECT_EQ(c.pauli, 'Z');
    EXPECT_FALSE(c.seed.has_value());
    EXPECT_FALSE(c.x.has_value());
    EXPECT_EQ(c.sweep.at("T").values, (std::vector<double>{1, 2}));
}

TEST(Config, Rejections) {
    EXPECT_NE(error_of("[run]\nbackend = ising\n[model]\np = -0.1\n").find("t.ini:4"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = ising\n[model]\ncolour = red\n").find("t.ini:4: unknown key 'colour'"),
              std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = ising\nmode = mc\nsamples = 10\n").find("seed is required"),
              std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = perc\nsamples = 10\n").find("seed is required"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = perc\nseed = 1\n").find("samples must be positive"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = compare\n").find("seed is required"), std::string::npos);
    EXPECT_NE(error_of("[model]\nL = 4\n").find("backend is required"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = warp\n").find("t.ini:2"), std::string::npos);
    EXPECT_NE(error_of("backend = exact\n").find("outside of any section"), std::string::npos);
    EXPECT_NE(error_of("[run\n").find("malformed section"), std::string::npos);
    EXPECT_NE(error_of("[extra]\n").find("unknown section"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\nbackend = stab\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[model]\nL = four\n").find("expected an integer"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[model]\nbeta = 0\n").find("beta must be positive"),
              std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[sweep]\np = 0.5:0.1:0.1\n").find("empty"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[sweep]\np = 0:1:0\n").find("step must be positive"),
              std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[sweep]\np = 0, 1.5\n").find("outside [0, 1]"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[sweep]\nq = 1\n").find("unknown sweep axis"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[sweep]\nL = 2.5\n").find("integers"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = tfim\n[sweep]\nT = 1\nbeta = 1\n").find("ambiguous"), std::string::npos);
    EXPECT_NE(error_of("[run]\nbackend = exact\n[model]\np = nan\n").find("finite"), std::string::npos);
}

TEST(Config, RoundTrip) {
    ExperimentConfig c = parse_config(
        "[run]\nbackend = ising\nseed = 42\nthreads = 3\nmode = mc\nsamples = 1000\nformat = json\n"
        "[model]\nd = 2\nL = 3\np = 0.109\nx = 0\ny = 4\n[sweep]\np = 0.05, 0.109, 0.2\nr = 0:2:1\n");
    std::string text = to_text(c);
    ExperimentConfig back = parse_config(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(to_text(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, HashIgnoresThreadsAndOutput) {
    ExperimentConfig a = parse_config("[run]\nbackend = exact\n");
    ExperimentConfig b = a;
    b.threads = 8;
    b.out = "elsewhere.csv";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.p = 0.3;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Config, Overrides) {
    ExperimentConfig c = parse_config("[run]\nbackend = exact\n");
    apply_override(c, "model.p=0.3");
    apply_override(c, "sweep.r = 1,2");
    EXPECT_EQ(c.p, 0.3);
    EXPECT_EQ(c.sweep.at("r").values.size(), 2u);
    EXPECT_THROW(apply_override(c, "p=0.3"), ValidationError);
    EXPECT_THROW(apply_override(c, "model.p=2"), ValidationError);
}

TEST(Config, ThermalSweepFixtureMatchesGolden) {
    ExperimentConfig c = parse_config(slurp("thermal_sweep.ini"), "thermal_sweep.ini");
    EXPECT_EQ(to_text(c), slurp("thermal_sweep.golden"));
    EXPECT_EQ(parse_config(slurp("thermal_sweep.golden")), c);
    auto pts = expand_sweep(c);
    ASSERT_EQ(pts.size(), 29u * 61u);
    std::set<double> temps;
    for (const auto &p : pts) temps.insert(1.0 / p.beta);
    EXPECT_EQ(temps.size(), 29u);
    EXPECT_NEAR(*temps.begin(), 0.15, 1e-12);
    EXPECT_NEAR(*temps.rbegin(), 2.95, 1e-12);
    EXPECT_EQ(pts.front().L, 128);
    EXPECT_EQ(pts[1].g, 0.1);
}

TEST(Config, RangeCountIsRobustToRounding) {
    EXPECT_EQ(detail::parse_axis("0.15:2.95:0.1", {"t"}).values.size(), 29u);
    EXPECT_EQ(detail::parse_axis("0:1:0.1", {"t"}).values.size(), 11u);
    EXPECT_EQ(detail::parse_axis("0.4:0.6:0.02", {"t"}).values.size(), 11u);
}

TEST(Runner, ParityFixtureGivesUnitDiagnostics) {
    RunResult res = run(parse_config(slurp("rho_parity.ini")));
    ASSERT_EQ(res.table.rows.size(), 5u);
    const std::vector<std::string> kinds{"R1", "R2", "F", "D1", "Drel"};
    const std::vector<double> expect{1, 1, 1, 0, 0};
    size_t vcol = 11;
    ASSERT_EQ(res.table.columns[vcol], "value");
    for (size_t i = 0; i < 5; i++) {
        EXPECT_EQ(res.table.rows[i][10], kinds[i]);
        EXPECT_NEAR(std::stod(res.table.rows[i][vcol]), expect[i], 1e-12);
        EXPECT_EQ(res.table.rows[i][12], "");
    }
    EXPECT_EQ(res.meta.rows, 5u);
    EXPECT_EQ(res.meta.config_hash.size(), 16u);
    EXPECT_EQ(res.meta.code_version, std::string(kCodeVersion));
    EXPECT_EQ(res.table.rows[0][14], res.meta.config_hash);
}

TEST(Runner, StabilizerMatchesExactOnParity) {
    ExperimentConfig c = parse_config("[run]\nbackend = stab\n[model]\nstate = decohered\nL = 6\np = 0.2\n");
    ExperimentConfig e = c;
    e.backend = "exact";
    auto a = run(c).table, b = run(e).table;
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (size_t i = 0; i < a.rows.size(); i++) {
        EXPECT_NEAR(std::stod(a.rows[i][11]), std::stod(b.rows[i][11]), 1e-9) << a.rows[i][10];
    }
}

TEST(Runner, OrthogonalStateWritesInf) {
    RunResult res = run(parse_config("[run]\nbackend = exact\n[model]\nstate = plus\nL = 3\npauli = Z\n"));
    EXPECT_EQ(res.table.rows[4][10], "Drel");
    EXPECT_EQ(res.table.rows[4][11], "inf");
}

TEST(Runner, PercolationDeterministicAcrossThreads) {
    ExperimentConfig c = parse_config(
        "[run]\nbackend = perc\nseed = 5\nsamples = 300\n[model]\nd = 2\n[sweep]\nL = 8, 16\np = 0.3:0.7:0.1\n");
    std::string one = to_csv(run(c).table);
    c.threads = 3;
    std::string three = to_csv(run(c).table);
    EXPECT_EQ(one, three);
    EXPECT_EQ(run(c).table.rows.size(), 10u);
    c.seed = 6;
    EXPECT_NE(to_csv(run(c).table), one);
}

TEST(Runner, IsingModes) {
    ExperimentConfig c = parse_config(
        "[run]\nbackend = ising\nmode = mc\nseed = 3\nsamples = 200\n[model]\nd = 1\nL = 6\np = 0.25\n[sweep]\nr = 2\n");
    auto mc = run(c).table;
    EXPECT_EQ(mc.columns, (std::vector<std::string>{"p", "r", "L", "d", "mode", "value", "stderr", "n_samples", "seed"}));
    EXPECT_EQ(mc.rows[0][7], "200");
    EXPECT_EQ(mc.rows[0][8], "3");
    EXPECT_FALSE(mc.rows[0][6].empty());
    c.threads = 2;
    EXPECT_EQ(to_csv(run(c).table), to_csv(mc));

    c.mode = "annealed";
    auto an = run(c).table;
    EXPECT_TRUE(an.rows[0][6].empty());
    EXPECT_TRUE(an.rows[0][8].empty());
    double t = 0.6;
    EXPECT_NEAR(std::stod(an.rows[0][5]), (t * t + std::pow(t, 4)) / (1 + std::pow(t, 6)), 1e-12);

    c.mode = "closed_form";
    EXPECT_NEAR(std::stod(run(c).table.rows[0][5]), 0.75, 1e-12);
}

TEST(Runner, TfimTable) {
    ExperimentConfig c = parse_config("[run]\nbackend = tfim\n[model]\nL = 8\n[sweep]\nT = 0.5, 1\ng = 0, 1, 2\n");
    Table t = run(c).table;
    EXPECT_EQ(t.columns, (std::vector<std::string>{"L", "J", "g", "T", "beta", "x", "y", "r1"}));
    ASSERT_EQ(t.rows.size(), 6u);
    EXPECT_EQ(t.rows[0][3], "0.5");
    EXPECT_EQ(t.rows[2][2], "2");
    EXPECT_EQ(t.rows[0][6], "4");
    EXPECT_NEAR(std::stod(t.rows[0][7]), 1.0, 1e-12);
    for (size_t i = 0; i < 6; i++) {
        EXPECT_NEAR(std::stod(t.rows[i][7]), r1_tfim(8, 1, std::stod(t.rows[i][2]), std::stod(t.rows[i][4]), 0, 4),
                    1e-14);
    }
    c.threads = 3;
    EXPECT_EQ(to_csv(run(c).table), to_csv(t));
}

TEST(Runner, CompareReport) {
    ExperimentConfig c = parse_config(slurp("compare.ini"));
    RunResult res = run(c);
    EXPECT_FALSE(res.discrepancy);
    ASSERT_EQ(res.table.rows.size(), 3u);
    EXPECT_EQ(res.table.rows[0][0], "stab_vs_dense");
    EXPECT_EQ(res.table.rows[1][0], "ising_vs_dense");
    EXPECT_EQ(res.table.rows[2][0], "tfim_vs_dense");
    for (const auto &r : res.table.rows) EXPECT_EQ(r[4], "true") << r[0] << " " << r[2];

    CompareReport bad{{{"x", 1, 1e-3, 1e-9}}};
    EXPECT_FALSE(bad.ok());
    EXPECT_EQ(compare_table(bad).rows[0][4], "false");
}

TEST(Runner, ErrorsCarryContext) {
    ExperimentConfig c = parse_config("[run]\nbackend = exact\n[model]\nL = 4\nx = 9\n");
    EXPECT_THROW(run(c), ValidationError);
    c = parse_config("[run]\nbackend = tfim\n[model]\nd = 2\n");
    EXPECT_THROW(run(c), ValidationError);
    c = parse_config("[run]\nbackend = stab\n[model]\nstate = gibbs\n");
    EXPECT_THROW(run(c), ValidationError);
    c = parse_config("[run]\nbackend = exact\n[model]\nL = 20\n");
    EXPECT_THROW(run(c), ValidationError);
}

TEST(Runner, CsvFormatting) {
    Table t{"swssb.x.v1", {"a", "b"}, {{"1", "inf"}}};
    EXPECT_EQ(to_csv(t), "# schema: swssb.x.v1\na,b\n1,inf\n");
    EXPECT_THROW(detail::cell(std::nan("")), BackendError);
    EXPECT_EQ(detail::cell(0.1), "0.1");
    EXPECT_EQ(detail::cell(1.0 / 3), "0.3333333333333333");
}
