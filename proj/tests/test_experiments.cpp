#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gchn/experiments.hpp"

namespace {

using gchn::ExperimentConfig;
using gchn::Scenario;

TEST(FitExponent, ExactPowerLaws) {
  const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
  std::vector<double> sq, lin;
  for (double v : x) {
    sq.push_back(v * v);
    lin.push_back(3.0 * v);
  }
  const auto a = gchn::fit_exponent(x, sq);
  EXPECT_NEAR(a.slope, 2.0, 1e-14);
  EXPECT_NEAR(a.r_squared, 1.0, 1e-14);
  const auto b = gchn::fit_exponent(x, lin);
  EXPECT_NEAR(b.slope, 1.0, 1e-14);
  EXPECT_NEAR(b.intercept, std::log(3.0), 1e-14);
}

TEST(FitExponent, NoisyPowerLaw) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(std::pow(10.0, -3.0 + 0.1 * i));
    y.push_back(std::pow(x.back(), 1.5) * (1.0 + 0.01 * noise(rng)));
  }
  EXPECT_NEAR(gchn::fit_exponent(x, y).slope, 1.5, 0.05);
}

TEST(FitExponent, RejectsBadInput) {
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(gchn::fit_exponent(two, two), std::invalid_argument);
  const std::vector<double> x{1.0, 2.0, 3.0}, y{1.0, 0.0, 2.0}, neg{1.0, -2.0, 3.0};
  EXPECT_THROW(gchn::fit_exponent(x, y), std::invalid_argument);
  EXPECT_THROW(gchn::fit_exponent(neg, x), std::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.scenario = Scenario::taylor;
  c.k = 2;
  c.besov = gchn::BesovIndex(1.5, 2.0, gchn::kInf);
  c.n_list = {4, 5};
  c.t_grid = {0.001, 0.002, 0.004};
  c.dt = 1e-4;
  c.threads = 3;
  const ExperimentConfig back = gchn::config_from_json(gchn::to_json(c));
  EXPECT_EQ(back.scenario, Scenario::taylor);
  EXPECT_EQ(back.k, 2);
  EXPECT_EQ(back.besov.s, 1.5);
  EXPECT_TRUE(back.besov.r_is_inf());
  EXPECT_EQ(back.n_list, c.n_list);
  EXPECT_EQ(back.t_grid, c.t_grid);
  EXPECT_EQ(back.dt, 1e-4);
  EXPECT_EQ(back.threads, 3);
  EXPECT_EQ(gchn::to_json(back), gchn::to_json(c));
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(gchn::config_from_json(nlohmann::json{{"kk", 1}}), std::invalid_argument);
  EXPECT_THROW(gchn::config_from_json(nlohmann::json{{"k", "two"}}), std::invalid_argument);
  EXPECT_THROW(gchn::config_from_json(nlohmann::json{{"p", "infinite"}}), std::invalid_argument);
  EXPECT_THROW(gchn::config_from_json(nlohmann::json{{"scenario", "blowup"}}), std::invalid_argument);
  EXPECT_THROW(gchn::config_from_json(nlohmann::json::array()), std::invalid_argument);
}

TEST(Config, LoadFromFile) {
  const std::string path = ::testing::TempDir() + "gchn_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"scenario": "limit", "k": 2, "p": 1, "n_list": [5, 6, 7]})";
  }
  const ExperimentConfig c = gchn::load_config(path);
  EXPECT_EQ(c.scenario, Scenario::limit);
  EXPECT_EQ(c.besov.p, 1.0);
  EXPECT_EQ(c.n_list.back(), 7);
  std::remove(path.c_str());
  EXPECT_THROW(gchn::load_config(path), std::invalid_argument);
}

TEST(Config, DefaultsPerScenario) {
  ExperimentConfig c;
  c.scenario = Scenario::nonuniform;
  const auto d = gchn::with_defaults(c);
  EXPECT_EQ(d.half_length, gchn::kDefaultHalfLength);
  EXPECT_EQ(d.t_grid.front(), 0.0);
  EXPECT_EQ(d.t_grid.back(), 0.1);
  EXPECT_EQ(d.horizon, 0.1);
  EXPECT_NO_THROW(gchn::validate(d));
  c.scenario = Scenario::conservation;
  const auto e = gchn::with_defaults(c);
  EXPECT_EQ(e.grid_points, 256U);
  EXPECT_EQ(e.horizon, 1.0);
}

TEST(Config, Validation) {
  auto base = [] {
    ExperimentConfig c;
    c.scenario = Scenario::taylor;
    return gchn::with_defaults(c);
  };
  auto c = base();
  c.t_grid = {0.01, 0.005, 0.02};
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
  c = base();
  c.t_grid.push_back(1.0);  // beyond the horizon
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
  c = base();
  c.grid_points = 1 << 16;  // cannot hold n = 7
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
  c = base();
  c.grid_points = 1000;
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
  c = base();
  c.k = 0;
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
  c = base();
  c.half_length = 16.0;  // bump does not fit
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
  c = base();
  c.n_list = {5, 4};
  EXPECT_THROW(gchn::validate(c), std::invalid_argument);
}

TEST(Report, CsvFormatting) {
  gchn::Table t{"demo", {"a", "b", "c"}, {}};
  t.add({1.0 / 3.0, 7LL, std::string("pass")});
  t.add({gchn::kInf, -2LL, std::string("na")});
  EXPECT_EQ(gchn::to_csv(t), "a,b,c\n0.33333333333333331,7,pass\ninf,-2,na\n");
  EXPECT_THROW(t.add({1.0}), std::logic_error);
  EXPECT_EQ(gchn::csv_path("out/run.json", "nonuniform"), "out/run.nonuniform.csv");
  EXPECT_EQ(gchn::csv_path("run", "taylor"), "run.taylor.csv");
}

TEST(Report, VerdictRangesAndGating) {
  EXPECT_TRUE(gchn::make_verdict("a", 1.0, 0.5, gchn::kInf).pass);
  EXPECT_FALSE(gchn::make_verdict("a", 0.4, 0.5, gchn::kInf).pass);
  EXPECT_FALSE(gchn::make_verdict("a", std::nan(""), -gchn::kInf, gchn::kInf).pass);
  gchn::ExperimentReport r;
  r.verdicts.push_back(gchn::make_verdict("ok", 1.0, 0.0, 2.0));
  r.verdicts.push_back(gchn::make_verdict("info", 5.0, 0.0, 2.0, "", false));
  EXPECT_TRUE(r.all_pass());
  r.verdicts.push_back(gchn::make_verdict("bad", 5.0, 0.0, 2.0));
  EXPECT_FALSE(r.all_pass());
  const auto j = gchn::to_json(r);
  EXPECT_EQ(j["schema"], gchn::kReportSchema);
  EXPECT_EQ(j["verdicts"][0]["upper"], 2.0);
  EXPECT_FALSE(j["all_pass"].get<bool>());
}

TEST(WorkerPool, RunsEveryTaskAndRethrowsFirstFailure) {
  std::vector<int> hits(50, 0);
  gchn::run_parallel(hits.size(), 4, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
  for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i], static_cast<int>(i));
  try {
    gchn::run_parallel(10, 3, [](std::size_t i) {
      if (i == 3 || i == 7) throw std::runtime_error("task " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "task 3");
  }
}

ExperimentConfig small_nonuniform() {
  ExperimentConfig c;
  c.scenario = Scenario::nonuniform;
  c.n_list = {1, 2, 3};
  c.t_grid = {0.0, 0.002, 0.004, 0.008};
  c.window_lo = 0.002;
  c.window_hi = 0.008;
  return c;
}

TEST(Nonuniform, ZeroTimeRowsAreTheInitialGap) {
  const auto rep = gchn::run_nonuniform(small_nonuniform());
  const auto& t = rep.table("nonuniform");
  const std::vector<std::string> expect{"k", "s", "p", "r", "n", "t", "sep_besov", "g_norm_besov",
                                        "lower_bound_proxy", "verdict"};
  EXPECT_EQ(t.columns, expect);
  int zero_rows = 0;
  for (const auto& row : t.rows)
    if (std::get<double>(row[5]) == 0.0) {
      ++zero_rows;
      EXPECT_EQ(std::get<double>(row[6]), std::get<double>(row[7]));
    }
  EXPECT_EQ(zero_rows, 3);
  EXPECT_EQ(t.rows.size(), 12U);
  EXPECT_NO_THROW(rep.verdict("separation_window_n3"));
}

TEST(Nonuniform, DeterministicAcrossRunsAndThreadCounts) {
  auto c = small_nonuniform();
  const std::string first = gchn::to_csv(gchn::run_nonuniform(c).table("nonuniform"));
  const std::string second = gchn::to_csv(gchn::run_nonuniform(c).table("nonuniform"));
  c.threads = 3;
  const std::string threaded = gchn::to_csv(gchn::run_nonuniform(c).table("nonuniform"));
  EXPECT_EQ(first, second);
  EXPECT_EQ(first, threaded);
}

TEST(Taylor, ZeroTimeResidualIsExactlyZero) {
  ExperimentConfig c;
  c.scenario = Scenario::taylor;
  c.n_list = {2};
  c.t_grid = {0.0, 0.001, 0.002, 0.004};
  const auto rep = gchn::run_taylor(c);
  const auto& t = rep.table("taylor");
  ASSERT_EQ(t.rows.size(), 8U);
  for (const auto& row : t.rows)
    if (std::get<double>(row[6]) == 0.0) EXPECT_EQ(std::get<double>(row[7]), 0.0);
  EXPECT_TRUE(rep.verdict("residual_slope_n2_f").pass);
  EXPECT_TRUE(rep.verdict("control_slope_n2_f_plus_g").pass);
}

TEST(Scenarios, SolverChecksPass) {
  ExperimentConfig c;
  c.scenario = Scenario::conservation;
  c.horizon = 0.2;
  EXPECT_TRUE(gchn::run_experiment(c).all_pass());
  c = {};
  c.scenario = Scenario::mms;
  const auto rep = gchn::run_experiment(c);
  EXPECT_TRUE(rep.all_pass());
  EXPECT_EQ(rep.table("self_convergence").rows.size(), 3U);
}

TEST(Scenarios, WriteReportFiles) {
  ExperimentConfig c;
  c.scenario = Scenario::norms;
  c.n_list = {2, 3, 4};
  const auto rep = gchn::run_experiment(c);
  const std::string path = ::testing::TempDir() + "gchn_norms_test.json";
  const auto files = gchn::write_report(rep, path);
  ASSERT_EQ(files.size(), 2U);
  std::ifstream in(files[1]);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("k,s,p,r,n,grid_points,g_norm_besov", 0), 0U);
  std::ifstream js(path);
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["config"]["scenario"], "norms");
  EXPECT_TRUE(j["provenance"].contains("timestamp"));
  for (const auto& f : files) std::remove(f.c_str());
}

}  // namespace
