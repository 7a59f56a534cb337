#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "pkglab/config.hpp"
#include "pkglab/harness.hpp"
#include "pkglab/numerics.hpp"

using namespace pkglab;
using namespace pkglab::harness;
using config::Json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  c.scenario = "unit";
  c.base = default_scenario(2, 4);
  c.sweep = SweepVariable::M;
  c.grid = {2, 3};
  c.methods = {Method::BaselineCase1, Method::BaselineCase2, Method::Random};
  c.random_draws = 10;
  c.seed = 5;
  return c;
}

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream s;
  write_csv(s, rows);
  return s.str();
}

}  // namespace

TEST(Config, ScenarioRoundTrip) {
  Scenario s = default_scenario(3, 9);
  s.options.rho_override = 0.25;
  s.options.kappa = 2.5;
  s.geometry.bob_position = Vec3(7, 8, 1);
  const Scenario back = config::scenario_from_json(config::scenario_to_json(s));
  EXPECT_EQ(config::scenario_to_json(back), config::scenario_to_json(s));
  EXPECT_EQ(back.geometry.L(), 9);
  EXPECT_EQ(*back.options.rho_override, 0.25);
}

TEST(Config, DefaultsAndUnknownKeys) {
  const Scenario s = config::scenario_from_json(Json::object());
  EXPECT_EQ(s.geometry.M, 4);
  EXPECT_EQ(s.geometry.L(), 16);
  EXPECT_THROW(config::scenario_from_json(Json{{"Mx", 2}}), ConfigError);
  EXPECT_THROW(config::scenario_from_json(Json{{"L", 5}}), ConfigError);
  EXPECT_THROW(config::scenario_from_json(Json{{"eta", 1.5}}), ConfigError);
  EXPECT_THROW(config::scenario_from_json(Json{{"bob", {1, 2}}}), ConfigError);
}

TEST(Config, EveDistanceInWavelengths) {
  const Scenario s = config::scenario_from_json(Json{{"eve_distance_wavelengths", 1.0}});
  const double d = (s.geometry.bob_position - s.geometry.eve_position).norm();
  EXPECT_NEAR(d, s.geometry.lambda, 1e-12);
}

TEST(Config, CommentsAllowed) {
  const std::string path = temp_path("pkglab_comments.json");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\n  // antenna count\n  \"M\": 2 /* block */\n}\n", f);
    std::fclose(f);
  }
  EXPECT_EQ(config::read_json_file(path).at("M"), 2);
  std::remove(path.c_str());
  EXPECT_THROW(config::read_json_file("/nonexistent.json"), ConfigError);
}

TEST(Sweep, AppliesEachVariable) {
  const Scenario base = default_scenario(4, 16);
  EXPECT_EQ(apply_sweep(base, SweepVariable::M, 6).geometry.M, 6);
  EXPECT_EQ(apply_sweep(base, SweepVariable::L, 36).geometry.L(), 36);
  EXPECT_THROW(apply_sweep(base, SweepVariable::L, 20), ConfigError);
  EXPECT_THROW(apply_sweep(base, SweepVariable::M, 2.5), ConfigError);
  EXPECT_EQ(apply_sweep(base, SweepVariable::P_max, 15).options.P_max_dbm, 15);
  EXPECT_EQ(apply_sweep(base, SweepVariable::eta, 0.3).options.eta, 0.3);
  EXPECT_THROW(apply_sweep(base, SweepVariable::eta, 1.3), ConfigError);
}

TEST(Sweep, ModelPathTemplate) {
  EXPECT_EQ(expand_model_path("m_{M}x{L}_{M}.json", 4, 16), "m_4x16_4.json");
}

TEST(Experiment, CsvSchemaAndOrder) {
  const auto rows = run_experiment(small_experiment());
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].method, "baseline_case1");
  EXPECT_EQ(rows[1].method, "baseline_case2");
  EXPECT_EQ(rows[2].method, "random");
  EXPECT_EQ(rows[3].sweep, 3.0);
  const std::string csv = csv_of(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "scenario,method,sweep,mi_ab,rsk,rsk1,rsk2,rho,wall_time_ms,seed");
  for (const ResultRow& r : rows) {
    EXPECT_EQ(r.seed, 5u);
    EXPECT_EQ(r.wall_time_ms, 0.0);
  }
}

TEST(Experiment, BitIdenticalAcrossRunsAndWorkers) {
  ExperimentConfig a = small_experiment();
  a.workers = 1;
  ExperimentConfig b = small_experiment();
  b.workers = 4;
  EXPECT_EQ(csv_of(run_experiment(a)), csv_of(run_experiment(a)));
  EXPECT_EQ(csv_of(run_experiment(a)), csv_of(run_experiment(b)));
}

TEST(Experiment, RhoColumnFollowsEveDistance) {
  ExperimentConfig c = small_experiment();
  c.sweep = SweepVariable::eve_distance;
  c.grid = {0.05, 0.25, 0.5, 1.0};
  c.methods = {Method::BaselineCase2};
  const double lam = c.base.geometry.lambda;
  for (const ResultRow& r : run_experiment(c)) {
    EXPECT_NEAR(r.rho, numerics::bessel_j0(2.0 * std::numbers::pi * r.sweep * lam / lam),
                1e-9);
  }
}

TEST(Experiment, RejectsInvalidConfig) {
  ExperimentConfig c = small_experiment();
  c.grid.clear();
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_experiment();
  c.methods.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_experiment();
  c.methods = {Method::PkgnetCase1};
  c.model_case1 = "/nonexistent/model_{M}.json";
  EXPECT_THROW(run_experiment(c), ConfigError);
  EXPECT_THROW(parse_method("genetic"), ConfigError);
  EXPECT_THROW(parse_sweep_variable("kappa"), ConfigError);
}

TEST(Experiment, ParsesJson) {
  const Json j = Json::parse(R"({
    "scenario": "fig", "base": {"M": 2, "L": 4},
    "sweep": {"variable": "P_max", "values": [10, 20]},
    "methods": ["baseline_case1", "random"], "seed": 9, "random_draws": 5,
    "models": {"case1": "m_{M}.json"}
  })");
  const ExperimentConfig c = experiment_from_json(j, "/tmp/cfg");
  EXPECT_EQ(c.sweep, SweepVariable::P_max);
  EXPECT_EQ(c.grid.size(), 2u);
  EXPECT_EQ(c.methods[1], Method::Random);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.model_case1, "/tmp/cfg/m_{M}.json");
  EXPECT_THROW(experiment_from_json(Json{{"sweep", {{"variable", "M"}, {"values", {2}}}},
                                         {"methods", {"random"}}, {"bogus", 1}}),
               ConfigError);
}

TEST(Experiment, PkgnetMethodUsesModelFile) {
  const std::string path = temp_path("pkglab_exp_model_{M}.json");
  for (int M : {2, 3}) {
    const Scenario base = default_scenario(M, 4);
    pkgnet::save_model(expand_model_path(path, M, 4),
                       {pkgnet::Network::initialize(
                            pkgnet::architecture_for(pkgnet::Case::EveBlind, M, 4, 8), 1),
                        pkgnet::Case::EveBlind, base});
  }
  ExperimentConfig c = small_experiment();
  c.methods = {Method::PkgnetCase1};
  c.model_case1 = path;
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0].mi_ab, 0.0);
  c.methods = {Method::PkgnetCase2};
  c.model_case2 = path;
  EXPECT_THROW(run_experiment(c), ConfigError);
  for (int M : {2, 3}) std::remove(expand_model_path(path, M, 4).c_str());
}

TEST(Bench, LocationsAndTableShape) {
  EXPECT_EQ(bench_locations(5, 3)[4], bench_locations(5, 3)[4]);
  const std::string path = temp_path("pkglab_bench_{M}.json");
  BenchConfig b;
  b.base = default_scenario(2, 4);
  b.M_values = {2, 3, 4};
  b.locations = 3;
  b.model_case1 = path;
  EXPECT_THROW(bench_timing(b), ConfigError);
  for (int M : b.M_values) {
    pkgnet::save_model(expand_model_path(path, M, 4),
                       {pkgnet::Network::initialize(
                            pkgnet::architecture_for(pkgnet::Case::EveBlind, M, 4, 8), 1),
                        pkgnet::Case::EveBlind, default_scenario(M, 4)});
  }
  const TimingTable t = bench_timing(b);
  EXPECT_EQ(t.baseline_ms.size(), 3u);
  EXPECT_EQ(t.inference_ms.size(), 3u);
  std::ostringstream csv;
  write_timing_csv(csv, t);
  std::string line;
  int lines = 0;
  std::istringstream in(csv.str());
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
  for (int M : b.M_values) std::remove(expand_model_path(path, M, 4).c_str());
}

TEST(Verify, SuitePasses) {
  VerifyOptions o;
  o.mc_samples = 200000;
  o.instances = 20;
  for (const CheckResult& r : verify(o)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}
