#include "pkglab/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pkglab/oracle.hpp"
#include "pkglab/parallel.hpp"
#include "pkglab/skr.hpp"
#include "pkglab/waterfill.hpp"

namespace pkglab::harness {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Shortest text that parses back to the same double.
std::string number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

int as_count(double value, const char* what) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 1e6) {
    throw ConfigError(std::string("sweep: ") + what + " values must be positive integers");
  }
  return static_cast<int>(value);
}

bool is_pkgnet(Method m) { return m == Method::PkgnetCase1 || m == Method::PkgnetCase2; }

const std::string& model_template(const ExperimentConfig& c, Method m) {
  return m == Method::PkgnetCase1 ? c.model_case1 : c.model_case2;
}

/// Loads every model file the experiment needs and checks it fits the grid.
std::map<std::string, pkgnet::Model> load_models(const ExperimentConfig& c) {
  std::map<std::string, pkgnet::Model> models;
  for (Method m : c.methods) {
    if (!is_pkgnet(m)) continue;
    const std::string& pattern = model_template(c, m);
    if (pattern.empty()) {
      throw ConfigError("experiment: method " + method_name(m) + " needs a model path");
    }
    const pkgnet::Case want =
        m == Method::PkgnetCase1 ? pkgnet::Case::EveBlind : pkgnet::Case::EveAware;
    for (double v : c.grid) {
      const Scenario s = apply_sweep(c.base, c.sweep, v);
      const std::string path = expand_model_path(pattern, s.geometry.M, s.geometry.L());
      if (!models.count(path)) {
        if (!std::filesystem::exists(path)) {
          throw ConfigError("model file '" + path + "' does not exist");
        }
        models.emplace(path, pkgnet::load_model(path));
      }
      const pkgnet::Model& model = models.at(path);
      if (model.which != want) {
        throw ConfigError("model file '" + path + "' was trained for the other case");
      }
      if (model.network.arch.M != s.geometry.M || model.network.arch.L != s.geometry.L()) {
        throw ConfigError("model file '" + path + "' does not match M/L of the grid point");
      }
    }
  }
  return models;
}

ResultRow report_row(const SkrReport& r) {
  ResultRow row;
  row.mi_ab = r.mi_ab;
  row.rsk = r.rsk;
  row.rsk1 = r.rsk1;
  row.rsk2 = r.rsk2;
  row.rho = r.rho;
  return row;
}

ResultRow run_point(const ExperimentConfig& c, std::size_t g, Method m,
                    const std::map<std::string, pkgnet::Model>& models) {
  const double value = c.grid[g];
  const Scenario s = apply_sweep(c.base, c.sweep, value);
  const ChannelStatistics stats = s.statistics();
  ResultRow row;
  const auto start = Clock::now();
  double wall = 0.0;
  switch (m) {
    case Method::BaselineCase1:
    case Method::BaselineCase2: {
      waterfill::SolverOptions opts;
      opts.seed = Rng(c.seed).split("waterfill", g).key();
      const waterfill::BaselineResult b = m == Method::BaselineCase1
                                              ? waterfill::baseline_case1(stats, opts)
                                              : waterfill::baseline_case2(stats, opts);
      wall = elapsed_ms(start);
      row = report_row(b.report);
      break;
    }
    case Method::PkgnetCase1:
    case Method::PkgnetCase2: {
      const pkgnet::Model& model =
          models.at(expand_model_path(model_template(c, m), s.geometry.M, s.geometry.L()));
      const DesignPoint d = pkgnet::infer(model.network, feature_row(s), model.which);
      wall = elapsed_ms(start);
      row = report_row(skr_lower_bound(d, stats));
      break;
    }
    case Method::Random: {
      Rng rng = Rng(c.seed).split("random", g);
      ResultRow acc;
      for (int k = 0; k < c.random_draws; ++k) {
        const DesignPoint d = pkgnet::random_design(stats.M(), stats.L(), stats.P_max, rng);
        const SkrReport r = skr_lower_bound(d, stats);
        acc.mi_ab += r.mi_ab;
        acc.rsk += r.rsk;
        acc.rsk1 += r.rsk1;
        acc.rsk2 += r.rsk2;
      }
      wall = elapsed_ms(start) / c.random_draws;
      const double n = c.random_draws;
      row.mi_ab = acc.mi_ab / n;
      row.rsk = acc.rsk / n;
      row.rsk1 = acc.rsk1 / n;
      row.rsk2 = acc.rsk2 / n;
      row.rho = stats.rho;
      break;
    }
  }
  row.scenario = c.scenario;
  row.method = method_name(m);
  row.sweep = value;
  row.seed = c.seed;
  row.wall_time_ms = c.record_wall_time ? wall : 0.0;
  return row;
}

}  // namespace

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "M") return SweepVariable::M;
  if (name == "L") return SweepVariable::L;
  if (name == "P_max") return SweepVariable::P_max;
  if (name == "eta") return SweepVariable::eta;
  if (name == "eve_distance") return SweepVariable::eve_distance;
  throw ConfigError("unknown sweep variable '" + name +
                    "' (expected M, L, P_max, eta or eve_distance)");
}

std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::M: return "M";
    case SweepVariable::L: return "L";
    case SweepVariable::P_max: return "P_max";
    case SweepVariable::eta: return "eta";
    case SweepVariable::eve_distance: return "eve_distance";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "pkgnet_case1") return Method::PkgnetCase1;
  if (name == "pkgnet_case2") return Method::PkgnetCase2;
  if (name == "baseline_case1") return Method::BaselineCase1;
  if (name == "baseline_case2") return Method::BaselineCase2;
  if (name == "random") return Method::Random;
  throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::PkgnetCase1: return "pkgnet_case1";
    case Method::PkgnetCase2: return "pkgnet_case2";
    case Method::BaselineCase1: return "baseline_case1";
    case Method::BaselineCase2: return "baseline_case2";
    case Method::Random: return "random";
  }
  return "?";
}

Scenario apply_sweep(const Scenario& base, SweepVariable v, double value) {
  if (!std::isfinite(value)) throw ConfigError("sweep: non-finite grid value");
  Scenario s = base;
  switch (v) {
    case SweepVariable::M:
      s.geometry.M = as_count(value, "M");
      break;
    case SweepVariable::L: {
      const int L = as_count(value, "L");
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
      if (side * side != L) throw ConfigError("sweep: L values must be perfect squares");
      s.geometry.L_H = side;
      s.geometry.L_V = side;
      break;
    }
    case SweepVariable::P_max:
      s.options.P_max_dbm = value;
      break;
    case SweepVariable::eta:
      if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("sweep: eta must lie in [0, 1]");
      s.options.eta = value;
      break;
    case SweepVariable::eve_distance:
      if (!(value >= 0.0)) throw ConfigError("sweep: eve_distance must be >= 0");
      place_eve(s.geometry, value * s.geometry.lambda);
      break;
  }
  s.geometry.validate();
  return s;
}

std::string expand_model_path(const std::string& pattern, int M, int L) {
  std::string out = pattern;
  auto replace = [&out](const std::string& key, const std::string& value) {
    for (std::size_t pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos)) {
      out.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace("{M}", std::to_string(M));
  replace("{L}", std::to_string(L));
  return out;
}

void ExperimentConfig::validate() const {
  if (grid.empty()) throw ConfigError("experiment: sweep grid is empty");
  if (methods.empty()) throw ConfigError("experiment: no methods given");
  if (random_draws < 1) throw ConfigError("experiment: random_draws must be >= 1");
  for (double v : grid) (void)apply_sweep(base, sweep, v).statistics();
  load_models(*this);
}

ExperimentConfig experiment_from_json(const config::Json& j, const std::string& base_dir) {
  config::reject_unknown_keys(j,
                              {"scenario", "base", "sweep", "methods", "seed", "random_draws",
                               "models", "output", "record_wall_time", "workers"},
                              "experiment");
  ExperimentConfig c;
  try {
    if (j.contains("scenario")) c.scenario = j.at("scenario").get<std::string>();
    c.base = config::scenario_from_json(j.value("base", config::Json::object()));
    if (!j.contains("sweep")) throw ConfigError("experiment: missing 'sweep'");
    const config::Json& sw = j.at("sweep");
    config::reject_unknown_keys(sw, {"variable", "values"}, "sweep");
    c.sweep = parse_sweep_variable(sw.at("variable").get<std::string>());
    c.grid = sw.at("values").get<std::vector<double>>();
    if (!j.contains("methods")) throw ConfigError("experiment: missing 'methods'");
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("random_draws")) c.random_draws = j.at("random_draws").get<int>();
    if (j.contains("models")) {
      const config::Json& m = j.at("models");
      config::reject_unknown_keys(m, {"case1", "case2"}, "models");
      if (m.contains("case1")) c.model_case1 = resolve(m.at("case1").get<std::string>(), base_dir);
      if (m.contains("case2")) c.model_case2 = resolve(m.at("case2").get<std::string>(), base_dir);
    }
    if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>(), base_dir);
    if (j.contains("record_wall_time")) c.record_wall_time = j.at("record_wall_time").get<bool>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

pkgnet::FeatureRow feature_row(const Scenario& s) {
  pkgnet::FeatureRow row;
  row.bob = s.geometry.bob_position;
  row.eve = s.geometry.eve_position;
  row.P_max_dbm = s.options.P_max_dbm;
  row.eta = s.options.eta;
  row.kappa = s.options.kappa;
  return row;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  if (c.grid.empty()) throw ConfigError("experiment: sweep grid is empty");
  if (c.methods.empty()) throw ConfigError("experiment: no methods given");
  if (c.random_draws < 1) throw ConfigError("experiment: random_draws must be >= 1");
  for (double v : c.grid) (void)apply_sweep(c.base, c.sweep, v).statistics();
  const auto models = load_models(c);

  const std::size_t n_methods = c.methods.size();
  std::vector<ResultRow> rows(c.grid.size() * n_methods);
  parallel_for(
      rows.size(),
      [&](std::size_t k) { rows[k] = run_point(c, k / n_methods, c.methods[k % n_methods], models); },
      c.workers);
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << "\n";
  for (const ResultRow& r : rows) {
    out << r.scenario << "," << r.method << "," << number(r.sweep) << "," << number(r.mi_ab)
        << "," << number(r.rsk) << "," << number(r.rsk1) << "," << number(r.rsk2) << ","
        << number(r.rho) << "," << number(r.wall_time_ms) << "," << r.seed << "\n";
  }
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv(out, rows);
}

BenchConfig bench_from_json(const config::Json& j, const std::string& base_dir) {
  config::reject_unknown_keys(j, {"base", "M_values", "locations", "seed", "model", "output"},
                              "bench");
  BenchConfig c;
  try {
    c.base = config::scenario_from_json(j.value("base", config::Json::object()));
    if (j.contains("M_values")) c.M_values = j.at("M_values").get<std::vector<int>>();
    if (j.contains("locations")) c.locations = j.at("locations").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("model")) c.model_case1 = resolve(j.at("model").get<std::string>(), base_dir);
    if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>(), base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bench config: ") + e.what());
  }
  return c;
}

std::vector<Vec3> bench_locations(int count, std::uint64_t seed) {
  Rng rng = Rng(seed).split("bench-locations");
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = rng.uniform(5.0, 15.0);
    const double y = rng.uniform(5.0, 15.0);
    out.emplace_back(x, y, 0.0);
  }
  return out;
}

TimingTable bench_timing(const BenchConfig& c) {
  if (c.M_values.empty() || c.locations < 1) {
    throw ConfigError("bench: need at least one M value and one location");
  }
  if (c.model_case1.empty()) throw ConfigError("bench: a case-1 model path is required");
  std::vector<pkgnet::Model> models;
  for (int M : c.M_values) {
    const std::string path = expand_model_path(c.model_case1, M, c.base.geometry.L());
    if (!std::filesystem::exists(path)) {
      throw ConfigError("model file '" + path + "' does not exist");
    }
    models.push_back(pkgnet::load_model(path));
    const auto& arch = models.back().network.arch;
    if (arch.M != M || arch.L != c.base.geometry.L() ||
        models.back().which != pkgnet::Case::EveBlind) {
      throw ConfigError("model file '" + path + "' does not match the bench setup");
    }
  }
  const std::vector<Vec3> locations = bench_locations(c.locations, c.seed);
  TimingTable table;
  table.M_values = c.M_values;
  for (std::size_t i = 0; i < c.M_values.size(); ++i) {
    Scenario s = c.base;
    s.geometry.M = c.M_values[i];
    double baseline = 0.0;
    double inference = 0.0;
    for (const Vec3& loc : locations) {
      s.geometry.bob_position = loc;
      place_eve(s.geometry, 0.5 * s.geometry.lambda);
      const ChannelStatistics stats = s.statistics();
      const pkgnet::FeatureRow row = feature_row(s);

      auto start = Clock::now();
      const DesignPoint d = pkgnet::infer(models[i].network, row, pkgnet::Case::EveBlind);
      inference += elapsed_ms(start);

      start = Clock::now();
      const waterfill::BaselineResult b = waterfill::baseline_case1(stats);
      baseline += elapsed_ms(start);
      if (!std::isfinite(b.value) || d.P.rows() != s.geometry.M) {
        throw NumericalError("bench: invalid result");
      }
    }
    table.baseline_ms.push_back(baseline / c.locations);
    table.inference_ms.push_back(inference / c.locations);
  }
  return table;
}

void write_timing_csv(std::ostream& out, const TimingTable& t) {
  out << "method";
  for (int M : t.M_values) out << ",M" << M << "_ms";
  out << "\nbaseline_case1";
  for (double v : t.baseline_ms) out << "," << number(v);
  out << "\npkgnet_case1";
  for (double v : t.inference_ms) out << "," << number(v);
  out << "\n";
}

CovarianceCheck covariance_check(std::uint64_t seed, std::size_t samples, int workers) {
  const ChannelStatistics stats = default_scenario(2, 4).statistics();
  Rng design_rng = Rng(seed).split("verify-design");
  const DesignPoint d = pkgnet::random_design(2, 4, stats.P_max, design_rng);
  const ObservationCovariances closed = observation_covariances(d, stats, effective_covariances(d, stats));
  oracle::EstimateOptions opts;
  opts.workers = workers;
  const oracle::EmpiricalCovarianceSet emp =
      oracle::estimate_covariances(stats, d, samples, Rng(seed).split("verify-mc"), opts);

  CovarianceCheck out;
  out.err_a = numerics::relative_frobenius_error(emp.R_a, closed.R_a);
  out.err_b = numerics::relative_frobenius_error(emp.R_b, closed.R_b);
  out.err_e = numerics::relative_frobenius_error(emp.R_e, closed.R_e);
  out.err_ab = numerics::relative_frobenius_error(emp.R_ab, closed.R_ab);
  out.err_ae = numerics::relative_frobenius_error(emp.R_ae, closed.R_ae);
  const SkrReport r = skr_lower_bound(d, stats);
  const oracle::McRates mc = oracle::mc_rates(emp);
  out.mi_closed = r.mi_ab;
  out.mi_mc = mc.mi_ab;
  out.rsk_closed = r.rsk;
  out.rsk_mc = mc.rsk;
  return out;
}

double dual_path_max_gap(std::uint64_t seed, int instances) {
  Rng rng = Rng(seed).split("verify-dual");
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int M = 2 + static_cast<int>(rng.next_u64() % 3);
    const int L = rng.uniform() < 0.5 ? 4 : 16;
    Scenario s = default_scenario(M, L);
    s.geometry.bob_position = Vec3(rng.uniform(5.0, 15.0), rng.uniform(5.0, 15.0), 0.0);
    place_eve(s.geometry, rng.uniform(0.05, 1.0) * s.geometry.lambda);
    s.options.eta = rng.uniform(0.0, 0.95);
    s.options.kappa = rng.uniform(0.0, 10.0);
    s.options.P_max_dbm = rng.uniform(10.0, 30.0);
    const ChannelStatistics stats = s.statistics();
    const DesignPoint d = pkgnet::random_design(M, L, stats.P_max, rng);
    const SkrReport f = skr_lower_bound(d, stats);
    const DirectSkr x = skr_direct(d, stats);
    worst = std::max({worst, std::fabs(f.mi_ab - x.mi_ab), std::fabs(f.rsk1 - x.rsk1),
                      std::fabs(f.rsk2 - x.rsk2)});
  }
  return worst;
}

double phase_bound_max_excess(std::uint64_t seed, int draws) {
  const ChannelStatistics stats = default_scenario(4, 16).statistics();
  const double bound = delta_u2(waterfill::equal_phase_vector(16), stats);
  Rng rng = Rng(seed).split("verify-phase");
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < draws; ++i) {
    ComplexVector theta(16);
    for (Eigen::Index l = 0; l < 16; ++l) {
      theta(l) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
    }
    worst = std::max(worst, delta_u2(theta, stats) - bound);
  }
  return worst;
}

double rho_zero_max_gap(std::uint64_t seed, int instances) {
  Rng rng = Rng(seed).split("verify-rho0");
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int M = 2 + static_cast<int>(rng.next_u64() % 3);
    Scenario s = default_scenario(M, 4);
    s.geometry.bob_position = Vec3(rng.uniform(5.0, 15.0), rng.uniform(5.0, 15.0), 0.0);
    place_eve(s.geometry, 0.5 * s.geometry.lambda);
    s.options.rho_override = 0.0;
    s.options.eta = rng.uniform(0.0, 0.9);
    const ChannelStatistics stats = s.statistics();
    const DesignPoint d = pkgnet::random_design(M, 4, stats.P_max, rng);
    const SkrReport r = skr_lower_bound(d, stats);
    worst = std::max(worst, std::fabs(r.rsk - r.mi_ab));
  }
  return worst;
}

std::vector<CheckResult> verify(const VerifyOptions& o) {
  std::vector<CheckResult> out;
  auto add = [&out](std::string name, bool ok, const std::string& detail) {
    out.push_back({std::move(name), ok, detail});
  };
  const CovarianceCheck cov = covariance_check(o.seed, o.mc_samples, o.workers);
  const double worst_cov = std::max({cov.err_a, cov.err_b, cov.err_e, cov.err_ab, cov.err_ae});
  std::ostringstream d1;
  d1 << "max relative Frobenius error " << worst_cov << " (limit 0.03)";
  add("covariance closed form vs Monte Carlo", worst_cov <= 0.03, d1.str());

  const double mi_rel = std::fabs(cov.mi_closed - cov.mi_mc) / std::fabs(cov.mi_closed);
  const double rsk_rel = std::fabs(cov.rsk_closed - cov.rsk_mc) / std::fabs(cov.rsk_closed);
  std::ostringstream d2;
  d2 << "MI " << cov.mi_closed << " vs " << cov.mi_mc << " (rel " << mi_rel << "), SKR "
     << cov.rsk_closed << " vs " << cov.rsk_mc << " (rel " << rsk_rel << ")";
  add("MI/SKR closed form vs Monte Carlo", mi_rel <= 0.03 && rsk_rel <= 0.05, d2.str());

  const double gap = dual_path_max_gap(o.seed, o.instances);
  std::ostringstream d3;
  d3 << "max gap " << gap << " bits over " << o.instances << " instances";
  add("direct vs factored SKR", gap <= 1e-8, d3.str());

  const double excess = phase_bound_max_excess(o.seed, 1000);
  std::ostringstream d4;
  d4 << "max excess over equal phase " << excess;
  add("equal-phase bound on delta_U^2", excess <= 1e-12, d4.str());

  const double rho_gap = rho_zero_max_gap(o.seed, 20);
  std::ostringstream d5;
  d5 << "max |rsk - mi_ab| " << rho_gap;
  add("rho = 0 reduces SKR to MI", rho_gap <= 1e-9, d5.str());
  return out;
}

}  // namespace pkglab::harness
