#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pkglab/channel.hpp"
#include "pkglab/config.hpp"
#include "pkglab/pkgnet.hpp"

namespace pkglab::harness {

inline constexpr const char* kCsvHeader =
    "scenario,method,sweep,mi_ab,rsk,rsk1,rsk2,rho,wall_time_ms,seed";

enum class SweepVariable { M, L, P_max, eta, eve_distance };
enum class Method { PkgnetCase1, PkgnetCase2, BaselineCase1, BaselineCase2, Random };

SweepVariable parse_sweep_variable(const std::string& name);
std::string sweep_variable_name(SweepVariable v);
Method parse_method(const std::string& name);
std::string method_name(Method m);

struct ExperimentConfig {
  std::string scenario = "experiment";
  Scenario base = default_scenario(4, 16);
  SweepVariable sweep = SweepVariable::M;
  std::vector<double> grid;           // eve_distance in wavelengths, P_max in dBm
  std::vector<Method> methods;
  std::uint64_t seed = 1;
  int random_draws = 100;
  /// Model file templates; "{M}" and "{L}" are replaced per grid point.
  std::string model_case1;
  std::string model_case2;
  std::string output;
  bool record_wall_time = false;
  int workers = 0;

  /// Throws ConfigError on an empty grid, no methods, values that cannot
  /// form a scenario, or missing/mismatched model files.
  void validate() const;
};

/// Keys: scenario, base (scenario object), sweep {variable, values},
/// methods, seed, random_draws, models {case1, case2}, output,
/// record_wall_time, workers. Relative model and output paths resolve
/// against `base_dir` when it is nonempty.
ExperimentConfig experiment_from_json(const config::Json& j, const std::string& base_dir = "");

/// Scenario for one grid value of the sweep.
Scenario apply_sweep(const Scenario& base, SweepVariable v, double value);

std::string expand_model_path(const std::string& pattern, int M, int L);

struct ResultRow {
  std::string scenario;
  std::string method;
  double sweep = 0.0;
  double mi_ab = 0.0;
  double rsk = 0.0;
  double rsk1 = 0.0;
  double rsk2 = 0.0;
  double rho = 0.0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
};

/// One row per (grid point, method) in grid-major order. The random method
/// averages each column over `random_draws` designs.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// Feature row matching a scenario's current operating point.
pkgnet::FeatureRow feature_row(const Scenario& scenario);

struct BenchConfig {
  Scenario base = default_scenario(4, 16);
  std::vector<int> M_values{2, 4, 8};
  int locations = 100;
  std::uint64_t seed = 1;
  std::string model_case1;   // template with {M}/{L}
  std::string output;
};

BenchConfig bench_from_json(const config::Json& j, const std::string& base_dir = "");

struct TimingTable {
  std::vector<int> M_values;
  std::vector<double> baseline_ms;    // mean baseline_case1 solve time per M
  std::vector<double> inference_ms;   // mean PKG-Net inference time per M
};

/// UE locations drawn uniformly from [5, 15]^2 at z = 0.
std::vector<Vec3> bench_locations(int count, std::uint64_t seed);

TimingTable bench_timing(const BenchConfig& config);
void write_timing_csv(std::ostream& out, const TimingTable& table);

/// Oracle-equivalence suite behind `verify`.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  std::size_t mc_samples = 200000;
  int instances = 100;
  int workers = 0;
};

struct CovarianceCheck {
  double err_a = 0.0, err_b = 0.0, err_e = 0.0, err_ab = 0.0, err_ae = 0.0;
  double mi_closed = 0.0, mi_mc = 0.0;
  double rsk_closed = 0.0, rsk_mc = 0.0;
};

/// M = 2, L = 4, eta = 0.4, kappa = 1, random design; closed forms against
/// `samples` Monte Carlo probes.
CovarianceCheck covariance_check(std::uint64_t seed, std::size_t samples, int workers = 0);

/// Largest |direct - factored| over MI, Rsk1 and Rsk2 across random instances.
double dual_path_max_gap(std::uint64_t seed, int instances);

/// Largest delta_U^2(random theta) - delta_U^2(equal phase), L = 16.
double phase_bound_max_excess(std::uint64_t seed, int draws);

/// Largest |rsk - mi_ab| with rho forced to zero.
double rho_zero_max_gap(std::uint64_t seed, int instances);

std::vector<CheckResult> verify(const VerifyOptions& options);

}  // namespace pkglab::harness
