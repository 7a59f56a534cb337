// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance [--only N[,N...]] [--seed S]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pkglab/channel.hpp"
#include "pkglab/harness.hpp"
#include "pkglab/pkgnet.hpp"
#include "pkglab/skr.hpp"
#include "pkglab/waterfill.hpp"

using namespace pkglab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Scenario random_scenario(Rng& rng, int M, int L) {
  Scenario s = default_scenario(M, L);
  s.geometry.bob_position = Vec3(rng.uniform(5, 15), rng.uniform(5, 15), 0.0);
  place_eve(s.geometry, rng.uniform(0.05, 1.0) * s.geometry.lambda);
  s.options.eta = rng.uniform(0.0, 0.95);
  s.options.kappa = rng.uniform(0.0, 10.0);
  s.options.P_max_dbm = rng.uniform(10.0, 30.0);
  return s;
}

// --- 1, 2 -------------------------------------------------------------------

harness::CovarianceCheck& covariance_result(std::uint64_t seed) {
  static bool done = false;
  static harness::CovarianceCheck result;
  if (!done) {
    result = harness::covariance_check(seed, 200000);
    done = true;
  }
  return result;
}

Outcome criterion1(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const harness::CovarianceCheck& c = covariance_result(seed);
  const double secs = seconds_since(t0);
  const double worst = std::max({c.err_a, c.err_b, c.err_e, c.err_ab, c.err_ae});
  return {worst <= 0.03 && secs < 120.0,
          "max relative Frobenius error " + fmt(worst) + " over R_a, R_b, R_e, R_ab, R_ae (" +
              fmt(secs) + " s)"};
}

Outcome criterion2(std::uint64_t seed) {
  const harness::CovarianceCheck& c = covariance_result(seed);
  const double mi = std::fabs(c.mi_closed - c.mi_mc) / c.mi_closed;
  const double rsk = std::fabs(c.rsk_closed - c.rsk_mc) / c.rsk_closed;
  return {mi <= 0.03 && rsk <= 0.05, "MI rel error " + fmt(mi) + ", SKR rel error " + fmt(rsk)};
}

// --- 3, 4, 9 ----------------------------------------------------------------

Outcome criterion3(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const double gap = harness::dual_path_max_gap(seed, 100);
  const double secs = seconds_since(t0);
  return {gap <= 1e-8 && secs < 30.0,
          "max |direct - factored| " + fmt(gap) + " bits over 100 instances (" + fmt(secs) +
              " s)"};
}

Outcome criterion4(std::uint64_t seed) {
  const double excess = harness::phase_bound_max_excess(seed, 1000);
  return {excess <= 1e-12, "max delta_U^2(random) - delta_U^2(equal) = " + fmt(excess)};
}

Outcome criterion9(std::uint64_t seed) {
  const double gap = harness::rho_zero_max_gap(seed, 20);
  return {gap <= 1e-9, "max |rsk - mi_ab| " + fmt(gap) + " bits over 20 instances"};
}

// --- 5 ----------------------------------------------------------------------

// Exhaustive search over x_1 with x_2 fixed by sum x_i / p_B,i = 2.
double grid_search(ModeObjective k, const RealVector& p_B, const ModeParams& mp) {
  const int points = 20000;
  double best = -1e300;
  for (int i = 0; i <= points; ++i) {
    const double x1 = 2.0 * p_B(0) * i / points;
    const double x2 = std::max(0.0, p_B(1) * (2.0 - x1 / p_B(0)));
    best = std::max(best, mode_value(k, mp, x1) + mode_value(k, mp, x2));
  }
  return best;
}

Outcome criterion5(std::uint64_t seed) {
  Rng rng = Rng(seed).split("acceptance-5");
  double worst_gap = 0.0, worst_residual = 0.0, worst_uniform = 1e300;
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelStatistics st = random_scenario(rng, 2, 4).statistics();
    const RealVector p_B = waterfill::mode_basis(st.R_B).eigenvalues;
    const ModeParams mp = waterfill::equal_phase_params(st);
    for (ModeObjective k :
         {ModeObjective::MutualInformation, ModeObjective::Rsk1, ModeObjective::Rsk2}) {
      const waterfill::Allocation a = waterfill::solve_allocation(k, p_B, mp);
      const double uniform = mode_value(k, mp, p_B(0)) + mode_value(k, mp, p_B(1));
      worst_gap = std::max(worst_gap, std::fabs(a.objective - grid_search(k, p_B, mp)));
      worst_residual = std::max(worst_residual, a.constraint_residual);
      worst_uniform = std::min(worst_uniform, a.objective - uniform);
    }
  }
  return {worst_gap <= 1e-3 && worst_residual <= 1e-8 && worst_uniform >= 0.0,
          "max |solver - grid| " + fmt(worst_gap) + " bits, max residual " +
              fmt(worst_residual) + ", min gain over uniform " + fmt(worst_uniform) + " bits"};
}

// --- 6 ----------------------------------------------------------------------

Outcome criterion6(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const Scenario base = default_scenario(2, 4);
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const pkgnet::Case c = s % 2 == 0 ? pkgnet::Case::EveBlind : pkgnet::Case::EveAware;
    const pkgnet::Batch batch = pkgnet::make_batch(
        base, pkgnet::sample_rows(4, {}, c, base.geometry.lambda,
                                  Rng(seed).split("acceptance-6-rows", s)));
    const pkgnet::Network net = pkgnet::Network::initialize(
        pkgnet::architecture_for(c, 2, 4), Rng(seed).split("acceptance-6-net", s).key());
    const RealVector analytic = pkgnet::loss_and_gradient(net, batch, c, 1).gradient;
    RealVector fd(net.params.size());
    pkgnet::Network probe = net;
    for (Eigen::Index i = 0; i < fd.size(); ++i) {
      // Step balances roundoff (grows as 1/h) against ReLU kinks.
      const double h = 1e-5 * std::max(1.0, std::fabs(net.params(i)));
      probe.params(i) = net.params(i) + h;
      const double up = pkgnet::loss(probe, batch, c);
      probe.params(i) = net.params(i) - h;
      const double down = pkgnet::loss(probe, batch, c);
      probe.params(i) = net.params(i);
      fd(i) = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, (analytic - fd).norm() / fd.norm());
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 60.0,
          "max relative error " + fmt(worst) + " over 10 weight settings (" + fmt(secs) + " s)"};
}

// --- 7 ----------------------------------------------------------------------

Outcome criterion7(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const Scenario base = default_scenario(4, 16);
  pkgnet::TrainConfig cfg;
  cfg.epochs_max = 30;
  cfg.samples_per_epoch = 300;
  cfg.seed = seed;
  const pkgnet::TrainResult trained = pkgnet::train(cfg, pkgnet::Case::EveBlind, base);

  const auto rows = pkgnet::sample_rows(100, cfg.ranges, pkgnet::Case::EveBlind,
                                        base.geometry.lambda,
                                        Rng(seed).split("acceptance-7-heldout"));
  Rng rng = Rng(seed).split("acceptance-7-random");
  double net = 0.0, random = 0.0, baseline = 0.0;
  for (const auto& row : rows) {
    const ChannelStatistics st = pkgnet::row_statistics(base, row);
    net += mi_ab(pkgnet::infer(trained.network, row, pkgnet::Case::EveBlind), st);
    double r = 0.0;
    for (int k = 0; k < 100; ++k) r += mi_ab(pkgnet::random_design(4, 16, st.P_max, rng), st);
    random += r / 100.0;
    baseline += waterfill::baseline_case1(st).value;
  }
  net /= 100.0;
  random /= 100.0;
  baseline /= 100.0;
  const double secs = seconds_since(t0);
  return {net >= 1.1 * random && net >= 0.95 * baseline && secs < 900.0,
          "PKG-Net " + fmt(net) + " bits, random " + fmt(random) + " (ratio " +
              fmt(net / random) + "), baseline " + fmt(baseline) + " (ratio " +
              fmt(net / baseline) + "), " + fmt(secs) + " s"};
}

// --- 8 ----------------------------------------------------------------------

std::vector<harness::ResultRow> sweep(harness::SweepVariable v, std::vector<double> grid,
                                      std::uint64_t seed) {
  harness::ExperimentConfig c;
  c.scenario = "trend";
  c.base = default_scenario(4, 16);
  c.sweep = v;
  c.grid = std::move(grid);
  c.methods = {harness::Method::BaselineCase1};
  c.seed = seed;
  return harness::run_experiment(c);
}

Outcome criterion8(std::uint64_t seed) {
  std::ostringstream detail;
  bool ok = true;
  auto check = [&](const char* name, const std::vector<harness::ResultRow>& rows,
                   const std::function<double(const harness::ResultRow&)>& value,
                   const std::function<bool(double, double)>& order) {
    detail << name << " [";
    bool good = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail << (i ? " " : "") << fmt(value(rows[i]));
      if (i > 0 && !order(value(rows[i - 1]), value(rows[i]))) good = false;
    }
    detail << "]" << (good ? "" : " VIOLATED") << "; ";
    ok = ok && good;
  };
  auto mi = [](const harness::ResultRow& r) { return r.mi_ab; };
  auto rsk = [](const harness::ResultRow& r) { return r.rsk; };
  check("MI vs M", sweep(harness::SweepVariable::M, {2, 4, 6, 8}, seed), mi,
        [](double a, double b) { return b > a; });
  check("MI vs P_max", sweep(harness::SweepVariable::P_max, {10, 15, 20, 25, 30}, seed), mi,
        [](double a, double b) { return b >= a; });
  check("MI vs eta", sweep(harness::SweepVariable::eta, {0, 0.3, 0.6, 0.9}, seed), mi,
        [](double a, double b) { return b <= a; });
  check("SKR at 0.05/0.5 wavelengths",
        sweep(harness::SweepVariable::eve_distance, {0.05, 0.5}, seed), rsk,
        [](double a, double b) { return b > a; });
  return {ok, detail.str()};
}

// --- 10 ---------------------------------------------------------------------

Outcome criterion10(std::uint64_t seed) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("pkglab_acceptance_" + std::to_string(seed));
  std::filesystem::create_directories(dir);
  const Scenario base = default_scenario(8, 16);
  pkgnet::TrainConfig cfg;
  cfg.epochs_max = 5;
  cfg.samples_per_epoch = 200;
  cfg.seed = seed;
  const pkgnet::TrainResult trained = pkgnet::train(cfg, pkgnet::Case::EveBlind, base);
  const std::string model = (dir / "model_M{M}_L{L}.pkgnet.json").string();
  pkgnet::save_model(harness::expand_model_path(model, 8, 16),
                     {trained.network, pkgnet::Case::EveBlind, base});

  harness::BenchConfig b;
  b.base = base;
  b.M_values = {8};
  b.locations = 100;
  b.seed = seed;
  b.model_case1 = model;
  const harness::TimingTable t = harness::bench_timing(b);
  std::filesystem::remove_all(dir);
  return {t.inference_ms[0] < t.baseline_ms[0],
          "M=8: inference " + fmt(t.inference_ms[0]) + " ms, baseline " + fmt(t.baseline_ms[0]) +
              " ms (mean over 100 locations)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 7;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--only N[,N...]] [--seed S]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome(std::uint64_t)>>> criteria = {
      {"covariance oracle equivalence", criterion1},
      {"MI/SKR oracle equivalence", criterion2},
      {"direct vs factored SKR identity", criterion3},
      {"equal-phase bound on delta_U^2", criterion4},
      {"water-filling vs grid search", criterion5},
      {"gradient vs finite differences", criterion6},
      {"training efficacy at desk scale", criterion7},
      {"baseline trends", criterion8},
      {"rho = 0 consistency", criterion9},
      {"inference faster than baseline", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(seed);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": "
              << o.detail << std::endl;
    if (!o.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
