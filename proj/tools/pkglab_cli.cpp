// pkglab command-line front end.
//
// Exit status: 0 success, 2 configuration error (including bad usage),
// 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "pkglab/config.hpp"
#include "pkglab/harness.hpp"
#include "pkglab/pkgnet.hpp"
#include "pkglab/probing.hpp"
#include "pkglab/skr.hpp"
#include "pkglab/waterfill.hpp"

using namespace pkglab;
using config::Json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::string config_dir(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

// Relative paths inside a config file are taken from the file's directory.
std::string from_config(const std::string& path, const Common& c) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(config_dir(c.config)) / path).string();
}

void make_parent_dirs(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

Json load_config(const Common& c, bool required) {
  if (c.config.empty()) {
    if (required) throw ConfigError("--config is required for this subcommand");
    return Json::object();
  }
  return config::read_json_file(c.config);
}

/// Writes to --out when given, otherwise stdout.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ConfigError("cannot write '" + c.out + "'");
  f << text;
}

Json complex_matrix_json(const ComplexMatrix& m) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array();
    Json ii = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

Json design_json(const DesignPoint& d) {
  Json phases = Json::array();
  for (Eigen::Index l = 0; l < d.theta.size(); ++l) phases.push_back(std::arg(d.theta(l)));
  return {{"P", complex_matrix_json(d.P)}, {"theta_phase_rad", phases}};
}

Json report_json(const SkrReport& r) {
  return {{"mi_ab", r.mi_ab}, {"rsk1", r.rsk1},   {"rsk2", r.rsk2},
          {"rsk", r.rsk},     {"rho", r.rho},     {"winning_branch", r.winning_branch},
          {"M", r.M},         {"L", r.L},         {"P_max_w", r.P_max},
          {"eta", r.eta},     {"kappa", r.kappa}, {"rank_reduced", r.rank_reduced},
          {"seed", r.seed}};
}

/// Design from the "design" key: "random" (default), "equal" (scaled
/// identity, equal phases), or {"P": {"re", "im"}, "theta_phase_rad": [...]}.
DesignPoint design_from_json(const Json& j, const ChannelStatistics& stats, std::uint64_t seed) {
  const int M = stats.M();
  const int L = stats.L();
  if (!j.contains("design") || j.at("design") == "random") {
    Rng rng = Rng(seed).split("cli-design");
    return pkgnet::random_design(M, L, stats.P_max, rng);
  }
  const Json& d = j.at("design");
  if (d == "equal") {
    DesignPoint out;
    out.P = ComplexMatrix::Identity(M, M) * std::sqrt(stats.P_max / M);
    out.theta = waterfill::equal_phase_vector(L);
    return out;
  }
  if (!d.is_object()) throw ConfigError("design must be \"random\", \"equal\" or an object");
  config::reject_unknown_keys(d, {"P", "theta_phase_rad"}, "design");
  try {
    const auto re = d.at("P").at("re").get<std::vector<std::vector<double>>>();
    const auto im = d.at("P").at("im").get<std::vector<std::vector<double>>>();
    const auto phases = d.at("theta_phase_rad").get<std::vector<double>>();
    if (re.size() != static_cast<std::size_t>(M) || im.size() != re.size() ||
        phases.size() != static_cast<std::size_t>(L)) {
      throw ConfigError("design: dimensions do not match the scenario");
    }
    DesignPoint out;
    out.P.resize(M, M);
    for (int r = 0; r < M; ++r) {
      if (re[r].size() != static_cast<std::size_t>(M) || im[r].size() != re[r].size()) {
        throw ConfigError("design: P must be M x M");
      }
      for (int c = 0; c < M; ++c) out.P(r, c) = Complex(re[r][c], im[r][c]);
    }
    out.theta.resize(L);
    for (int l = 0; l < L; ++l) out.theta(l) = std::polar(1.0, phases[l]);
    out.validate(stats.P_max);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
}

Scenario scenario_of(const Json& j) {
  return config::scenario_from_json(j.value("scenario", Json::object()));
}

int cmd_skr(const Common& c) {
  const Json j = load_config(c, false);
  config::reject_unknown_keys(j, {"scenario", "design"}, "skr config");
  const ChannelStatistics stats = scenario_of(j).statistics();
  const std::uint64_t seed = c.seed.value_or(1);
  const DesignPoint d = design_from_json(j, stats, seed);
  SkrReport r = skr_lower_bound(d, stats);
  r.seed = seed;
  emit(c, Json{{"report", report_json(r)}, {"design", design_json(d)}}.dump(2) + "\n");
  return 0;
}

int cmd_probe(const Common& c, int count) {
  if (count < 1) throw ConfigError("--count must be >= 1");
  const Json j = load_config(c, false);
  config::reject_unknown_keys(j, {"scenario", "design"}, "probe config");
  const ChannelStatistics stats = scenario_of(j).statistics();
  const std::uint64_t seed = c.seed.value_or(1);
  const DesignPoint d = design_from_json(j, stats, seed);
  const ChannelSampler sampler(stats);
  const ComplexMatrix pilot = build_downlink_pilot(stats.M());
  std::ostringstream out;
  out << "round,signal,index,re,im\n";
  out.precision(17);
  for (int k = 0; k < count; ++k) {
    Rng rng = Rng(seed).split("cli-probe", static_cast<std::uint64_t>(k));
    const ChannelRealization h = sampler.sample(rng);
    const ProbingObservations y = probe(h, d, stats, pilot, rng);
    const std::pair<const char*, const ComplexVector*> signals[] = {
        {"y_a", &y.y_a}, {"y_b", &y.y_b}, {"y_e", &y.y_e}};
    for (const auto& [name, v] : signals) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        out << k << "," << name << "," << i << "," << (*v)(i).real() << "," << (*v)(i).imag()
            << "\n";
      }
    }
  }
  emit(c, out.str());
  return 0;
}

int cmd_waterfill(const Common& c) {
  const Json j = load_config(c, false);
  config::reject_unknown_keys(j, {"scenario", "restarts"}, "waterfill config");
  const ChannelStatistics stats = scenario_of(j).statistics();
  waterfill::SolverOptions opts;
  if (c.seed) opts.seed = *c.seed;
  if (j.contains("restarts")) opts.restarts = j.at("restarts").get<int>();
  auto describe = [](const waterfill::BaselineResult& b) {
    Json p = Json::array();
    for (Eigen::Index i = 0; i < b.allocation.p.size(); ++i) p.push_back(b.allocation.p(i));
    return Json{{"branch", waterfill::branch_name(b.branch)},
                {"value", b.value},
                {"allocation", p},
                {"mu", b.allocation.mu},
                {"fallback", b.allocation.fallback},
                {"constraint_residual", b.allocation.constraint_residual},
                {"report", report_json(b.report)},
                {"design", design_json(b.design)}};
  };
  const Json out = {{"case1", describe(waterfill::baseline_case1(stats, opts))},
                    {"case2", describe(waterfill::baseline_case2(stats, opts))}};
  emit(c, out.dump(2) + "\n");
  return 0;
}

pkgnet::SamplingRanges ranges_from_json(const Json& j) {
  config::reject_unknown_keys(j,
                              {"ue_min", "ue_max", "P_min_dbm", "P_max_dbm", "eta_min",
                               "eta_max", "kappa_min", "kappa_max"},
                              "ranges");
  pkgnet::SamplingRanges r;
  r.ue_min = j.value("ue_min", r.ue_min);
  r.ue_max = j.value("ue_max", r.ue_max);
  r.P_min_dbm = j.value("P_min_dbm", r.P_min_dbm);
  r.P_max_dbm = j.value("P_max_dbm", r.P_max_dbm);
  r.eta_min = j.value("eta_min", r.eta_min);
  r.eta_max = j.value("eta_max", r.eta_max);
  r.kappa_min = j.value("kappa_min", r.kappa_min);
  r.kappa_max = j.value("kappa_max", r.kappa_max);
  if (!(r.ue_min <= r.ue_max && r.P_min_dbm <= r.P_max_dbm && r.eta_min >= 0.0 &&
        r.eta_min <= r.eta_max && r.eta_max <= 1.0 && r.kappa_min >= 0.0 &&
        r.kappa_min <= r.kappa_max)) {
    throw ConfigError("ranges: each min must not exceed its max, eta within [0, 1], kappa >= 0");
  }
  return r;
}

int cmd_train(const Common& c) {
  const Json j = load_config(c, true);
  config::reject_unknown_keys(j,
                              {"scenario", "case", "epochs_max", "samples_per_epoch",
                               "batch_size", "learning_rate", "early_stop_patience",
                               "validation_size", "hidden", "ranges", "seed", "workers",
                               "output"},
                              "train config");
  pkgnet::TrainConfig t;
  pkgnet::Case which = pkgnet::Case::EveBlind;
  std::string output;
  try {
    const int case_id = j.value("case", 1);
    if (case_id != 1 && case_id != 2) throw ConfigError("train: case must be 1 or 2");
    which = case_id == 1 ? pkgnet::Case::EveBlind : pkgnet::Case::EveAware;
    t.epochs_max = j.value("epochs_max", t.epochs_max);
    t.samples_per_epoch = j.value("samples_per_epoch", t.samples_per_epoch);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.early_stop_patience = j.value("early_stop_patience", t.early_stop_patience);
    t.validation_size = j.value("validation_size", t.validation_size);
    t.hidden = j.value("hidden", t.hidden);
    t.seed = j.value("seed", t.seed);
    t.workers = j.value("workers", t.workers);
    if (j.contains("ranges")) t.ranges = ranges_from_json(j.at("ranges"));
    output = from_config(j.value("output", std::string()), c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (c.seed) t.seed = *c.seed;
  if (!c.out.empty()) output = c.out;
  if (output.empty()) throw ConfigError("train: give an output model path (--out or \"output\")");
  const Scenario base = scenario_of(j);
  output = harness::expand_model_path(output, base.geometry.M, base.geometry.L());

  const pkgnet::TrainResult result = pkgnet::train(t, which, base, [](const pkgnet::EpochLog& e) {
    std::cerr << "epoch " << e.epoch << " train_loss " << e.train_loss << " validation_loss "
              << e.validation_loss << "\n";
  });
  make_parent_dirs(output);
  pkgnet::save_model(output, {result.network, which, base});
  std::cout << "best epoch " << result.best_epoch
            << (result.early_stopped ? " (early stop)" : "") << ", model written to " << output
            << "\n";
  return 0;
}

int cmd_infer(const Common& c, const std::string& model_path) {
  if (model_path.empty()) throw ConfigError("infer: --model is required");
  const pkgnet::Model model = pkgnet::load_model(model_path);
  Scenario s = model.scenario;
  if (!c.config.empty()) {
    const Json j = load_config(c, true);
    config::reject_unknown_keys(j, {"scenario"}, "infer config");
    s = scenario_of(j);
  }
  if (s.geometry.M != model.network.arch.M || s.geometry.L() != model.network.arch.L) {
    throw ConfigError("infer: scenario M/L differ from the model");
  }
  const ChannelStatistics stats = s.statistics();
  const DesignPoint d = pkgnet::infer(model.network, harness::feature_row(s), model.which);
  emit(c, Json{{"report", report_json(skr_lower_bound(d, stats))}, {"design", design_json(d)}}
              .dump(2) + "\n");
  return 0;
}

int cmd_experiment(const Common& c) {
  const Json j = load_config(c, true);
  harness::ExperimentConfig e = harness::experiment_from_json(j, config_dir(c.config));
  if (c.seed) e.seed = *c.seed;
  if (!c.out.empty()) e.output = c.out;
  const auto rows = harness::run_experiment(e);
  if (e.output.empty()) {
    harness::write_csv(std::cout, rows);
  } else {
    make_parent_dirs(e.output);
    harness::write_csv(e.output, rows);
    std::cout << rows.size() << " rows written to " << e.output << "\n";
  }
  return 0;
}

int cmd_bench(const Common& c) {
  const Json j = load_config(c, true);
  harness::BenchConfig b = harness::bench_from_json(j, config_dir(c.config));
  if (c.seed) b.seed = *c.seed;
  if (!c.out.empty()) b.output = c.out;
  const harness::TimingTable t = harness::bench_timing(b);
  std::ostringstream csv;
  harness::write_timing_csv(csv, t);
  if (b.output.empty()) {
    std::cout << csv.str();
  } else {
    make_parent_dirs(b.output);
    std::ofstream f(b.output);
    if (!f) throw ConfigError("cannot write '" + b.output + "'");
    f << csv.str();
    std::cout << csv.str();
  }
  return 0;
}

int cmd_verify(const Common& c, std::size_t samples) {
  harness::VerifyOptions o;
  o.seed = c.seed.value_or(7);
  o.mc_samples = samples;
  const auto results = harness::verify(o);
  int failed = 0;
  std::ostringstream text;
  for (const auto& r : results) {
    text << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    if (!r.passed) ++failed;
  }
  text << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  emit(c, text.str());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pkglab: key generation rate analysis and precoder/IRS design"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed_value = 0;
  int probe_count = 1;
  std::string model_path;
  std::size_t verify_samples = 200000;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file");
    sub->add_option("--seed", seed_value, "Root seed")->each([&](const std::string&) {
      common.seed = seed_value;
    });
    sub->add_option("--out", common.out, "Output path (stdout when omitted)");
  };
  auto* skr = app.add_subcommand("skr", "Evaluate MI and SKR for one design point");
  auto* probe = app.add_subcommand("probe", "Emit raw probing observations as CSV");
  probe->add_option("--count", probe_count, "Number of probing rounds");
  auto* waterfill = app.add_subcommand("waterfill", "Run the water-filling baselines");
  auto* train = app.add_subcommand("train", "Train PKG-Net");
  auto* infer = app.add_subcommand("infer", "Design with a trained model");
  infer->add_option("--model", model_path, "Model file")->required();
  auto* experiment = app.add_subcommand("experiment", "Run a sweep and write CSV");
  auto* bench = app.add_subcommand("bench", "Baseline vs inference timing");
  auto* verify = app.add_subcommand("verify", "Run the oracle-equivalence suite");
  verify->add_option("--samples", verify_samples, "Monte Carlo probes");
  for (auto* sub : {skr, probe, waterfill, train, infer, experiment, bench, verify}) {
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (*skr) return cmd_skr(common);
    if (*probe) return cmd_probe(common, probe_count);
    if (*waterfill) return cmd_waterfill(common);
    if (*train) return cmd_train(common);
    if (*infer) return cmd_infer(common, model_path);
    if (*experiment) return cmd_experiment(common);
    if (*bench) return cmd_bench(common);
    if (*verify) return cmd_verify(common, verify_samples);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
