#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pkglab/channel.hpp"
#include "pkglab/pkgnet.hpp"
#include "pkglab/skr.hpp"

using namespace pkglab;
using namespace pkglab::pkgnet;

namespace {

// End-to-end central differences of the batch loss over every weight.
RealVector finite_difference(const Network& net, const Batch& batch, Case c, double step) {
  RealVector g(net.params.size());
  Network probe = net;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double h = step * std::max(1.0, std::fabs(net.params(i)));
    probe.params(i) = net.params(i) + h;
    const double up = loss(probe, batch, c);
    probe.params(i) = net.params(i) - h;
    const double down = loss(probe, batch, c);
    probe.params(i) = net.params(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Batch small_batch(Case c, int M, int L, std::size_t n, std::uint64_t seed) {
  const Scenario base = default_scenario(M, L);
  return make_batch(base, sample_rows(n, {}, c, base.geometry.lambda, Rng(seed)));
}

}  // namespace

TEST(Network, ArchitectureSizes) {
  const Architecture a = architecture_for(Case::EveBlind, 4, 16);
  EXPECT_EQ(a.input_dim, 6);
  EXPECT_EQ(a.p_outputs(), 32);
  EXPECT_EQ(a.theta_outputs(), 32);
  EXPECT_EQ(a.parameter_count(), 6 * 100 + 100 + 100 * 100 + 100 + 32 * 100 + 32 + 32 * 100 + 32);
  EXPECT_EQ(architecture_for(Case::EveAware, 4, 16).input_dim, 9);
}

TEST(Network, ZeroWeightsGiveZeroOutputs) {
  const Network net = Network::zeros(architecture_for(Case::EveBlind, 2, 4, 8));
  const ForwardCache c = forward(net, RealVector::Ones(6));
  EXPECT_EQ(c.p_raw.norm(), 0.0);
  EXPECT_EQ(c.theta_raw.norm(), 0.0);
}

TEST(Network, DeterministicForward) {
  const Architecture a = architecture_for(Case::EveAware, 2, 4, 16);
  const Network x = Network::initialize(a, 5);
  const Network y = Network::initialize(a, 5);
  const RealVector in = RealVector::LinSpaced(9, -1.0, 1.0);
  EXPECT_EQ(forward(x, in).p_raw, forward(y, in).p_raw);
  EXPECT_NE(Network::initialize(a, 6).params, x.params);
}

TEST(Network, RejectsWrongInputSize) {
  const Network net = Network::initialize(architecture_for(Case::EveBlind, 2, 4, 8), 1);
  EXPECT_THROW(forward(net, RealVector::Ones(9)), ConfigError);
}

TEST(Network, BackwardMatchesOutputJacobian) {
  const Network net = Network::initialize(architecture_for(Case::EveBlind, 2, 4, 12), 3);
  const RealVector in = RealVector::LinSpaced(6, 0.1, 0.9);
  const ForwardCache c = forward(net, in);
  // Scalar s = w_p . p_raw + w_t . theta_raw.
  const RealVector wp = RealVector::LinSpaced(c.p_raw.size(), -1.0, 1.0);
  const RealVector wt = RealVector::LinSpaced(c.theta_raw.size(), 0.5, -0.5);
  const RealVector g = backward(net, c, wp, wt);
  Network probe = net;
  for (Eigen::Index i = 0; i < g.size(); i += 7) {
    const double h = 1e-6;
    probe.params(i) += h;
    const ForwardCache up = forward(probe, in);
    probe.params(i) -= 2 * h;
    const ForwardCache dn = forward(probe, in);
    probe.params(i) += h;
    const double fd = (wp.dot(up.p_raw - dn.p_raw) + wt.dot(up.theta_raw - dn.theta_raw)) / (2 * h);
    EXPECT_NEAR(g(i), fd, 1e-6 * std::max(1.0, std::fabs(fd)));
  }
}

TEST(Normalize, IdentityPrecoderAndZeroPhase) {
  const int M = 3, L = 4;
  RealVector p = RealVector::Zero(2 * M * M);
  for (int i = 0; i < M; ++i) p(i * M + i) = 1.0;
  RealVector t = RealVector::Zero(2 * L);
  t.head(L).setOnes();
  const DesignPoint d = normalize_outputs(p, t, M, M, L);
  EXPECT_LE((d.P - ComplexMatrix::Identity(M, M)).norm(), 1e-15);
  for (int l = 0; l < L; ++l) EXPECT_EQ(d.theta(l), Complex(1.0, 0.0));
}

TEST(Normalize, ConstraintsHoldExactly) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    RealVector p(8), t(8);
    for (auto& v : p) v = rng.normal();
    for (auto& v : t) v = rng.normal();
    const double P_max = rng.uniform(0.01, 1.0);
    const DesignPoint d = normalize_outputs(p, t, P_max, 2, 4);
    EXPECT_NEAR(d.P.squaredNorm(), P_max, 1e-12 * P_max);
    for (int l = 0; l < 4; ++l) EXPECT_NEAR(std::abs(d.theta(l)), 1.0, 1e-12);
  }
}

TEST(Normalize, RowMajorRealThenImaginary) {
  RealVector p(8);
  p << 1, 2, 3, 4, 5, 6, 7, 8;
  const DesignPoint d = normalize_outputs(p, RealVector::Ones(2), p.squaredNorm(), 2, 1);
  EXPECT_NEAR(d.P(0, 1).real(), 2.0, 1e-12);
  EXPECT_NEAR(d.P(1, 0).real(), 3.0, 1e-12);
  EXPECT_NEAR(d.P(1, 0).imag(), 7.0, 1e-12);
}

TEST(Normalize, ZeroPowerRejectedZeroPhaseDefaults) {
  EXPECT_THROW(normalize_outputs(RealVector::Zero(8), RealVector::Ones(8), 1.0, 2, 4),
               NumericalError);
  const DesignPoint d = normalize_outputs(RealVector::Ones(8), RealVector::Zero(8), 1.0, 2, 4);
  for (int l = 0; l < 4; ++l) EXPECT_EQ(d.theta(l), Complex(1.0, 0.0));
}

TEST(Loss, IdenticalRowsGiveRowObjective) {
  const Scenario base = default_scenario(2, 4);
  const FeatureRow row;
  const Batch b = make_batch(base, {row, row, row});
  const Network net = Network::initialize(architecture_for(Case::EveBlind, 2, 4, 10), 2);
  const DesignPoint d = infer(net, row, Case::EveBlind);
  EXPECT_NEAR(loss(net, b, Case::EveBlind), -mi_ab(d, row_statistics(base, row)), 1e-12);
}

TEST(Loss, ZeroRhoCasesAgree) {
  Scenario base = default_scenario(2, 4);
  base.options.rho_override = 0.0;
  const FeatureRow row;
  const Network net = Network::initialize(architecture_for(Case::EveBlind, 2, 4, 10), 2);
  const DesignPoint d = infer(net, row, Case::EveBlind);
  const ChannelStatistics st = row_statistics(base, row);
  EXPECT_NEAR(row_objective(d, st, Case::EveBlind), row_objective(d, st, Case::EveAware), 1e-9);
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (Case c : {Case::EveBlind, Case::EveAware}) {
    const Batch b = small_batch(c, 2, 4, 4, 17);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Network net = Network::initialize(architecture_for(c, 2, 4, 16), 100 + s);
      const LossGradient lg = loss_and_gradient(net, b, c, 1);
      const RealVector fd = finite_difference(net, b, c, 1e-6);
      EXPECT_LE((lg.gradient - fd).norm() / fd.norm(), 1e-5);
      EXPECT_NEAR(lg.loss, loss(net, b, c), 1e-12);
    }
  }
}

TEST(Gradient, DesignGradientMatchesFiniteDifferences) {
  const ChannelStatistics st = default_scenario(2, 4).statistics();
  Rng rng(5);
  const DesignPoint d = random_design(2, 4, st.P_max, rng);
  for (Case c : {Case::EveBlind, Case::EveAware}) {
    const DesignGradient g = objective_gradient(d, st, c);
    EXPECT_NEAR(g.value, row_objective(d, st, c), 1e-10);
    const double scale = std::sqrt(st.P_max);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) {
        for (Complex dir : {Complex(1, 0), Complex(0, 1)}) {
          const double h = 1e-7 * scale;
          DesignPoint up = d, dn = d;
          up.P(r, k) += h * dir;
          dn.P(r, k) -= h * dir;
          const double fd = (row_objective(up, st, c) - row_objective(dn, st, c)) / (2 * h);
          const double an = dir.real() != 0 ? g.dP(r, k).real() : g.dP(r, k).imag();
          EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::fabs(fd)));
        }
      }
    }
  }
}

TEST(Gradient, ConstantObjectiveHasZeroGradient) {
  // One antenna and one IRS element: the power and unit-modulus layers leave
  // nothing to optimize, so the raw-output gradient vanishes.
  const ChannelStatistics st = default_scenario(1, 1).statistics();
  RealVector p(2), t(2);
  p << 0.3, -1.2;
  t << 0.7, 0.4;
  const RawGradient g = raw_output_gradient(p, t, st, Case::EveBlind);
  EXPECT_LE(g.g_p.norm(), 1e-9 * std::fabs(g.value));
  EXPECT_LE(g.g_theta.norm(), 1e-9 * std::fabs(g.value));
}

TEST(Gradient, ScalesLinearly) {
  const Batch b = small_batch(Case::EveBlind, 2, 4, 2, 3);
  const Batch doubled{{b.rows[0], b.rows[1], b.rows[0], b.rows[1]},
                      {b.stats[0], b.stats[1], b.stats[0], b.stats[1]}};
  const Network net = Network::initialize(architecture_for(Case::EveBlind, 2, 4, 8), 9);
  const LossGradient a = loss_and_gradient(net, b, Case::EveBlind, 1);
  const LossGradient c = loss_and_gradient(net, doubled, Case::EveBlind, 2);
  EXPECT_LE((a.gradient - c.gradient).norm(), 1e-12 * a.gradient.norm());
}

TEST(Train, DeterministicAndImproves) {
  const Scenario base = default_scenario(2, 4);
  TrainConfig cfg;
  cfg.epochs_max = 5;
  cfg.samples_per_epoch = 60;
  cfg.batch_size = 20;
  cfg.validation_size = 30;
  cfg.hidden = 16;
  cfg.seed = 3;
  const TrainResult a = train(cfg, Case::EveBlind, base);
  const TrainResult b = train(cfg, Case::EveBlind, base);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].validation_loss, b.log[i].validation_loss);
    if (i > 0) EXPECT_LE(a.log[i].best_validation_loss, a.log[i - 1].best_validation_loss);
  }
  EXPECT_EQ(a.network.params, b.network.params);
  EXPECT_LT(a.log.back().best_validation_loss, a.log.front().train_loss);
}

TEST(Train, LargeRicianFactorStaysFinite) {
  const Scenario base = default_scenario(2, 4);
  TrainConfig cfg;
  cfg.epochs_max = 3;
  cfg.samples_per_epoch = 40;
  cfg.batch_size = 20;
  cfg.validation_size = 20;
  cfg.hidden = 16;
  cfg.ranges.kappa_min = 10.0;
  cfg.ranges.kappa_max = 10.0;
  const TrainResult r = train(cfg, Case::EveAware, base);
  for (const EpochLog& e : r.log) EXPECT_TRUE(std::isfinite(e.validation_loss));
}

TEST(Train, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(train(cfg, Case::EveBlind, default_scenario(2, 4)), ConfigError);
}

TEST(Model, RoundTripIsLossless) {
  const Scenario base = default_scenario(2, 4);
  Model m{Network::initialize(architecture_for(Case::EveAware, 2, 4, 12), 77), Case::EveAware,
          base};
  const std::string path =
      (std::filesystem::temp_directory_path() / "pkglab_roundtrip.pkgnet.json").string();
  save_model(path, m);
  const Model back = load_model(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.network.params, m.network.params);
  EXPECT_EQ(back.network.seed, 77u);
  EXPECT_EQ(back.which, Case::EveAware);
  EXPECT_EQ(back.scenario.geometry.M, 2);
  EXPECT_EQ(back.scenario.geometry.bob_position, base.geometry.bob_position);
}

TEST(Model, RejectsMissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), ConfigError);
}

TEST(RandomDesign, MeetsConstraints) {
  Rng rng(1);
  const DesignPoint d = random_design(4, 16, 0.3, rng);
  EXPECT_NO_THROW(d.validate(0.3));
}
