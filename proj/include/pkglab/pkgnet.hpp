#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pkglab/channel.hpp"
#include "pkglab/probing.hpp"
#include "pkglab/rng.hpp"
#include "pkglab/skr.hpp"

namespace pkglab::pkgnet {

/// Case 1 ignores Eve and maximizes I(y_a; y_b); case 2 also sees Eve's
/// location and maximizes the SKR lower bound.
enum class Case { EveBlind = 1, EveAware = 2 };

struct Architecture {
  int input_dim = 6;
  int hidden = 100;
  int M = 4;
  int L = 16;

  [[nodiscard]] int p_outputs() const { return 2 * M * M; }
  [[nodiscard]] int theta_outputs() const { return 2 * L; }
  [[nodiscard]] Eigen::Index parameter_count() const;
};

Architecture architecture_for(Case c, int M, int L, int hidden = 100);

/// One operating point seen by the network. Eve is ignored in case 1 except
/// for SKR reporting.
struct FeatureRow {
  Vec3 bob{10.0, 10.0, 0.0};
  Vec3 eve{10.0, 10.0, 0.0};
  double P_max_dbm = 25.0;
  double eta = 0.4;
  double kappa = 1.0;
};

/// Coordinates / 15, (P_max_dbm - 10) / 20, eta, kappa / 10.
RealVector normalize_features(const FeatureRow& row, Case c);

/// Statistics for a row: the scenario supplies BS/IRS positions, array and
/// noise parameters; the row overrides Bob, Eve, P_max, eta and kappa.
ChannelStatistics row_statistics(const Scenario& base, const FeatureRow& row);

/// Dense MLP: input -> hidden (ReLU) -> hidden (ReLU) -> {p', theta'} heads.
/// Parameters are stored flat: W1, b1, W2, b2, Wp, bp, Wt, bt, with each
/// weight matrix in column-major order.
struct Network {
  Architecture arch;
  RealVector params;
  std::uint64_t seed = 0;

  /// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
  static Network initialize(const Architecture& arch, std::uint64_t seed);
  static Network zeros(const Architecture& arch);
};

struct ForwardCache {
  RealVector input;
  RealVector z1;
  RealVector a1;
  RealVector z2;
  RealVector a2;
  RealVector p_raw;
  RealVector theta_raw;
};

ForwardCache forward(const Network& net, const RealVector& features);

/// Gradient of a scalar with respect to every parameter, given its gradient
/// with respect to the two output heads.
RealVector backward(const Network& net, const ForwardCache& cache, const RealVector& g_p,
                    const RealVector& g_theta);

/// Power and unit-modulus normalization layers. p' holds the real parts of
/// P'' (row-major) followed by the imaginary parts.
DesignPoint normalize_outputs(const RealVector& p_raw, const RealVector& theta_raw,
                              double P_max, int M, int L);

/// Objective in bits: MI for case 1, max(Rsk1, Rsk2) for case 2.
double row_objective(const DesignPoint& design, const ChannelStatistics& stats, Case c);

/// Objective value together with its gradient with respect to Re/Im of P and
/// theta, evaluated from log-det derivatives d log|A| = tr(A^{-1} dA).
struct DesignGradient {
  double value = 0.0;
  ComplexMatrix dP;       // d/dRe(P) + i d/dIm(P)
  ComplexVector dtheta;   // d/dRe(theta) + i d/dIm(theta)
};

DesignGradient objective_gradient(const DesignPoint& design, const ChannelStatistics& stats,
                                  Case c);

/// Gradient of the objective with respect to the raw network outputs.
struct RawGradient {
  double value = 0.0;
  RealVector g_p;
  RealVector g_theta;
};

RawGradient raw_output_gradient(const RealVector& p_raw, const RealVector& theta_raw,
                                const ChannelStatistics& stats, Case c);

struct Batch {
  std::vector<FeatureRow> rows;
  std::vector<ChannelStatistics> stats;  // precomputed, one per row
};

Batch make_batch(const Scenario& base, const std::vector<FeatureRow>& rows);

/// Mean of -objective over the batch, evaluated from the closed-form SKR
/// module.
double loss(const Network& net, const Batch& batch, Case c);

struct LossGradient {
  double loss = 0.0;
  RealVector gradient;
};

LossGradient loss_and_gradient(const Network& net, const Batch& batch, Case c,
                               int workers = 0);

struct SamplingRanges {
  double ue_min = 5.0;
  double ue_max = 15.0;
  double P_min_dbm = 10.0;
  double P_max_dbm = 30.0;
  double eta_min = 0.0;
  double eta_max = 1.0;
  double kappa_min = 0.0;
  double kappa_max = 10.0;
};

/// Rows drawn from the training distribution. In case 1 Eve sits half a
/// wavelength from Bob; in case 2 her coordinates are drawn like Bob's.
std::vector<FeatureRow> sample_rows(std::size_t n, const SamplingRanges& ranges, Case c,
                                    double lambda, Rng rng);

struct TrainConfig {
  int epochs_max = 100;
  int samples_per_epoch = 1000;
  int batch_size = 100;
  double learning_rate = 1e-3;
  int early_stop_patience = 10;
  int validation_size = 200;
  int hidden = 100;
  SamplingRanges ranges;
  std::uint64_t seed = 1;
  int workers = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double best_validation_loss = 0.0;
};

struct TrainResult {
  Network network;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const TrainConfig& config, Case c, const Scenario& base,
                  const EpochCallback& on_epoch = {});

DesignPoint infer(const Network& net, const FeatureRow& row, Case c);

/// Gaussian precoder scaled to P_max and uniformly random IRS phases.
DesignPoint random_design(int M, int L, double P_max, Rng& rng);

struct Model {
  Network network;
  Case which = Case::EveBlind;
  Scenario scenario;
};

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace pkglab::pkgnet
