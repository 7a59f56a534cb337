#pragma once

#include <optional>

#include "pkglab/numerics.hpp"
#include "pkglab/rng.hpp"

namespace pkglab {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kDefaultCarrierHz = 2.4e9;

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double db_to_linear(double db);

struct SystemGeometry {
  Vec3 bs_position{5.0, -30.0, 0.0};
  Vec3 irs_position{0.0, 0.0, 0.0};
  Vec3 bob_position{10.0, 10.0, 0.0};
  Vec3 eve_position{10.0, 10.0, 0.0};
  int M = 4;
  int L_H = 4;
  int L_V = 4;
  double delta = 0.0;   // element spacing, meters
  double lambda = 0.0;  // wavelength, meters

  [[nodiscard]] int L() const { return L_H * L_V; }
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Default scenario: BS (5,-30,0), IRS at the origin, Bob at (10,10,0), Eve
/// half a wavelength from Bob along -x, half-wavelength IRS spacing. L must be
/// a perfect square (L_H = L_V = sqrt(L)).
SystemGeometry default_geometry(int M, int L, double lambda = kSpeedOfLight / kDefaultCarrierHz);

/// Eve placed `distance` meters from Bob along -x.
void place_eve(SystemGeometry& geometry, double distance);

struct PathLossModel {
  double beta0_db = -30.0;
  double alpha = 2.2;
  double d0 = 1.0;
};

inline constexpr PathLossModel kDirectPathLoss{-32.6, 3.67, 1.0};
inline constexpr PathLossModel kReflectPathLoss{-30.0, 2.2, 1.0};

struct NoiseSpec {
  double psd_dbm_per_hz = -174.0;
  double bandwidth_hz = 20e6;
  double noise_figure_db = 10.0;

  [[nodiscard]] double power_dbm() const;
  [[nodiscard]] double power_watt() const;
};

struct ChannelStatistics {
  double beta_G = 0.0;
  double beta_fb = 0.0;
  double beta_fe = 0.0;
  double beta_hab = 0.0;
  double beta_hae = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
  RealMatrix R_B;
  RealMatrix R_I;
  double rho = 0.0;
  double delta2 = 0.0;  // noise power, watts
  double P_b = 0.0;     // watts
  double P_max = 0.0;   // watts

  [[nodiscard]] int M() const { return static_cast<int>(R_B.rows()); }
  [[nodiscard]] int L() const { return static_cast<int>(R_I.rows()); }
};

struct ChannelRealization {
  ComplexMatrix G;       // M x L
  ComplexVector f_b;     // L
  ComplexVector f_e;     // L
  ComplexVector h_ab;    // M
  ComplexVector h_ae;    // M
};

struct StatisticsOptions {
  PathLossModel direct = kDirectPathLoss;
  PathLossModel reflect = kReflectPathLoss;
  double kappa = 1.0;
  double eta = 0.4;
  double P_b_dbm = 10.0;
  double P_max_dbm = 25.0;
  NoiseSpec noise;
  std::optional<double> rho_override;
};

double path_loss(const PathLossModel& model, double d);
RealMatrix bs_correlation(int M, double eta);
RealMatrix irs_correlation(int L_H, int L_V, double delta, double lambda);
double bob_eve_correlation(double d, double lambda);

ChannelStatistics build_statistics(const SystemGeometry& geometry,
                                   const StatisticsOptions& options);

/// Everything needed to build statistics for one operating point.
struct Scenario {
  SystemGeometry geometry;
  StatisticsOptions options;

  [[nodiscard]] ChannelStatistics statistics() const {
    return build_statistics(geometry, options);
  }
};

Scenario default_scenario(int M, int L);

/// Matrix square roots of the correlation matrices, computed once and reused
/// across draws.
struct ChannelSampler {
  explicit ChannelSampler(const ChannelStatistics& stats);

  ChannelRealization sample(Rng& rng) const;

  ChannelStatistics stats;
  ComplexMatrix sqrt_R_B;
  ComplexMatrix sqrt_R_I;
};

ChannelRealization sample_channels(const ChannelStatistics& stats, Rng& rng);

}  // namespace pkglab
