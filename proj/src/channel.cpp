#include "pkglab/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pkglab {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double NoiseSpec::power_dbm() const {
  return psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double NoiseSpec::power_watt() const { return dbm_to_watt(power_dbm()); }

void SystemGeometry::validate() const {
  std::ostringstream msg;
  if (M < 1) msg << "M must be >= 1 (got " << M << "); ";
  if (L_H < 1 || L_V < 1) msg << "IRS grid must be at least 1x1; ";
  if (!(delta > 0.0)) msg << "IRS spacing must be positive; ";
  if (!(lambda > 0.0)) msg << "wavelength must be positive; ";
  const Vec3* points[] = {&bs_position, &irs_position, &bob_position, &eve_position};
  const char* names[] = {"bs", "irs", "bob", "eve"};
  for (int i = 0; i < 4; ++i) {
    if (!points[i]->allFinite()) msg << names[i] << " position is not finite; ";
  }
  // Eve may coincide with Bob (rho = 1); every other pair must be distinct.
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (i == 2 && j == 3) continue;
      if ((*points[i] - *points[j]).norm() == 0.0) {
        msg << names[i] << " and " << names[j] << " positions coincide; ";
      }
    }
  }
  const std::string problems = msg.str();
  if (!problems.empty()) throw ConfigError("invalid geometry: " + problems);
}

SystemGeometry default_geometry(int M, int L, double lambda) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
  if (L < 1 || side * side != L) {
    throw ConfigError("L must be a positive perfect square, got " + std::to_string(L));
  }
  SystemGeometry g;
  g.M = M;
  g.L_H = side;
  g.L_V = side;
  g.lambda = lambda;
  g.delta = lambda / 2.0;
  place_eve(g, 0.5 * lambda);
  return g;
}

void place_eve(SystemGeometry& geometry, double distance) {
  geometry.eve_position = geometry.bob_position - Vec3(distance, 0.0, 0.0);
}

double path_loss(const PathLossModel& model, double d) {
  if (!(d > 0.0)) {
    throw ConfigError("path_loss: distance must be positive, got " + std::to_string(d));
  }
  if (!(model.d0 > 0.0)) throw ConfigError("path_loss: reference distance must be positive");
  return db_to_linear(model.beta0_db - 10.0 * model.alpha * std::log10(d / model.d0));
}

RealMatrix bs_correlation(int M, double eta) {
  if (M < 1) throw ConfigError("bs_correlation: M must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ConfigError("bs_correlation: eta must lie in [0, 1]");
  }
  RealMatrix r(M, M);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < M; ++n) r(m, n) = std::pow(eta, std::abs(m - n));
  }
  return r;
}

RealMatrix irs_correlation(int L_H, int L_V, double delta, double lambda) {
  if (L_H < 1 || L_V < 1 || !(delta > 0.0) || !(lambda > 0.0)) {
    throw ConfigError("irs_correlation: invalid array parameters");
  }
  const int L = L_H * L_V;
  RealMatrix r(L, L);
  for (int n = 0; n < L; ++n) {
    const double yn = n % L_H;
    const double zn = n / L_H;
    for (int m = 0; m < L; ++m) {
      const double ym = m % L_H;
      const double zm = m / L_H;
      const double d = delta * std::hypot(yn - ym, zn - zm);
      const double x = 2.0 * std::numbers::pi * d / lambda;
      r(n, m) = (n == m) ? 1.0 : std::sin(x) / x;
    }
  }
  return r;
}

double bob_eve_correlation(double d, double lambda) {
  if (!(d >= 0.0)) throw ConfigError("bob_eve_correlation: distance must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("bob_eve_correlation: wavelength must be positive");
  return numerics::bessel_j0(2.0 * std::numbers::pi * d / lambda);
}

ChannelStatistics build_statistics(const SystemGeometry& geometry,
                                   const StatisticsOptions& options) {
  geometry.validate();
  if (!(options.kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
  ChannelStatistics s;
  const double d_G = (geometry.bs_position - geometry.irs_position).norm();
  const double d_fb = (geometry.irs_position - geometry.bob_position).norm();
  const double d_fe = (geometry.irs_position - geometry.eve_position).norm();
  const double d_hab = (geometry.bs_position - geometry.bob_position).norm();
  const double d_hae = (geometry.bs_position - geometry.eve_position).norm();
  s.beta_G = path_loss(options.reflect, d_G);
  s.beta_fb = path_loss(options.reflect, d_fb);
  s.beta_fe = path_loss(options.reflect, d_fe);
  s.beta_hab = path_loss(options.direct, d_hab);
  s.beta_hae = path_loss(options.direct, d_hae);
  s.kappa = options.kappa;
  s.eta = options.eta;
  s.R_B = bs_correlation(geometry.M, options.eta);
  s.R_I = irs_correlation(geometry.L_H, geometry.L_V, geometry.delta, geometry.lambda);
  if (options.rho_override) {
    if (!(std::fabs(*options.rho_override) <= 1.0)) {
      throw ConfigError("rho override must satisfy |rho| <= 1");
    }
    s.rho = *options.rho_override;
  } else {
    s.rho = bob_eve_correlation((geometry.bob_position - geometry.eve_position).norm(),
                                geometry.lambda);
  }
  s.delta2 = options.noise.power_watt();
  s.P_b = dbm_to_watt(options.P_b_dbm);
  s.P_max = dbm_to_watt(options.P_max_dbm);
  return s;
}

Scenario default_scenario(int M, int L) {
  Scenario s;
  s.geometry = default_geometry(M, L);
  return s;
}

ChannelSampler::ChannelSampler(const ChannelStatistics& s)
    : stats(s),
      sqrt_R_B(numerics::matrix_sqrt_psd(s.R_B.cast<Complex>())),
      sqrt_R_I(numerics::matrix_sqrt_psd(s.R_I.cast<Complex>())) {}

ChannelRealization ChannelSampler::sample(Rng& rng) const {
  const Eigen::Index M = stats.R_B.rows();
  const Eigen::Index L = stats.R_I.rows();
  const double nlos = 1.0 / (1.0 + stats.kappa);
  const double rho = stats.rho;
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  const ComplexMatrix G_iid = rng.complex_normal_matrix(M, L, stats.beta_G * nlos);

  const double sigma_fb = std::sqrt(stats.beta_fb * nlos);
  const double sigma_fe = std::sqrt(stats.beta_fe * nlos);
  ComplexVector fb_iid(L);
  ComplexVector fe_iid(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const Complex b = rng.complex_normal(1.0);
    const Complex w = rng.complex_normal(1.0);
    fb_iid(l) = sigma_fb * b;
    fe_iid(l) = sigma_fe * (rho * b + rho_c * w);
  }

  const double sigma_hb = std::sqrt(stats.beta_hab);
  const double sigma_he = std::sqrt(stats.beta_hae);
  ComplexVector hb_iid(M);
  ComplexVector he_iid(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const Complex b = rng.complex_normal(1.0);
    const Complex w = rng.complex_normal(1.0);
    hb_iid(m) = sigma_hb * b;
    he_iid(m) = sigma_he * (rho * b + rho_c * w);
  }

  ChannelRealization r;
  r.G = sqrt_R_B * G_iid * sqrt_R_I;
  r.f_b = sqrt_R_I * fb_iid;
  r.f_e = sqrt_R_I * fe_iid;
  r.h_ab = sqrt_R_B * hb_iid;
  r.h_ae = sqrt_R_B * he_iid;
  return r;
}

ChannelRealization sample_channels(const ChannelStatistics& stats, Rng& rng) {
  return ChannelSampler(stats).sample(rng);
}

}  // namespace pkglab
