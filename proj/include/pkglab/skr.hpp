#pragma once

#include <cstdint>

#include "pkglab/channel.hpp"
#include "pkglab/numerics.hpp"
#include "pkglab/probing.hpp"

namespace pkglab {

/// Covariances of the cascaded channels h_c (Bob, Eve, cross), each of size
/// M(L+1) x M(L+1).
struct CascadedCovariances {
  ComplexMatrix R_c_U;
  ComplexMatrix R_c_E;
  ComplexMatrix R_c_UE;
};

/// Covariances of the noiseless effective channel (theta_ext kron P)^T h_c.
struct EffectiveCovariances {
  ComplexMatrix R_Z_U;
  ComplexMatrix R_Z_E;
  ComplexMatrix R_Z_UE;
};

/// Second moments of the three observations: autocovariances and the cross
/// terms E{y_a y_b^H}, E{y_a y_e^H}, E{y_b y_e^H}.
struct ObservationCovariances {
  ComplexMatrix R_a;
  ComplexMatrix R_b;
  ComplexMatrix R_e;
  ComplexMatrix R_ab;
  ComplexMatrix R_ae;
  ComplexMatrix R_be;
};

struct SkrReport {
  double mi_ab = 0.0;
  double rsk1 = 0.0;
  double rsk2 = 0.0;
  double rsk = 0.0;
  int winning_branch = 1;      // 1 or 2
  bool rank_reduced = false;   // P was singular; y_a restricted to range(P^T)
  int M = 0;
  int L = 0;
  double P_max = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
  double rho = 0.0;
  std::uint64_t seed = 0;
};

struct DirectSkr {
  double mi_ab = 0.0;
  double rsk1 = 0.0;
  double rsk2 = 0.0;
};

/// c_U = beta_G beta_fb / (1+kappa)^2, and the Eve / cross counterparts.
double reflect_gain_u(const ChannelStatistics& stats);
double reflect_gain_e(const ChannelStatistics& stats);
double reflect_gain_ue(const ChannelStatistics& stats);

/// theta^H (R_I o R_I) theta
double phase_quadratic(const ComplexVector& theta, const RealMatrix& R_I);

double delta_u2(const ComplexVector& theta, const ChannelStatistics& stats);
double delta_e2(const ComplexVector& theta, const ChannelStatistics& stats);
/// Signed; negative when rho < 0.
double delta_ue2(const ComplexVector& theta, const ChannelStatistics& stats);

CascadedCovariances cascaded_covariances(const ChannelStatistics& stats);

/// Explicit congruence (theta_ext kron P)^T R_c (theta_ext kron P)^*.
EffectiveCovariances effective_covariances(const DesignPoint& design,
                                           const CascadedCovariances& cascaded);

/// Closed form R_Z = delta^2(theta) P^T R_B P^*, which the congruence above
/// reduces to because every block of R_c is a multiple of R_B.
EffectiveCovariances effective_covariances(const DesignPoint& design,
                                           const ChannelStatistics& stats);

ObservationCovariances observation_covariances(const DesignPoint& design,
                                               const ChannelStatistics& stats,
                                               const EffectiveCovariances& z);

/// I(y_a; y_b) in bits from log|R_a| + log|R_b| - log|joint|. A singular
/// precoder is handled by restricting y_a to the range of P^T.
double mi_ab(const DesignPoint& design, const ChannelStatistics& stats);

/// SKR lower bound from the entropy-factored determinant ratios.
SkrReport skr_lower_bound(const DesignPoint& design, const ChannelStatistics& stats);

/// The same quantities from the printed product formulas, using LU
/// determinants of the non-Hermitian products. Requires an invertible P.
DirectSkr skr_direct(const DesignPoint& design, const ChannelStatistics& stats);

/// Parameters of the per-mode objectives after eigen-decoupling.
struct ModeParams {
  double P_a = 0.0;
  double P_b = 0.0;
  double delta2 = 0.0;
  double du2 = 0.0;
  double de2 = 0.0;
  double due2 = 0.0;
};

enum class ModeObjective { MutualInformation, Rsk1, Rsk2 };

/// Per-mode term f(x) in bits with x = p_i^2, and its derivative.
double mode_value(ModeObjective kind, const ModeParams& params, double x);
double mode_derivative(ModeObjective kind, const ModeParams& params, double x);

/// Sum over modes of the approximate MI in its product form.
double scalarized_mi(const RealVector& p, const ChannelStatistics& stats, double P_a,
                     double du2);
/// Same quantity as 1 + P_b P_a d^4 x^2 / (...), summed in log2.
double scalarized_mi_rewritten(const RealVector& p, const ChannelStatistics& stats,
                               double P_a, double du2);
double scalarized_rsk1(const RealVector& p, const ChannelStatistics& stats, double P_a,
                       double du2, double de2, double due2);
double scalarized_rsk2(const RealVector& p, const ChannelStatistics& stats, double P_a,
                       double du2, double de2, double due2);

}  // namespace pkglab
