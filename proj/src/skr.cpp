#include "pkglab/skr.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace pkglab {

namespace {

constexpr double kRankTolerance = 1e-10;

double ld(const ComplexMatrix& a) {
  return numerics::log2_det_hermitian_pd(numerics::hermitian_part(a));
}

ComplexMatrix joint(const ComplexMatrix& a, const ComplexMatrix& cross,
                    const ComplexMatrix& b) {
  return numerics::block2x2(a, cross, cross.adjoint(), b);
}

/// Orthonormal basis of range(P^T) when P is rank deficient, nullopt otherwise.
std::optional<ComplexMatrix> deficient_range(const ComplexMatrix& P) {
  Eigen::JacobiSVD<ComplexMatrix> svd(P.transpose(), Eigen::ComputeFullU);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) {
    throw NumericalError("precoder is identically zero");
  }
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > kRankTolerance * s(0)) ++rank;
  if (rank == s.size()) return std::nullopt;
  return ComplexMatrix(svd.matrixU().leftCols(rank));
}

void require_dims(const DesignPoint& design, const ChannelStatistics& stats) {
  if (design.P.rows() != stats.M() || design.P.cols() != stats.M()) {
    throw ConfigError("precoder must be M x M with M = " + std::to_string(stats.M()));
  }
  if (design.theta.size() != stats.L()) {
    throw ConfigError("theta must have L = " + std::to_string(stats.L()) + " entries");
  }
}

struct NormalizedMode {
  double a, b, E, K1, K2;
};

NormalizedMode normalize(const ModeParams& p) {
  const double d2 = p.delta2;
  const double d4 = d2 * d2;
  const double gap = p.du2 * p.de2 - p.due2 * p.due2;
  return {p.P_a * p.du2 / d2, p.P_b * p.du2 / d2, p.P_a * p.de2 / d2,
          p.P_b * p.P_a * gap / d4, p.P_a * p.P_a * gap / d4};
}

}  // namespace

double reflect_gain_u(const ChannelStatistics& s) {
  return s.beta_G * s.beta_fb / ((1.0 + s.kappa) * (1.0 + s.kappa));
}

double reflect_gain_e(const ChannelStatistics& s) {
  return s.beta_G * s.beta_fe / ((1.0 + s.kappa) * (1.0 + s.kappa));
}

double reflect_gain_ue(const ChannelStatistics& s) {
  return s.beta_G * std::sqrt(s.beta_fb * s.beta_fe) / ((1.0 + s.kappa) * (1.0 + s.kappa));
}

double phase_quadratic(const ComplexVector& theta, const RealMatrix& R_I) {
  if (theta.size() != R_I.rows()) throw ConfigError("phase_quadratic: dimension mismatch");
  const RealMatrix W = R_I.cwiseProduct(R_I);
  const Complex q = theta.dot(W.cast<Complex>() * theta);
  return q.real();
}

double delta_u2(const ComplexVector& theta, const ChannelStatistics& s) {
  return s.beta_hab + reflect_gain_u(s) * phase_quadratic(theta, s.R_I);
}

double delta_e2(const ComplexVector& theta, const ChannelStatistics& s) {
  return s.beta_hae + reflect_gain_e(s) * phase_quadratic(theta, s.R_I);
}

double delta_ue2(const ComplexVector& theta, const ChannelStatistics& s) {
  return s.rho * (std::sqrt(s.beta_hab * s.beta_hae) +
                  reflect_gain_ue(s) * phase_quadratic(theta, s.R_I));
}

CascadedCovariances cascaded_covariances(const ChannelStatistics& s) {
  const Eigen::Index M = s.M();
  const Eigen::Index L = s.L();
  const Eigen::Index n = M * (L + 1);
  const ComplexMatrix R_B = s.R_B.cast<Complex>();
  const RealMatrix W = s.R_I.cwiseProduct(s.R_I);
  ComplexMatrix lower(M * L, M * L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) lower.block(M * i, M * j, M, M) = W(i, j) * R_B;
  }
  auto assemble = [&](double upper_scale, double lower_scale) {
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    out.topLeftCorner(M, M) = upper_scale * R_B;
    out.bottomRightCorner(M * L, M * L) = lower_scale * lower;
    return out;
  };
  CascadedCovariances c;
  c.R_c_U = assemble(s.beta_hab, reflect_gain_u(s));
  c.R_c_E = assemble(s.beta_hae, reflect_gain_e(s));
  c.R_c_UE = assemble(s.rho * std::sqrt(s.beta_hab * s.beta_hae), s.rho * reflect_gain_ue(s));
  return c;
}

EffectiveCovariances effective_covariances(const DesignPoint& design,
                                           const CascadedCovariances& cascaded) {
  const Eigen::Index M = design.P.rows();
  const ComplexVector ext = extended_phase(design.theta);
  if (cascaded.R_c_U.rows() != M * ext.size()) {
    throw ConfigError("effective_covariances: dimension mismatch");
  }
  ComplexMatrix T(M * ext.size(), design.P.cols());
  for (Eigen::Index l = 0; l < ext.size(); ++l) T.middleRows(M * l, M) = ext(l) * design.P;
  auto congruence = [&](const ComplexMatrix& R) {
    return numerics::hermitian_part(T.transpose() * R * T.conjugate());
  };
  return {congruence(cascaded.R_c_U), congruence(cascaded.R_c_E),
          congruence(cascaded.R_c_UE)};
}

EffectiveCovariances effective_covariances(const DesignPoint& design,
                                           const ChannelStatistics& stats) {
  require_dims(design, stats);
  const ComplexMatrix base = numerics::hermitian_part(
      design.P.transpose() * stats.R_B.cast<Complex>() * design.P.conjugate());
  return {delta_u2(design.theta, stats) * base, delta_e2(design.theta, stats) * base,
          delta_ue2(design.theta, stats) * base};
}

ObservationCovariances observation_covariances(const DesignPoint& design,
                                               const ChannelStatistics& stats,
                                               const EffectiveCovariances& z) {
  const Eigen::Index M = design.P.rows();
  const ComplexMatrix I = ComplexMatrix::Identity(M, M);
  const double sp = std::sqrt(stats.P_b);
  ObservationCovariances o;
  o.R_a = stats.P_b * z.R_Z_U +
          stats.delta2 * numerics::hermitian_part(design.P.transpose() * design.P.conjugate());
  o.R_b = z.R_Z_U + stats.delta2 * I;
  o.R_e = z.R_Z_E + stats.delta2 * I;
  o.R_ab = sp * z.R_Z_U;
  o.R_ae = sp * z.R_Z_UE;
  o.R_be = z.R_Z_UE;
  return o;
}

double mi_ab(const DesignPoint& design, const ChannelStatistics& stats) {
  return skr_lower_bound(design, stats).mi_ab;
}

SkrReport skr_lower_bound(const DesignPoint& design, const ChannelStatistics& stats) {
  require_dims(design, stats);
  ObservationCovariances o =
      observation_covariances(design, stats, effective_covariances(design, stats));
  SkrReport r;
  if (const auto basis = deficient_range(design.P)) {
    o.R_a = basis->adjoint() * o.R_a * *basis;
    o.R_ab = basis->adjoint() * o.R_ab;
    o.R_ae = basis->adjoint() * o.R_ae;
    r.rank_reduced = true;
  }
  const double l_a = ld(o.R_a);
  const double l_b = ld(o.R_b);
  const double l_e = ld(o.R_e);
  const double l_ab = ld(joint(o.R_a, o.R_ab, o.R_b));
  const double l_ae = ld(joint(o.R_a, o.R_ae, o.R_e));
  const double l_be = ld(joint(o.R_b, o.R_be, o.R_e));

  r.mi_ab = std::max(0.0, l_a + l_b - l_ab);
  r.rsk1 = l_b + l_ae - l_e - l_ab;
  r.rsk2 = l_a + l_be - l_e - l_ab;
  r.rsk = std::max(r.rsk1, r.rsk2);
  r.winning_branch = r.rsk2 > r.rsk1 ? 2 : 1;
  r.M = stats.M();
  r.L = stats.L();
  r.P_max = stats.P_max;
  r.eta = stats.eta;
  r.kappa = stats.kappa;
  r.rho = stats.rho;
  return r;
}

DirectSkr skr_direct(const DesignPoint& design, const ChannelStatistics& stats) {
  require_dims(design, stats);
  if (deficient_range(design.P)) {
    throw NumericalError("skr_direct: precoder is singular; use the factored path");
  }
  const EffectiveCovariances z = effective_covariances(design, stats);
  const Eigen::Index M = design.P.rows();
  const ComplexMatrix I = ComplexMatrix::Identity(M, M);
  const double d2 = stats.delta2;
  const double Pb = stats.P_b;
  const ComplexMatrix PtPc = design.P.transpose() * design.P.conjugate();

  const ComplexMatrix a_term = Pb * z.R_Z_U + d2 * PtPc;
  const ComplexMatrix b_term = z.R_Z_U + d2 * I;
  const ComplexMatrix e_term = z.R_Z_E + d2 * I;
  const ComplexMatrix cross2 = z.R_Z_UE * z.R_Z_UE;
  const double den = numerics::log2_abs_det(Pb * d2 * z.R_Z_U + d2 * PtPc * b_term);

  DirectSkr out;
  out.mi_ab = numerics::log2_abs_det(a_term) + numerics::log2_abs_det(b_term) - den;
  out.rsk1 = numerics::log2_abs_det(b_term) +
             numerics::log2_abs_det(a_term * e_term - Pb * cross2) -
             numerics::log2_abs_det(e_term) - den;
  out.rsk2 = numerics::log2_abs_det(a_term) +
             numerics::log2_abs_det(b_term * e_term - cross2) -
             numerics::log2_abs_det(e_term) - den;
  return out;
}

double mode_value(ModeObjective kind, const ModeParams& params, double x) {
  const NormalizedMode n = normalize(params);
  const double common = -std::log1p(n.E * x) - std::log1p((n.a + n.b) * x);
  double nats = 0.0;
  switch (kind) {
    case ModeObjective::MutualInformation:
      nats = std::log1p(n.b * x) + std::log1p(n.a * x) - std::log1p((n.a + n.b) * x);
      break;
    case ModeObjective::Rsk1:
      nats = std::log1p(n.a * x) + std::log1p((n.b + n.E) * x + n.K1 * x * x) + common;
      break;
    case ModeObjective::Rsk2:
      nats = std::log1p(n.b * x) + std::log1p((n.a + n.E) * x + n.K2 * x * x) + common;
      break;
  }
  return nats / std::numbers::ln2;
}

double mode_derivative(ModeObjective kind, const ModeParams& params, double x) {
  const NormalizedMode n = normalize(params);
  const double s = n.a + n.b;
  const double common = -n.E / (1.0 + n.E * x) - s / (1.0 + s * x);
  double nats = 0.0;
  switch (kind) {
    case ModeObjective::MutualInformation:
      nats = n.b / (1.0 + n.b * x) + n.a / (1.0 + n.a * x) - s / (1.0 + s * x);
      break;
    case ModeObjective::Rsk1: {
      const double B = n.b + n.E;
      nats = n.a / (1.0 + n.a * x) + (B + 2.0 * n.K1 * x) / (1.0 + B * x + n.K1 * x * x) +
             common;
      break;
    }
    case ModeObjective::Rsk2: {
      const double B = n.a + n.E;
      nats = n.b / (1.0 + n.b * x) + (B + 2.0 * n.K2 * x) / (1.0 + B * x + n.K2 * x * x) +
             common;
      break;
    }
  }
  return nats / std::numbers::ln2;
}

namespace {

double scalarized_sum(ModeObjective kind, const RealVector& p, const ModeParams& params) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= 0.0)) throw ConfigError("scalarized objective: allocations must be >= 0");
    total += mode_value(kind, params, p(i) * p(i));
  }
  return total;
}

}  // namespace

double scalarized_mi(const RealVector& p, const ChannelStatistics& stats, double P_a,
                     double du2) {
  return scalarized_sum(ModeObjective::MutualInformation, p,
                        {P_a, stats.P_b, stats.delta2, du2, 0.0, 0.0});
}

double scalarized_mi_rewritten(const RealVector& p, const ChannelStatistics& stats,
                               double P_a, double du2) {
  const double d2 = stats.delta2;
  const double Pb = stats.P_b;
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double x = p(i) * p(i);
    const double num = Pb * P_a * du2 * du2 * x * x;
    const double den = d2 * Pb * du2 * x + d2 * P_a * du2 * x + d2 * d2;
    total += std::log2(1.0 + num / den);
  }
  return total;
}

double scalarized_rsk1(const RealVector& p, const ChannelStatistics& stats, double P_a,
                       double du2, double de2, double due2) {
  return scalarized_sum(ModeObjective::Rsk1, p,
                        {P_a, stats.P_b, stats.delta2, du2, de2, due2});
}

double scalarized_rsk2(const RealVector& p, const ChannelStatistics& stats, double P_a,
                       double du2, double de2, double due2) {
  return scalarized_sum(ModeObjective::Rsk2, p,
                        {P_a, stats.P_b, stats.delta2, du2, de2, due2});
}

}  // namespace pkglab
