#include "pkglab/probing.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pkglab {

void DesignPoint::validate(double P_max) const {
  if (P.rows() != P.cols() || P.rows() == 0) {
    throw ConfigError("design: precoder must be a nonempty square matrix");
  }
  if (!numerics::all_finite(P) || !numerics::all_finite(theta)) {
    throw ConfigError("design: non-finite entries");
  }
  const double power = P.squaredNorm();
  if (std::fabs(power - P_max) > 1e-9 * P_max) {
    std::ostringstream msg;
    msg << "design: Tr(P P^H) = " << power << " differs from P_max = " << P_max;
    throw ConfigError(msg.str());
  }
  for (Eigen::Index l = 0; l < theta.size(); ++l) {
    if (std::fabs(std::abs(theta(l)) - 1.0) > 1e-12) {
      throw ConfigError("design: IRS phase " + std::to_string(l) + " is not unit modulus");
    }
  }
}

ComplexMatrix build_downlink_pilot(int N) {
  if (N < 1) throw ConfigError("build_downlink_pilot: N must be >= 1");
  ComplexMatrix S(N, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < N; ++k) {
      // Reduce the index product first so large N keeps full phase accuracy.
      const long long r = (static_cast<long long>(i) * k) % N;
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(r) / N;
      S(i, k) = std::polar(scale, phase);
    }
  }
  return S;
}

ComplexVector cascaded_channel(const ComplexVector& h, const ComplexMatrix& G,
                               const ComplexVector& f) {
  const Eigen::Index M = h.size();
  const Eigen::Index L = f.size();
  if (G.rows() != M || G.cols() != L) {
    throw ConfigError("cascaded_channel: dimension mismatch");
  }
  ComplexVector hc(M * (L + 1));
  hc.head(M) = h;
  for (Eigen::Index l = 0; l < L; ++l) hc.segment(M * (l + 1), M) = G.col(l) * f(l);
  return hc;
}

std::pair<ComplexVector, ComplexVector> cascaded_channel(const ChannelRealization& r) {
  return {cascaded_channel(r.h_ab, r.G, r.f_b), cascaded_channel(r.h_ae, r.G, r.f_e)};
}

ComplexVector extended_phase(const ComplexVector& theta) {
  ComplexVector ext(theta.size() + 1);
  ext(0) = 1.0;
  ext.tail(theta.size()) = theta;
  return ext;
}

ComplexVector compact_effective_channel(const ComplexVector& h_c,
                                        const ComplexVector& theta,
                                        const ComplexMatrix& P) {
  const Eigen::Index M = P.rows();
  const ComplexVector ext = extended_phase(theta);
  if (h_c.size() != M * ext.size()) {
    throw ConfigError("compact_effective_channel: dimension mismatch");
  }
  ComplexVector acc = ComplexVector::Zero(M);
  for (Eigen::Index l = 0; l < ext.size(); ++l) acc += ext(l) * h_c.segment(M * l, M);
  return P.transpose() * acc;
}

ComplexVector direct_effective_channel(const ComplexVector& h, const ComplexMatrix& G,
                                       const ComplexVector& f, const ComplexVector& theta,
                                       const ComplexMatrix& P) {
  if (G.rows() != h.size() || G.cols() != f.size() || theta.size() != f.size() ||
      P.rows() != h.size()) {
    throw ConfigError("direct_effective_channel: dimension mismatch");
  }
  return P.transpose() * (h + G * theta.asDiagonal() * f);
}

ProbingObservations probe(const ChannelRealization& realization,
                          const DesignPoint& design, const ChannelStatistics& stats,
                          Rng& rng, const ProbeOptions& options) {
  return probe(realization, design, stats,
               build_downlink_pilot(static_cast<int>(design.P.rows())), rng, options);
}

ProbingObservations probe(const ChannelRealization& realization,
                          const DesignPoint& design, const ChannelStatistics& stats,
                          const ComplexMatrix& pilot, Rng& rng,
                          const ProbeOptions& options) {
  const Eigen::Index M = design.P.rows();
  if (realization.h_ab.size() != M || realization.G.rows() != M ||
      realization.G.cols() != design.theta.size() || pilot.rows() != M ||
      pilot.cols() != M) {
    throw ConfigError("probe: design and realization dimensions disagree");
  }
  const auto [hc_ab, hc_ae] = cascaded_channel(realization);
  const ComplexVector z_b = compact_effective_channel(hc_ab, design.theta, design.P);
  const ComplexVector z_e = compact_effective_channel(hc_ae, design.theta, design.P);

  ProbingObservations obs;
  obs.y_a = std::sqrt(stats.P_b) * z_b;
  obs.y_b = z_b;
  obs.y_e = z_e;
  if (options.noise) {
    const ComplexVector n_a = rng.complex_normal_matrix(M, 1, stats.delta2);
    const ComplexVector n_b = rng.complex_normal_matrix(M, 1, stats.delta2);
    const ComplexVector n_e = rng.complex_normal_matrix(M, 1, stats.delta2);
    const Complex s_u = 1.0;
    obs.y_a += design.P.transpose() * n_a * std::conj(s_u);
    obs.y_b += pilot.transpose() * n_b;
    obs.y_e += pilot.transpose() * n_e;
  }
  return obs;
}

}  // namespace pkglab
