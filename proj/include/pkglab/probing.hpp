#pragma once

#include <utility>

#include "pkglab/channel.hpp"
#include "pkglab/numerics.hpp"
#include "pkglab/rng.hpp"

namespace pkglab {

struct DesignPoint {
  ComplexMatrix P;      // M x M precoder
  ComplexVector theta;  // L unit-modulus IRS phases

  /// Throws ConfigError unless Tr(P P^H) = P_max (relative 1e-9) and every
  /// |theta_l| = 1 (1e-12).
  void validate(double P_max) const;
};

struct ProbingObservations {
  ComplexVector y_a;
  ComplexVector y_b;
  ComplexVector y_e;
};

/// Normalized N x N DFT matrix.
ComplexMatrix build_downlink_pilot(int N);

/// h_c = vec([h, G diag(f)]) for Bob (first) and Eve (second).
std::pair<ComplexVector, ComplexVector> cascaded_channel(const ChannelRealization& r);
ComplexVector cascaded_channel(const ComplexVector& h, const ComplexMatrix& G,
                               const ComplexVector& f);

/// (1, theta^T)^T
ComplexVector extended_phase(const ComplexVector& theta);

/// (theta_ext kron P)^T h_c, evaluated block by block.
ComplexVector compact_effective_channel(const ComplexVector& h_c,
                                        const ComplexVector& theta,
                                        const ComplexMatrix& P);

/// P^T (h + G diag(theta) f)
ComplexVector direct_effective_channel(const ComplexVector& h, const ComplexMatrix& G,
                                       const ComplexVector& f, const ComplexVector& theta,
                                       const ComplexMatrix& P);

struct ProbeOptions {
  bool noise = true;
};

/// One uplink/downlink round after LS estimation and LoS removal. The uplink
/// pilot is s_u = 1 and the downlink pilot is the normalized DFT matrix.
ProbingObservations probe(const ChannelRealization& realization,
                          const DesignPoint& design, const ChannelStatistics& stats,
                          Rng& rng, const ProbeOptions& options = {});

/// Same, with a precomputed downlink pilot for repeated probing.
ProbingObservations probe(const ChannelRealization& realization,
                          const DesignPoint& design, const ChannelStatistics& stats,
                          const ComplexMatrix& pilot, Rng& rng,
                          const ProbeOptions& options = {});

}  // namespace pkglab
