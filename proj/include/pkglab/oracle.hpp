#pragma once

#include <cstddef>

#include "pkglab/channel.hpp"
#include "pkglab/probing.hpp"
#include "pkglab/rng.hpp"

namespace pkglab::oracle {

/// Sample second moments of (y_a, y_b, y_e). Cross blocks follow the
/// E{x y^H} convention: R_ab = E{y_a y_b^H}.
struct EmpiricalCovarianceSet {
  ComplexMatrix R_a;
  ComplexMatrix R_b;
  ComplexMatrix R_e;
  ComplexMatrix R_ab;
  ComplexMatrix R_ae;
  ComplexMatrix R_be;
  std::size_t n_samples = 0;
};

struct EstimateOptions {
  std::size_t chunk_size = 4096;
  int workers = 0;     // 0: hardware default, capped by PKGLAB_THREADS
  bool noise = true;
};

/// Draws n_samples independent (channel, noise) pairs through the probing
/// simulator. Samples are grouped into fixed-size chunks with their own RNG
/// streams and summed in chunk order, so the result depends only on the seed.
EmpiricalCovarianceSet estimate_covariances(const ChannelStatistics& stats,
                                            const DesignPoint& design,
                                            std::size_t n_samples, const Rng& rng,
                                            const EstimateOptions& options = {});

struct McRates {
  double mi_ab = 0.0;
  double mi_ae = 0.0;
  double mi_be = 0.0;
  double rsk1 = 0.0;
  double rsk2 = 0.0;
  double rsk = 0.0;
};

/// Gaussian mutual information from empirical covariances. Eigenvalues below
/// 1e-12 of the largest are clipped before taking logs.
double mc_mi_ab(const EmpiricalCovarianceSet& set);
double mc_skr(const EmpiricalCovarianceSet& set);
McRates mc_rates(const EmpiricalCovarianceSet& set);

}  // namespace pkglab::oracle
