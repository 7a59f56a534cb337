#include "pkglab/oracle.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "pkglab/parallel.hpp"

namespace pkglab::oracle {

namespace {

constexpr double kClip = 1e-12;

/// log2 det of an empirical covariance after symmetrization and clipping.
double empirical_log2_det(const ComplexMatrix& a, std::size_t n_samples) {
  if (static_cast<std::size_t>(a.rows()) > n_samples) {
    std::ostringstream msg;
    msg << "empirical covariance of dimension " << a.rows() << " is singular with only "
        << n_samples << " samples; raise n_samples";
    throw NumericalError(msg.str());
  }
  const numerics::HermitianEig eig =
      numerics::hermitian_eig(numerics::hermitian_part(a), 1e-6);
  const double largest = eig.eigenvalues(0);
  const double smallest = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (!(largest > 0.0) || smallest < -1e-8 * largest) {
    std::ostringstream msg;
    msg << "empirical covariance is not positive definite (eigenvalue " << smallest
        << ", largest " << largest << "); raise n_samples";
    throw NumericalError(msg.str());
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    sum += std::log2(std::max(eig.eigenvalues(i), kClip * largest));
  }
  return sum;
}

double gaussian_mi(const ComplexMatrix& r_x, const ComplexMatrix& r_y,
                   const ComplexMatrix& r_xy, std::size_t n) {
  const Eigen::Index dx = r_x.rows();
  const Eigen::Index dy = r_y.rows();
  ComplexMatrix stacked(dx + dy, dx + dy);
  stacked.topLeftCorner(dx, dx) = r_x;
  stacked.topRightCorner(dx, dy) = r_xy;
  stacked.bottomLeftCorner(dy, dx) = r_xy.adjoint();
  stacked.bottomRightCorner(dy, dy) = r_y;
  return empirical_log2_det(r_x, n) + empirical_log2_det(r_y, n) -
         empirical_log2_det(stacked, n);
}

}  // namespace

EmpiricalCovarianceSet estimate_covariances(const ChannelStatistics& stats,
                                            const DesignPoint& design,
                                            std::size_t n_samples, const Rng& rng,
                                            const EstimateOptions& options) {
  if (n_samples < 1000) throw ConfigError("estimate_covariances: need at least 1000 samples");
  if (options.chunk_size == 0) throw ConfigError("estimate_covariances: chunk_size must be > 0");
  const Eigen::Index M = design.P.rows();
  const ChannelSampler sampler(stats);
  const ComplexMatrix pilot = build_downlink_pilot(static_cast<int>(M));
  const ProbeOptions probe_options{options.noise};

  const std::size_t chunks = (n_samples + options.chunk_size - 1) / options.chunk_size;
  std::vector<ComplexMatrix> partial(chunks);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        Rng stream = rng.split("oracle-chunk", c);
        const std::size_t begin = c * options.chunk_size;
        const std::size_t count = std::min(options.chunk_size, n_samples - begin);
        ComplexMatrix Y(3 * M, static_cast<Eigen::Index>(count));
        for (std::size_t k = 0; k < count; ++k) {
          const ChannelRealization r = sampler.sample(stream);
          const ProbingObservations o = probe(r, design, stats, pilot, stream, probe_options);
          const auto col = static_cast<Eigen::Index>(k);
          Y.col(col).segment(0, M) = o.y_a;
          Y.col(col).segment(M, M) = o.y_b;
          Y.col(col).segment(2 * M, M) = o.y_e;
        }
        partial[c] = Y * Y.adjoint();
      },
      options.workers);

  ComplexMatrix total = ComplexMatrix::Zero(3 * M, 3 * M);
  for (const ComplexMatrix& p : partial) total += p;
  total /= static_cast<double>(n_samples);

  EmpiricalCovarianceSet set;
  set.R_a = total.block(0, 0, M, M);
  set.R_b = total.block(M, M, M, M);
  set.R_e = total.block(2 * M, 2 * M, M, M);
  set.R_ab = total.block(0, M, M, M);
  set.R_ae = total.block(0, 2 * M, M, M);
  set.R_be = total.block(M, 2 * M, M, M);
  set.n_samples = n_samples;
  return set;
}

McRates mc_rates(const EmpiricalCovarianceSet& s) {
  McRates r;
  r.mi_ab = gaussian_mi(s.R_a, s.R_b, s.R_ab, s.n_samples);
  r.mi_ae = gaussian_mi(s.R_a, s.R_e, s.R_ae, s.n_samples);
  r.mi_be = gaussian_mi(s.R_b, s.R_e, s.R_be, s.n_samples);
  r.rsk1 = r.mi_ab - r.mi_ae;
  r.rsk2 = r.mi_ab - r.mi_be;
  r.rsk = std::max(r.rsk1, r.rsk2);
  return r;
}

double mc_mi_ab(const EmpiricalCovarianceSet& set) { return mc_rates(set).mi_ab; }

double mc_skr(const EmpiricalCovarianceSet& set) { return mc_rates(set).rsk; }

}  // namespace pkglab::oracle
