#pragma once

#include <cstdint>
#include <string>

#include "pkglab/channel.hpp"
#include "pkglab/probing.hpp"
#include "pkglab/skr.hpp"

namespace pkglab::waterfill {

/// Mode amplitudes p_i (eigenvalues of R_B^{H/2} P_e^*), ordered like the
/// descending eigenvalues p_B of R_B.
struct Allocation {
  RealVector p;
  double mu = 0.0;
  double objective = 0.0;      // scalarized objective, bits
  bool fallback = false;       // per-mode concavity failed; ascent path used
  double constraint_residual = 0.0;
};

enum class Branch { P11, P21, P22 };

std::string branch_name(Branch branch);

struct BaselineResult {
  DesignPoint design;
  Allocation allocation;
  Branch branch = Branch::P11;
  double value = 0.0;          // exact MI (case 1) or exact SKR branch (case 2)
  SkrReport report;            // exact evaluation of `design`
};

struct SolverOptions {
  int restarts = 20;
  std::uint64_t seed = 0x70a1f111ULL;
  int max_iterations = 4000;
};

ComplexVector equal_phase_vector(int L);

/// Eigenvalues of R_B in descending order with eigenvectors.
numerics::HermitianEig mode_basis(const RealMatrix& R_B);

/// Maximizes sum_i f(p_i^2) subject to sum_i p_i^2 / p_B,i = M, p_i >= 0.
/// Modes with p_B,i <= 1e-12 p_B,1 are excluded and held at zero.
Allocation solve_allocation(ModeObjective objective, const RealVector& p_B,
                            const ModeParams& params, const SolverOptions& options = {});

/// Allocation for the equal-phase IRS with P_a = P_max / M.
Allocation solve_allocation(ModeObjective objective, const ChannelStatistics& stats,
                            const SolverOptions& options = {});

ModeParams equal_phase_params(const ChannelStatistics& stats);

/// P_e = (R_B^{-1/2} U_B Lambda U_B^H)^*, with Tr(P_e P_e^H) = M.
ComplexMatrix precoder_from_allocation(const RealMatrix& R_B, const Allocation& allocation);

/// P = sqrt(P_max / M) P_e with equal IRS phases.
DesignPoint design_from_allocation(const ChannelStatistics& stats,
                                   const Allocation& allocation);

BaselineResult baseline_case1(const ChannelStatistics& stats,
                              const SolverOptions& options = {});
BaselineResult baseline_case2(const ChannelStatistics& stats,
                              const SolverOptions& options = {});

}  // namespace pkglab::waterfill
