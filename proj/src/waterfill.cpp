#include "pkglab/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pkglab/rng.hpp"

namespace pkglab::waterfill {

namespace {

constexpr double kExclusion = 1e-12;
constexpr int kConcavityGrid = 64;

struct Problem {
  ModeObjective kind;
  ModeParams params;
  std::vector<double> p_B;  // active modes only
  double budget;            // M, in budget-share units y_i = x_i / p_B,i

  [[nodiscard]] double value(const std::vector<double>& y) const {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) total += mode_value(kind, params, p_B[i] * y[i]);
    return total;
  }

  [[nodiscard]] std::vector<double> gradient(const std::vector<double>& y) const {
    std::vector<double> g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      g[i] = p_B[i] * mode_derivative(kind, params, p_B[i] * y[i]);
    }
    return g;
  }
};

/// Euclidean projection onto {y >= 0, sum y = s}.
std::vector<double> project_simplex(const std::vector<double>& v, double s) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - s) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) y[i] = std::max(v[i] - tau, 0.0);
  return y;
}

void renormalize(std::vector<double>& y, double s) {
  const double total = std::accumulate(y.begin(), y.end(), 0.0);
  if (total > 0.0) {
    for (double& v : y) v *= s / total;
  }
}

bool per_mode_concave(const Problem& prob) {
  for (double pb : prob.p_B) {
    const double x_max = prob.budget * pb;
    double previous = mode_derivative(prob.kind, prob.params, 0.0);
    if (!(previous > 0.0)) return false;
    for (int k = 1; k <= kConcavityGrid; ++k) {
      const double x = x_max * k / kConcavityGrid;
      const double d = mode_derivative(prob.kind, prob.params, x);
      if (!(d > 0.0) || !(d < previous)) return false;
      previous = d;
    }
  }
  return true;
}

/// x solving f'(x) = target on [0, x_max] for a decreasing f'.
double invert_derivative(const Problem& prob, double target, double x_max) {
  if (mode_derivative(prob.kind, prob.params, 0.0) <= target) return 0.0;
  if (mode_derivative(prob.kind, prob.params, x_max) >= target) return x_max;
  double lo = 0.0;
  double hi = x_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * x_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mode_derivative(prob.kind, prob.params, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> kkt_bisection(const Problem& prob, double& mu_out) {
  const std::size_t n = prob.p_B.size();
  auto shares = [&](double mu) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x_max = prob.budget * prob.p_B[i];
      y[i] = invert_derivative(prob, mu / prob.p_B[i], x_max) / prob.p_B[i];
    }
    return y;
  };
  double mu_lo = 0.0;
  double mu_hi = 0.0;
  for (double pb : prob.p_B) {
    mu_hi = std::max(mu_hi, pb * mode_derivative(prob.kind, prob.params, 0.0));
  }
  std::vector<double> y = shares(mu_lo);
  for (int it = 0; it < 300; ++it) {
    const double mu = 0.5 * (mu_lo + mu_hi);
    y = shares(mu);
    const double used = std::accumulate(y.begin(), y.end(), 0.0);
    if (std::fabs(used - prob.budget) <= 1e-10 * prob.budget) {
      mu_out = mu;
      return y;
    }
    if (used > prob.budget) {
      mu_lo = mu;
    } else {
      mu_hi = mu;
    }
  }
  mu_out = 0.5 * (mu_lo + mu_hi);
  return y;
}

std::vector<double> projected_ascent(const Problem& prob, std::vector<double> y,
                                     int max_iterations) {
  double f = prob.value(y);
  double step = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    const std::vector<double> g = prob.gradient(y);
    bool accepted = false;
    std::vector<double> next;
    double f_next = f;
    while (step > 1e-30) {
      std::vector<double> trial(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) trial[i] = y[i] + step * g[i];
      next = project_simplex(trial, prob.budget);
      double gain = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) gain += g[i] * (next[i] - y[i]);
      f_next = prob.value(next);
      if (f_next >= f + 1e-4 * gain) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double move = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) move = std::max(move, std::fabs(next[i] - y[i]));
    y = std::move(next);
    f = f_next;
    if (move < 1e-14 * prob.budget) break;
    step = std::min(step * 2.0, 1e6);
  }
  return y;
}

}  // namespace

std::string branch_name(Branch branch) {
  switch (branch) {
    case Branch::P11: return "P1.1";
    case Branch::P21: return "P2.1";
    case Branch::P22: return "P2.2";
  }
  return "unknown";
}

ComplexVector equal_phase_vector(int L) {
  if (L < 1) throw ConfigError("equal_phase_vector: L must be >= 1");
  return ComplexVector::Ones(L);
}

numerics::HermitianEig mode_basis(const RealMatrix& R_B) {
  return numerics::hermitian_eig(R_B.cast<Complex>());
}

Allocation solve_allocation(ModeObjective objective, const RealVector& p_B,
                            const ModeParams& params, const SolverOptions& options) {
  const Eigen::Index M = p_B.size();
  if (M < 1) throw ConfigError("solve_allocation: no modes");
  if (!(params.delta2 > 0.0)) throw ConfigError("solve_allocation: noise power must be > 0");
  const double threshold = kExclusion * p_B(0);
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < M; ++i) {
    if (p_B(i) > threshold && p_B(i) > 0.0) active.push_back(i);
  }
  if (active.empty()) throw NumericalError("solve_allocation: every mode is excluded");

  Problem prob{objective, params, {}, static_cast<double>(M)};
  for (Eigen::Index i : active) prob.p_B.push_back(p_B(i));
  const std::size_t n = active.size();

  Allocation out;
  std::vector<double> best;
  double mu = 0.0;
  if (per_mode_concave(prob)) {
    best = kkt_bisection(prob, mu);
  } else {
    out.fallback = true;
    std::vector<double> uniform(n, prob.budget / static_cast<double>(n));
    // Uniform precoding (P_e = I) spends exactly one budget unit per mode.
    if (n == static_cast<std::size_t>(M)) std::fill(uniform.begin(), uniform.end(), 1.0);
    best = projected_ascent(prob, uniform, options.max_iterations);
    double best_value = prob.value(best);
    const Rng root(options.seed);
    for (int r = 0; r < options.restarts; ++r) {
      Rng stream = root.split("waterfill-restart", static_cast<std::uint64_t>(r));
      std::vector<double> start(n);
      for (double& v : start) v = -std::log(1.0 - stream.uniform());
      renormalize(start, prob.budget);
      std::vector<double> y = projected_ascent(prob, start, options.max_iterations);
      const double v = prob.value(y);
      if (v > best_value) {
        best_value = v;
        best = std::move(y);
      }
    }
  }
  renormalize(best, prob.budget);

  out.p = RealVector::Zero(M);
  double mu_sum = 0.0;
  int mu_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = prob.p_B[k] * best[k];
    out.p(active[k]) = std::sqrt(x);
    if (best[k] > 0.0) {
      mu_sum += prob.p_B[k] * mode_derivative(objective, params, x);
      ++mu_count;
    }
  }
  out.mu = out.fallback ? (mu_count > 0 ? mu_sum / mu_count : 0.0) : mu;
  out.objective = prob.value(best);
  double used = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    if (out.p(i) > 0.0) used += out.p(i) * out.p(i) / p_B(i);
  }
  out.constraint_residual = std::fabs(used - static_cast<double>(M));
  return out;
}

ModeParams equal_phase_params(const ChannelStatistics& stats) {
  const ComplexVector theta = equal_phase_vector(stats.L());
  return {stats.P_max / stats.M(), stats.P_b, stats.delta2, delta_u2(theta, stats),
          delta_e2(theta, stats), delta_ue2(theta, stats)};
}

Allocation solve_allocation(ModeObjective objective, const ChannelStatistics& stats,
                            const SolverOptions& options) {
  return solve_allocation(objective, mode_basis(stats.R_B).eigenvalues,
                          equal_phase_params(stats), options);
}

ComplexMatrix precoder_from_allocation(const RealMatrix& R_B, const Allocation& allocation) {
  const numerics::HermitianEig eig = mode_basis(R_B);
  const Eigen::Index M = R_B.rows();
  if (allocation.p.size() != M) throw ConfigError("precoder_from_allocation: size mismatch");
  const double threshold = kExclusion * eig.eigenvalues(0);
  ComplexVector scale = ComplexVector::Zero(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    if (eig.eigenvalues(i) > threshold && eig.eigenvalues(i) > 0.0) {
      scale(i) = allocation.p(i) / std::sqrt(eig.eigenvalues(i));
    }
  }
  const ComplexMatrix& U = eig.eigenvectors;
  return (U * scale.asDiagonal() * U.adjoint()).conjugate();
}

DesignPoint design_from_allocation(const ChannelStatistics& stats,
                                   const Allocation& allocation) {
  DesignPoint d;
  const ComplexMatrix P_e = precoder_from_allocation(stats.R_B, allocation);
  // Rescale away the residual rounding so the power constraint is exact.
  d.P = std::sqrt(stats.P_max) * P_e / P_e.norm();
  d.theta = equal_phase_vector(stats.L());
  return d;
}

BaselineResult baseline_case1(const ChannelStatistics& stats, const SolverOptions& options) {
  BaselineResult r;
  r.allocation = solve_allocation(ModeObjective::MutualInformation, stats, options);
  r.design = design_from_allocation(stats, r.allocation);
  r.branch = Branch::P11;
  r.report = skr_lower_bound(r.design, stats);
  r.value = r.report.mi_ab;
  return r;
}

BaselineResult baseline_case2(const ChannelStatistics& stats, const SolverOptions& options) {
  BaselineResult first;
  first.allocation = solve_allocation(ModeObjective::Rsk1, stats, options);
  first.design = design_from_allocation(stats, first.allocation);
  first.branch = Branch::P21;
  first.report = skr_lower_bound(first.design, stats);
  first.value = first.report.rsk1;

  BaselineResult second;
  second.allocation = solve_allocation(ModeObjective::Rsk2, stats, options);
  second.design = design_from_allocation(stats, second.allocation);
  second.branch = Branch::P22;
  second.report = skr_lower_bound(second.design, stats);
  second.value = second.report.rsk2;

  return second.value > first.value ? second : first;
}

}  // namespace pkglab::waterfill
