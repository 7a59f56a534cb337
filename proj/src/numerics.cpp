#include "pkglab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

namespace pkglab::numerics {

namespace {

constexpr double kPsdClip = 1e-10;

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a square matrix, got " << a.rows() << "x"
        << a.cols();
    throw NumericalError(msg.str());
  }
}

double bessel_j0_series(double x) {
  const long double quarter_x2 = 0.25L * static_cast<long double>(x) * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -quarter_x2 / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L && k > x) break;
  }
  return static_cast<double>(sum);
}

double bessel_j0_asymptotic(double x) {
  // Hankel expansion, truncated at the smallest term.
  double p = 0.0;
  double q = 0.0;
  double coeff = 1.0;  // a_k(0) / x^k
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    if (k > 0) coeff *= -static_cast<double>((2 * k - 1) * (2 * k - 1)) / (8.0 * k * x);
    const double magnitude = std::fabs(coeff);
    if (magnitude > previous) break;
    previous = magnitude;
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * coeff;
    } else {
      q += sign * coeff;
    }
    if (magnitude < 1e-17) break;
  }
  const double chi = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) *
         (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double hermitian_defect(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex v = a.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

HermitianEig hermitian_eig(const ComplexMatrix& a, double tolerance) {
  require_square(a, "hermitian_eig");
  if (!all_finite(a)) throw NumericalError("hermitian_eig: non-finite entry");
  const double defect = hermitian_defect(a);
  if (defect > tolerance) {
    std::ostringstream msg;
    msg << "hermitian_eig: matrix is not Hermitian (relative defect " << defect
        << " > " << tolerance << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::Index n = a.rows();
  HermitianEig out;
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }
  // Eigen returns ascending order; reverse with a stable sort on the value.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const RealVector& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index lhs, Eigen::Index rhs) {
                     return values(lhs) > values(rhs);
                   });
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = values(order[static_cast<std::size_t>(i)]);
    out.eigenvectors.col(i) =
        solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& a) {
  const HermitianEig eig = hermitian_eig(a);
  if (eig.eigenvalues.size() == 0) return ComplexMatrix(0, 0);
  const double largest = std::max(eig.eigenvalues(0), 0.0);
  const double smallest = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (smallest < -kPsdClip * largest || (largest == 0.0 && smallest < 0.0)) {
    std::ostringstream msg;
    msg << "matrix_sqrt_psd: matrix is indefinite (eigenvalue " << smallest
        << ", largest " << largest << ")";
    throw NumericalError(msg.str());
  }
  RealVector root = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors * root.cast<Complex>().asDiagonal() *
         eig.eigenvectors.adjoint();
}

double log_det_hermitian_pd(const ComplexMatrix& a) {
  const HermitianEig eig = hermitian_eig(a);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double lambda = eig.eigenvalues(i);
    if (!(lambda > 0.0)) {
      std::ostringstream msg;
      msg << "log_det_hermitian_pd: matrix is not positive definite "
             "(eigenvalue "
          << lambda << ")";
      throw NumericalError(msg.str());
    }
    sum += std::log(lambda);
  }
  return sum;
}

double log2_det_hermitian_pd(const ComplexMatrix& a) {
  return log_det_hermitian_pd(a) / std::numbers::ln2;
}

double log2_abs_det(const ComplexMatrix& a) {
  require_square(a, "log2_abs_det");
  if (a.size() == 0) return 0.0;
  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  const ComplexMatrix& factor = lu.matrixLU();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < factor.rows(); ++i) {
    const double magnitude = std::abs(factor(i, i));
    if (!(magnitude > 0.0)) {
      throw NumericalError("log2_abs_det: matrix is singular");
    }
    sum += std::log2(magnitude);
  }
  return sum;
}

double bessel_j0(double x) {
  const double ax = std::fabs(x);
  if (ax < 15.0) return bessel_j0_series(ax);
  return bessel_j0_asymptotic(ax);
}

double relative_frobenius_error(const ComplexMatrix& estimate,
                                const ComplexMatrix& reference) {
  if (estimate.rows() != reference.rows() ||
      estimate.cols() != reference.cols()) {
    throw NumericalError("relative_frobenius_error: shape mismatch");
  }
  const double denom = reference.norm();
  const double diff = (estimate - reference).norm();
  if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / denom;
}

ComplexMatrix block2x2(const ComplexMatrix& a, const ComplexMatrix& b,
                       const ComplexMatrix& c, const ComplexMatrix& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() ||
      b.cols() != d.cols()) {
    throw NumericalError("block2x2: inconsistent block shapes");
  }
  ComplexMatrix out(a.rows() + c.rows(), a.cols() + b.cols());
  out << a, b, c, d;
  return out;
}

}  // namespace pkglab::numerics
