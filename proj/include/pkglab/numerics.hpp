#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pkglab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Configuration problems map to CLI exit status 2, numerical failures to 3.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace numerics {

struct HermitianEig {
  RealVector eigenvalues;      // descending
  ComplexMatrix eigenvectors;  // unitary, columns match eigenvalues
};

/// Largest |A - A^H| entry relative to the largest |A| entry.
double hermitian_defect(const ComplexMatrix& a);

/// (A + A^H) / 2
ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Ties keep the solver's original index order. Throws
/// NumericalError when A is not square, has non-finite entries, or deviates
/// from Hermitian symmetry by more than `tolerance` (relative to max |A_ij|).
HermitianEig hermitian_eig(const ComplexMatrix& a, double tolerance = 1e-10);

/// Hermitian square root S = U sqrt(Lambda) U^H, so S S^H = A. Eigenvalues in
/// [-1e-10 * lambda_max, 0) are clipped to zero; anything more negative is
/// rejected as indefinite.
ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& a);

/// Natural-log determinant of a Hermitian positive definite matrix, evaluated
/// as the sum of log eigenvalues.
double log_det_hermitian_pd(const ComplexMatrix& a);
double log2_det_hermitian_pd(const ComplexMatrix& a);

/// log2 |det A| for a general square matrix via partially pivoted LU.
/// Throws NumericalError on an exactly singular factor.
double log2_abs_det(const ComplexMatrix& a);

/// Zeroth-order Bessel function of the first kind. Power series below
/// |x| = 15, Hankel asymptotic expansion above.
double bessel_j0(double x);

/// ||estimate - reference||_F / ||reference||_F
double relative_frobenius_error(const ComplexMatrix& estimate,
                                const ComplexMatrix& reference);

bool all_finite(const ComplexMatrix& a);

/// [[a, b], [c, d]]
ComplexMatrix block2x2(const ComplexMatrix& a, const ComplexMatrix& b,
                       const ComplexMatrix& c, const ComplexMatrix& d);

}  // namespace numerics
}  // namespace pkglab
