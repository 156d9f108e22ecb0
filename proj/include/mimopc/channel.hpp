#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "mimopc/types.hpp"

namespace mimopc {

template <typename Scalar>
using CorrelationMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using CorrelationMatrixXd = CorrelationMatrix<double>;

/// Approximate Gaussian local scattering model for a half-wavelength ULA:
///   [R]_{m,n} = beta * exp(j pi (m-n) sin(phi)) * exp(-(asd^2 / 2) (pi (m-n) cos(phi))^2).
/// The matrix is Toeplitz, so only the 2M-1 distinct lags are evaluated.
template <typename Scalar>
CorrelationMatrix<Scalar> local_scattering(Scalar beta, Scalar aoa, Scalar asd, Index antennas) {
  using Complex = std::complex<Scalar>;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> lag(antennas);
  const Scalar s = std::sin(aoa);
  const Scalar c = std::cos(aoa);
  for (Index d = 0; d < antennas; ++d) {
    const Scalar spread = pi * static_cast<Scalar>(d) * c;
    const Scalar mag = beta * std::exp(-(asd * asd / Scalar(2)) * spread * spread);
    lag(d) = std::polar(mag, pi * static_cast<Scalar>(d) * s);
  }
  CorrelationMatrix<Scalar> R(antennas, antennas);
  for (Index n = 0; n < antennas; ++n) {
    for (Index m = 0; m < antennas; ++m) {
      R(m, n) = m >= n ? lag(m - n) : std::conj(lag(n - m));
    }
  }
  // Diagonal is exactly beta.
  for (Index m = 0; m < antennas; ++m) R(m, m) = Complex(beta, 0);
  return R;
}

/// beta * I_M: the uncorrelated (i.i.d. Rayleigh) special case.
template <typename Scalar>
CorrelationMatrix<Scalar> uncorrelated(Scalar beta, Index antennas) {
  return CorrelationMatrix<Scalar>::Identity(antennas, antennas) * std::complex<Scalar>(beta, 0);
}

/// Smallest eigenvalue of a Hermitian matrix.
template <typename Derived>
typename Derived::RealScalar min_eigenvalue(const Eigen::MatrixBase<Derived>& hermitian) {
  using Plain = typename Derived::PlainObject;
  Eigen::SelfAdjointEigenSolver<Plain> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Hermitian and PSD up to -tol * trace.
template <typename Derived>
bool is_hermitian_psd(const Eigen::MatrixBase<Derived>& A, double tol = 1e-9) {
  if (A.rows() != A.cols()) return false;
  const double scale = std::max(1e-300, std::abs(A.trace()));
  if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  return min_eigenvalue(A) >= -tol * scale;
}

}  // namespace mimopc
