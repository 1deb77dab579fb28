#pragma once

#include <cmath>

#include <Eigen/Cholesky>

#include "mines/sym_matrix.hpp"

namespace mines {

struct ProjectionReport {
  int clipped_low = 0;   // eigenvalues raised to tau
  int clipped_high = 0;  // eigenvalues lowered to zeta
  double moved = 0.0;    // ||A - Π(A)||_F
};

template <typename Scalar>
struct Projected {
  SymMatrix<Scalar> matrix;
  ProjectionReport report;
};

/// Frobenius-nearest point of {X : tau·I ⪯ X ⪯ zeta·I}: clip the spectrum.
/// A matrix already inside the band is returned unchanged (bitwise).
template <typename Scalar>
Projected<Scalar> project_spectral_band(const SymMatrix<Scalar>& a, const SpectralBand<Scalar>& band) {
  const EigenPair<Scalar> eig = a.eig();
  VectorX<Scalar> clipped = eig.values;
  ProjectionReport report;
  Scalar moved_sq(0);
  for (Eigen::Index i = 0; i < clipped.size(); ++i) {
    const Scalar v = eig.values(i);
    if (v < band.tau) {
      ++report.clipped_low;
    } else if (v > band.zeta) {
      ++report.clipped_high;
    }
    clipped(i) = band.clamp(v);
    moved_sq += (v - clipped(i)) * (v - clipped(i));
  }
  report.moved = std::sqrt(static_cast<double>(moved_sq));
  if (report.clipped_low == 0 && report.clipped_high == 0) {
    return {a.has_eig() ? a : a.decomposed(), report};
  }
  return {sym_from_eigen<Scalar>(eig.vectors, clipped), report};
}

/// B_R(Σ₁, Σ₂) for R(Σ) = -(α²/2) log det Σ, computed from eigenvalues and a
/// Cholesky solve; no determinant of a product is formed.
template <typename Scalar>
Scalar bregman_divergence(const SymMatrix<Scalar>& sigma1, const SymMatrix<Scalar>& sigma2, Scalar alpha) {
  if (sigma1.dim() != sigma2.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "Bregman divergence of matrices of different size");
  }
  const auto l1 = sigma1.eigenvalues();
  const auto l2 = sigma2.eigenvalues();
  if (!(l1.minCoeff() > Scalar(0)) || !(l2.minCoeff() > Scalar(0))) {
    throw Error(ErrorKind::NotPositiveDefinite, "Bregman divergence needs positive definite arguments");
  }
  Eigen::LLT<MatrixX<Scalar>> llt(sigma2.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "Cholesky of second argument failed");
  }
  const Scalar trace_term = llt.solve(sigma1.matrix()).trace();
  const Scalar logdet_diff = l1.array().log().sum() - l2.array().log().sum();
  const auto d = static_cast<Scalar>(sigma1.dim());
  return -(alpha * alpha / Scalar(2)) * (logdet_diff - trace_term + d);
}

/// One projected mirror-descent step on the inverse covariance:
/// Π(Σ⁻¹ + η₂·G̃).
template <typename Scalar>
Projected<Scalar> mirror_step(const SymMatrix<Scalar>& sigma_inv, const SymMatrix<Scalar>& sigma_grad, Scalar eta2,
                              const SpectralBand<Scalar>& band) {
  if (sigma_inv.dim() != sigma_grad.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "mirror step operands differ in size");
  }
  return project_spectral_band(SymMatrix<Scalar>(sigma_inv.matrix() + eta2 * sigma_grad.matrix()), band);
}

}  // namespace mines
