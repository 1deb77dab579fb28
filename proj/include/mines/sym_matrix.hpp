#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mines/errors.hpp"

namespace mines {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Orthonormal eigenvectors (columns) and eigenvalues in descending order.
/// Each eigenvector's first non-negligible component is positive.
template <typename Scalar>
struct EigenPair {
  MatrixX<Scalar> vectors;
  VectorX<Scalar> values;
};

namespace detail {

template <typename Scalar>
void canonicalize_signs(MatrixX<Scalar>& vectors) {
  const Scalar tiny = Scalar(1e-12);
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > tiny) {
        if (vectors(i, j) < Scalar(0)) vectors.col(j) = -vectors.col(j);
        break;
      }
    }
  }
}

// Reorders (vectors, values) so that values are descending; stable in index.
template <typename Scalar>
EigenPair<Scalar> sorted_descending(const MatrixX<Scalar>& vectors, const VectorX<Scalar>& values) {
  const auto n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  EigenPair<Scalar> out{MatrixX<Scalar>(vectors.rows(), n), VectorX<Scalar>(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
    out.values(j) = values(order[static_cast<std::size_t>(j)]);
  }
  canonicalize_signs(out.vectors);
  return out;
}

}  // namespace detail

template <typename Scalar>
EigenPair<Scalar> symmetric_eigen(const MatrixX<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFiniteValue, "eigendecomposition did not converge");
  }
  // Eigen returns ascending order; reverse to descending.
  return detail::sorted_descending<Scalar>(solver.eigenvectors(), solver.eigenvalues());
}

/// Dense symmetric matrix. Symmetry is enforced at construction by averaging
/// with the transpose; an eigendecomposition may be attached so downstream
/// code such as the projection and the matrix roots does not refactorize.
template <typename Scalar>
class SymMatrix {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  SymMatrix() = default;

  template <typename Derived>
  explicit SymMatrix(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "symmetric matrix must be square, got " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()));
    }
    entries_ = (a + a.transpose()) / Scalar(2);
  }

  static SymMatrix identity(Eigen::Index d) { return SymMatrix(Matrix::Identity(d, d)); }
  static SymMatrix zero(Eigen::Index d) { return SymMatrix(Matrix::Zero(d, d)); }
  static SymMatrix diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  bool has_eig() const { return eig_.has_value(); }
  const EigenPair<Scalar>* cached_eig() const { return eig_ ? &*eig_ : nullptr; }

  /// Cached decomposition when present, otherwise a fresh one.
  EigenPair<Scalar> eig() const { return eig_ ? *eig_ : symmetric_eigen<Scalar>(entries_); }

  /// Copy of this matrix with the decomposition attached.
  SymMatrix decomposed() const {
    SymMatrix out = *this;
    if (!out.eig_) out.eig_ = symmetric_eigen<Scalar>(entries_);
    return out;
  }

  Vector eigenvalues() const { return eig().values; }

  Scalar frobenius_distance(const SymMatrix& other) const {
    return (entries_ - other.entries_).norm();
  }

  template <typename S>
  friend SymMatrix<S> sym_from_eigen(const MatrixX<S>& vectors, const VectorX<S>& values);

 private:
  Matrix entries_;
  std::optional<EigenPair<Scalar>> eig_;
};

using SymMatrixd = SymMatrix<double>;

/// Rebuilds U·diag(λ)·Uᵀ and attaches (U, λ) as the cached decomposition.
template <typename Scalar>
SymMatrix<Scalar> sym_from_eigen(const MatrixX<Scalar>& vectors, const VectorX<Scalar>& values) {
  const auto d = vectors.rows();
  if (vectors.cols() != d || values.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "eigenvector matrix and eigenvalue list disagree");
  }
  const Scalar deviation = (vectors.transpose() * vectors - MatrixX<Scalar>::Identity(d, d)).norm();
  const Scalar tolerance =
      std::max(Scalar(1e-10), Scalar(100) * std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(d));
  if (!(deviation <= tolerance)) {
    throw Error(ErrorKind::NonOrthonormal,
                "UᵀU deviates from identity by " + std::to_string(static_cast<double>(deviation)));
  }
  SymMatrix<Scalar> out(vectors * values.asDiagonal() * vectors.transpose());
  out.eig_ = detail::sorted_descending<Scalar>(vectors, values);
  return out;
}

/// Feasible eigenvalue interval [tau, zeta] for the inverse covariance.
template <typename Scalar>
struct SpectralBand {
  Scalar tau;
  Scalar zeta;

  SpectralBand(Scalar lower, Scalar upper) : tau(lower), zeta(upper) {
    if (!(tau > Scalar(0)) || !(tau <= zeta) || !std::isfinite(static_cast<double>(zeta))) {
      throw Error(ErrorKind::InvalidArgument, "spectral band requires 0 < tau <= zeta");
    }
  }

  Scalar clamp(Scalar value) const { return std::clamp(value, tau, zeta); }
};

using SpectralBandd = SpectralBand<double>;

template <typename Scalar>
bool band_contains(const SpectralBand<Scalar>& band, const SymMatrix<Scalar>& a) {
  const Scalar slack = Scalar(1e-9);
  const auto values = a.eigenvalues();
  return (values.array() >= band.tau - slack).all() && (values.array() <= band.zeta + slack).all();
}

}  // namespace mines
