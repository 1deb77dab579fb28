#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "mines/rng.hpp"
#include "mines/sym_matrix.hpp"

namespace mines {

class Problem;

/// Symmetric roots Σ^{1/2} and Σ^{-1/2} of the covariance represented by Σ⁻¹.
template <typename Scalar>
struct MatrixRoots {
  SymMatrix<Scalar> sqrt;
  SymMatrix<Scalar> inv_sqrt;
};

/// With Σ⁻¹ = UΛUᵀ returns Σ^{1/2} = UΛ^{-1/2}Uᵀ and Σ^{-1/2} = UΛ^{1/2}Uᵀ,
/// reusing the cached decomposition when present.
template <typename Scalar>
MatrixRoots<Scalar> matrix_sqrt_from_inverse(const SymMatrix<Scalar>& sigma_inv) {
  const EigenPair<Scalar> eig = sigma_inv.eig();
  if (!(eig.values.minCoeff() > Scalar(1e-14))) {
    throw Error(ErrorKind::NotPositiveDefinite, "inverse covariance has an eigenvalue <= 1e-14");
  }
  const VectorX<Scalar> root = eig.values.array().sqrt();
  return {sym_from_eigen<Scalar>(eig.vectors, root.cwiseInverse()), sym_from_eigen<Scalar>(eig.vectors, root)};
}

/// One iteration's queries: b antithetic pairs around μ plus the center.
struct AntitheticBatch {
  Eigen::MatrixXd directions;  // d×b, columns uᵢ ~ N(0, I)
  Eigen::MatrixXd scaled;      // d×b, columns Σ^{1/2}uᵢ
  Eigen::VectorXd plus_values;
  Eigen::VectorXd minus_values;
  double center_value = 0.0;
  std::uint64_t draw_index = 0;  // rng position when the batch was drawn

  Eigen::Index size() const { return directions.cols(); }
};

/// Queries f(μ ± αΣ^{1/2}uᵢ) for i = 1..b, then f(μ): exactly 2b+1 queries.
AntitheticBatch draw_antithetic_batch(const Problem& problem, const Eigen::VectorXd& mu,
                                      const MatrixRoots<double>& roots, double alpha, int b, RngStream& rng);

AntitheticBatch draw_antithetic_batch(const Problem& problem, const Eigen::VectorXd& mu,
                                      const SymMatrixd& sigma_inv, double alpha, int b, RngStream& rng);

/// Throws NonFiniteValue naming the first offending query.
void require_finite(const AntitheticBatch& batch);

}  // namespace mines
