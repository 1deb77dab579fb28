#include "mines/sampling.hpp"

#include <cmath>
#include <string>

#include "mines/problems.hpp"

namespace mines {

AntitheticBatch draw_antithetic_batch(const Problem& problem, const Eigen::VectorXd& mu,
                                      const MatrixRoots<double>& roots, double alpha, int b, RngStream& rng) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (b < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
  const Eigen::Index d = mu.size();
  if (roots.sqrt.dim() != d || problem.dim() != d) {
    throw Error(ErrorKind::DimensionMismatch, "mean, covariance and problem dimensions differ");
  }

  AntitheticBatch batch;
  batch.draw_index = rng.normals_drawn();
  batch.directions.resize(d, b);
  for (int i = 0; i < b; ++i) batch.directions.col(i) = standard_normal_vector(rng, d);
  batch.scaled = roots.sqrt.matrix() * batch.directions;

  batch.plus_values.resize(b);
  batch.minus_values.resize(b);
  for (int i = 0; i < b; ++i) {
    const Eigen::VectorXd step = alpha * batch.scaled.col(i);
    batch.plus_values(i) = problem(mu + step);
    batch.minus_values(i) = problem(mu - step);
  }
  batch.center_value = problem(mu);
  return batch;
}

AntitheticBatch draw_antithetic_batch(const Problem& problem, const Eigen::VectorXd& mu,
                                      const SymMatrixd& sigma_inv, double alpha, int b, RngStream& rng) {
  return draw_antithetic_batch(problem, mu, matrix_sqrt_from_inverse(sigma_inv), alpha, b, rng);
}

void require_finite(const AntitheticBatch& batch) {
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    if (!std::isfinite(batch.plus_values(i)) || !std::isfinite(batch.minus_values(i))) {
      throw Error(ErrorKind::NonFiniteValue, "query at antithetic pair " + std::to_string(i) + " is not finite");
    }
  }
  if (!std::isfinite(batch.center_value)) {
    throw Error(ErrorKind::NonFiniteValue, "center query f(mu) is not finite");
  }
}

}  // namespace mines
