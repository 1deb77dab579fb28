#include "mines/estimators.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace mines {

MuGradEstimate mu_gradient_estimate(const AntitheticBatch& batch, double alpha) {
  const Eigen::VectorXd weights = (batch.plus_values - batch.minus_values) / (2.0 * alpha);
  const auto b = static_cast<double>(batch.size());
  return {batch.scaled * weights / b, batch.draw_index};
}

SigmaGradEstimate sigma_gradient_estimate(const AntitheticBatch& batch, const SymMatrixd& sigma_inv,
                                          const SymMatrixd& inv_sqrt, double alpha) {
  const Eigen::Index b = batch.size();
  const Eigen::MatrixXd& s_inv = sigma_inv.matrix();
  const Eigen::MatrixXd whitened = inv_sqrt.matrix() * batch.directions;
  const double scale = 1.0 / (2.0 * static_cast<double>(b) * alpha * alpha);

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(s_inv.rows(), s_inv.cols());
  for (Eigen::Index i = 0; i < b; ++i) {
    const double second = batch.plus_values(i) + batch.minus_values(i) - 2.0 * batch.center_value;
    total.noalias() += second * (whitened.col(i) * whitened.col(i).transpose() - s_inv);
  }
  return {SymMatrixd(scale * total - s_inv)};
}

double log_det_regularizer(const SymMatrixd& sigma_inv, double alpha) {
  const Eigen::VectorXd values = sigma_inv.eigenvalues();
  if (!(values.minCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "log-det regularizer needs a positive definite argument");
  }
  return 0.5 * alpha * alpha * values.array().log().sum();
}

namespace {

const SymMatrixd& quadratic_hessian(const Problem& problem, const Eigen::VectorXd& mu, SymMatrixd& storage) {
  const Oracle& oracle = problem.oracle(Verification{});
  if (!oracle.quadratic) {
    throw Error(ErrorKind::OracleRequired, "closed-form Q_alpha needs a quadratic problem");
  }
  storage = oracle.hessian(mu);
  return storage;
}

// log det of a covariance given directly (not its inverse).
double log_det_covariance(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "perturbed covariance left the positive definite cone");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double q_closed_form(double f_mu, const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& sigma, double alpha) {
  const double a2 = alpha * alpha;
  return f_mu + 0.5 * a2 * (hessian.cwiseProduct(sigma)).sum() - 0.5 * a2 * log_det_covariance(sigma);
}

// Monte-Carlo Q_α at (μ, Σ) with a fixed sample set (common random numbers).
double q_common_samples(const Problem& problem, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                        double alpha, const Eigen::MatrixXd& samples) {
  const double log_det = log_det_covariance(sigma);
  const EigenPair<double> eig = SymMatrixd(sigma).eig();
  const Eigen::MatrixXd root = eig.vectors * eig.values.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
  const Eigen::MatrixXd points = (alpha * root * samples).colwise() + mu;
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) total += problem.monitor(points.col(i));
  return total / static_cast<double>(points.cols()) - 0.5 * alpha * alpha * log_det;
}

}  // namespace

double q_alpha_quadratic(const Problem& problem, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv,
                         double alpha) {
  SymMatrixd storage;
  const SymMatrixd& hessian = quadratic_hessian(problem, mu, storage);
  const EigenPair<double> eig = sigma_inv.eig();
  if (!(eig.values.minCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "inverse covariance is not positive definite");
  }
  // ⟨H, Σ⟩ = Σⱼ uⱼᵀHuⱼ / λⱼ with Σ⁻¹ = Σⱼ λⱼuⱼuⱼᵀ.
  const Eigen::MatrixXd rotated = eig.vectors.transpose() * hessian.matrix() * eig.vectors;
  const double inner = (rotated.diagonal().array() / eig.values.array()).sum();
  return problem.monitor(mu) + 0.5 * alpha * alpha * inner + log_det_regularizer(sigma_inv, alpha);
}

MonteCarloEstimate q_alpha_monte_carlo(const Problem& problem, const Eigen::VectorXd& mu,
                                       const SymMatrixd& sigma_inv, double alpha, long n_samples, RngStream& rng,
                                       bool antithetic) {
  if (n_samples < 2) throw Error(ErrorKind::InvalidArgument, "Monte-Carlo Q_alpha needs at least 2 samples");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be non-negative");
  const double regularizer = log_det_regularizer(sigma_inv, alpha);
  if (alpha == 0.0) return {problem.monitor(mu) + regularizer, 0.0};

  const Eigen::MatrixXd root = matrix_sqrt_from_inverse(sigma_inv).sqrt.matrix();
  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const Eigen::VectorXd step = alpha * root * standard_normal_vector(rng, mu.size());
    double value = problem.monitor(mu + step);
    if (antithetic) value = 0.5 * (value + problem.monitor(mu - step));
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  const double variance = m2 / static_cast<double>(n_samples - 1);
  return {mean + regularizer, std::sqrt(variance / static_cast<double>(n_samples))};
}

QAlphaGradient q_alpha_fd_gradient(const Problem& problem, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv,
                                   double alpha, double h, RngStream& rng, long mc_samples) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const Eigen::Index d = mu.size();
  const Eigen::MatrixXd sigma = matrix_sqrt_from_inverse(sigma_inv).sqrt.matrix();
  const Eigen::MatrixXd covariance = sigma * sigma;

  const bool closed_form = problem.has_oracle() && problem.oracle(Verification{}).quadratic;
  std::function<double(const Eigen::VectorXd&, const Eigen::MatrixXd&)> q;
  if (closed_form) {
    const Eigen::MatrixXd hessian = problem.oracle(Verification{}).hessian(mu).matrix();
    q = [&problem, hessian, alpha](const Eigen::VectorXd& m, const Eigen::MatrixXd& s) {
      return q_closed_form(problem.monitor(m), hessian, s, alpha);
    };
  } else {
    Eigen::MatrixXd samples(d, mc_samples);
    for (long i = 0; i < mc_samples; ++i) samples.col(i) = standard_normal_vector(rng, d);
    q = [&problem, alpha, samples](const Eigen::VectorXd& m, const Eigen::MatrixXd& s) {
      return q_common_samples(problem, m, s, alpha, samples);
    };
  }

  QAlphaGradient out;
  out.dmu.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd plus = mu;
    Eigen::VectorXd minus = mu;
    plus(i) += h;
    minus(i) -= h;
    out.dmu(i) = (q(plus, covariance) - q(minus, covariance)) / (2.0 * h);
  }

  Eigen::MatrixXd dsigma(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      Eigen::MatrixXd bump = Eigen::MatrixXd::Zero(d, d);
      bump(i, j) = h;
      bump(j, i) = h;
      const double diff = (q(mu, covariance + bump) - q(mu, covariance - bump)) / (2.0 * h);
      dsigma(i, j) = i == j ? diff : 0.5 * diff;
      dsigma(j, i) = dsigma(i, j);
    }
  }
  out.dsigma = SymMatrixd(dsigma);
  return out;
}

}  // namespace mines
