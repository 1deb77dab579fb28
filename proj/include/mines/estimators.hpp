#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "mines/problems.hpp"
#include "mines/rng.hpp"
#include "mines/sampling.hpp"
#include "mines/sym_matrix.hpp"

namespace mines {

/// g̃(μ): antithetic natural-gradient estimate of the mean update.
struct MuGradEstimate {
  Eigen::VectorXd vector;
  std::uint64_t batch_ref = 0;
};

/// G̃(Σ): unbiased estimate of 2α⁻²∂Q_α/∂Σ.
struct SigmaGradEstimate {
  SymMatrixd matrix;
};

/// (1/b) Σᵢ (f₊ᵢ - f₋ᵢ)/(2α) · Σ^{1/2}uᵢ
MuGradEstimate mu_gradient_estimate(const AntitheticBatch& batch, double alpha);

/// (1/(2bα²)) Σᵢ (f₊ᵢ + f₋ᵢ - 2f₀)(Σ^{-1/2}uᵢuᵢᵀΣ^{-1/2} - Σ⁻¹) - Σ⁻¹
SigmaGradEstimate sigma_gradient_estimate(const AntitheticBatch& batch, const SymMatrixd& sigma_inv,
                                          const SymMatrixd& inv_sqrt, double alpha);

/// Q_α on a quadratic: f(μ) + (α²/2)⟨H, Σ⟩ - (α²/2) log det Σ.
double q_alpha_quadratic(const Problem& problem, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv,
                         double alpha);

/// R(Σ) = -(α²/2) log det Σ, from the spectrum of Σ⁻¹.
double log_det_regularizer(const SymMatrixd& sigma_inv, double alpha);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Sample mean of f(μ + αΣ^{1/2}u) plus R(Σ). With antithetic pairing each
/// summand is ½(f(μ+αΣ^{1/2}u) + f(μ-αΣ^{1/2}u)) for the same draw u.
MonteCarloEstimate q_alpha_monte_carlo(const Problem& problem, const Eigen::VectorXd& mu,
                                       const SymMatrixd& sigma_inv, double alpha, long n_samples, RngStream& rng,
                                       bool antithetic = false);

struct QAlphaGradient {
  Eigen::VectorXd dmu;
  SymMatrixd dsigma;  // gradient w.r.t. symmetric Σ (not Σ⁻¹)
};

/// Central finite differences of Q_α in μ and in the entries of Σ.
/// Quadratics with an oracle use the closed form; other problems use Monte
/// Carlo with common random numbers (`mc_samples` draws shared by all
/// perturbed evaluations). Off-diagonal entries are perturbed symmetrically and
/// halved, so the result is the symmetric matrix gradient.
QAlphaGradient q_alpha_fd_gradient(const Problem& problem, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv,
                                   double alpha, double h, RngStream& rng, long mc_samples = 20000);

}  // namespace mines
