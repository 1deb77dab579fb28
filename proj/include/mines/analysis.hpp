#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "mines/optimizer.hpp"
#include "mines/problems.hpp"
#include "mines/rng.hpp"
#include "mines/theory.hpp"

namespace mines {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  long k_start = 0;
  long k_end = 0;
};

enum class TraceColumn { SigmaErrSq, FGap };

/// Least squares of log(value) on log(k) over rows with k in [k_start, k_end].
/// Needs at least 10 rows; throws NonPositiveValue naming the offending k.
RateFit fit_rate(const RunTrace& trace, TraceColumn column, long k_start, long k_end);

/// Least squares of log(value) on k (linear-rate fit); slope = log of the
/// per-iteration contraction factor.
RateFit fit_geometric_rate(const RunTrace& trace, TraceColumn column, long k_start, long k_end);

RateFit fit_power_law(std::span<const double> ks, std::span<const double> values);
RateFit fit_geometric(std::span<const double> ks, std::span<const double> values);

/// Outcome of a statistical or numerical check, serializable to JSON.
struct SuiteReport {
  std::string suite;
  bool pass = false;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json thresholds = nlohmann::json::object();

  nlohmann::json to_json() const;
};

enum class SigmaEstimatorVariant {
  Faithful,
  DropInverseTerm,  // negative control: omits the trailing -Σ⁻¹
};

/// Empirical means of G̃ and g̃ over n_batches independent batches against
/// H - Σ⁻¹ and Σ∇f(μ); pass iff every entry's |z| < 4.
SuiteReport unbiasedness_suite(const Problem& quadratic, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv,
                               double alpha, int b, long n_batches, RngStream& rng,
                               SigmaEstimatorVariant variant = SigmaEstimatorVariant::Faithful);

/// Closed form E‖G̃‖² = (39/2)H² - 2Σ⁻¹H + (Σ⁻¹)² for d = b = 1.
double variance_floor_closed_form(double hessian, double sigma_inv);

/// d = b = 1 empirical mean of ‖G̃‖² against the closed form, ±10%.
SuiteReport variance_floor_check(long n_samples, RngStream& rng, double hessian = 1.0, double sigma_inv = 1.0);

/// Empirical E‖u‖^p against [d^{p/2}, (p+d)^{p/2}].
SuiteReport moments_check(Eigen::Index d, int p, long n_samples, RngStream& rng);

/// Idempotence, non-expansiveness and Frobenius minimality of the spectral
/// projection over seeded symmetric matrices with d ≤ max_dim.
SuiteReport projection_check(long n_matrices, Eigen::Index max_dim, long feasible_per_matrix, RngStream& rng,
                             double tolerance = 1e-10);

/// Finite-difference gradients of Q_α on a quadratic against
/// (α²/2)(H - Σ⁻¹) and ∇f(μ).
SuiteReport fd_check(const Problem& quadratic, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv, double alpha,
                     double h, RngStream& rng);

/// Target (μ*, Π_{S'}(H)) of the constrained minimization on a quadratic.
SymMatrixd characterized_sigma_inv_target(const Problem& quadratic, const SpectralBandd& band);

/// Distance of a finished run from (μ*, Π_{S'}(H)).
SuiteReport minimizer_characterization_check(const Problem& quadratic, const SpectralBandd& band, double alpha,
                                             const SearchState& final_state, double mu_tolerance = 1e-3,
                                             double sigma_rel_tolerance = 0.1);

nlohmann::json to_json(const TheoryConstants& constants);

}  // namespace mines
