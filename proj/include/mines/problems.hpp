#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mines/core.hpp"
#include "mines/sym_matrix.hpp"

namespace mines {

/// Exact derivative information for verification only. Optimizer code paths
/// never see it; access goes through Problem::oracle(Verification{}).
struct Oracle {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<SymMatrixd(const Eigen::VectorXd&)> hessian;
  Eigen::VectorXd minimizer;
  double min_value = 0.0;
  SmoothnessSpec smoothness;
  bool quadratic = false;
};

/// Tag that marks a call site as verification/diagnostic code.
struct Verification {
  explicit Verification() = default;
};

/// Black-box objective with a thread-safe query counter.
class Problem {
 public:
  using Objective = std::function<double(const Eigen::VectorXd&)>;

  Problem(std::string name, Eigen::Index dim, Objective objective, std::optional<Oracle> oracle = std::nullopt);
  Problem(const Problem& other);
  Problem& operator=(const Problem& other);

  /// Counted evaluation; the only entry point optimizers use.
  double operator()(const Eigen::VectorXd& z) const;

  /// Uncounted evaluation for trace recording and reports.
  double monitor(const Eigen::VectorXd& z) const { return objective_(z); }

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }
  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }
  void reset_queries() const { queries_.store(0, std::memory_order_relaxed); }

  bool has_oracle() const { return oracle_.has_value(); }
  /// Throws OracleRequired when the problem has no oracle.
  const Oracle& oracle(Verification) const;

 private:
  std::string name_;
  Eigen::Index dim_;
  Objective objective_;
  std::optional<Oracle> oracle_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

struct QuadraticSpec {
  Eigen::VectorXd eigenvalues;                // spectrum of H
  std::optional<std::uint64_t> rotation_seed;  // nullopt: identity rotation
  Eigen::VectorXd shift;                      // μ*; empty means the origin
  double offset = 0.0;                        // f*
};

/// f(z) = f* + ½(z-μ*)ᵀH(z-μ*) with H = Qᵀdiag(λ)Q for a seeded rotation Q.
Problem make_quadratic(const QuadraticSpec& spec);

/// Log-spaced spectrum in [1, kappa], μ* = (1,…,1).
Problem make_quadratic_log_spaced(Eigen::Index d, double kappa, std::uint64_t rotation_seed);

/// Seeded Haar-like rotation: QR of a Gaussian matrix with R's diagonal made positive.
Eigen::MatrixXd seeded_rotation(Eigen::Index d, std::uint64_t seed);

/// f(w) = (1/n)Σ log(1+exp(-yᵢxᵢᵀw)) + (λ/2)‖w‖².
///
/// Smoothness: L = λ_max(XᵀX/(4n)) + λ, σ = λ. γ is not computed exactly; it
/// is the upper bound (1/(6√3 n))Σ‖xᵢ‖³ that follows from |ℓ'''| ≤ 1/(6√3)
/// for the logistic loss ℓ(t) = log(1+e^{-t}).
Problem make_logreg(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, double reg);

/// f(z) = temp·log Σ exp(aᵢᵀz/temp) + (reg/2)‖z‖².
Problem make_logsumexp(const Eigen::MatrixXd& anchors, double temp, double reg);

struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
};

/// Header-free CSV, one sample per row, last column the label in {-1,+1}
/// (or {0,1}, remapped to {-1,+1}).
Dataset load_csv_dataset(const std::string& path);
void write_csv_dataset(const std::string& path, const Dataset& data);

/// Seeded linearly separable-ish synthetic data for examples and tests.
Dataset synthetic_dataset(Eigen::Index n, Eigen::Index d, std::uint64_t seed);

}  // namespace mines
