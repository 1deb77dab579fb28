#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mines/core.hpp"

namespace mines {

/// c₁, c₂, c₃ of the high-probability analysis.
struct BatchConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

/// c₁ = (√d + √b + √(2 log(2/δ)))², c₂ = b - 2√(b log(1/δ)), c₃ = 2d + 3 log(1/δ).
BatchConstants batch_constants(Eigen::Index d, int b, double delta);

struct TheoryConstants {
  double c1 = 0.0;
  double c2 = 0.0;  // may be negative; the bounds are then vacuous
  double c3 = 0.0;
  double delta_alpha_1 = 0.0;  // error floor of the global-stage decrease
  double delta_alpha_2 = 0.0;  // error floor of the local-stage decrease
  double A_K = 0.0;
  double C1 = 0.0;
  std::optional<double> C2;  // needs f(μ₁) - f* and c₂ > 0 (or γ = 0)
  double C3 = 0.0;
  double C4 = 0.0;
  std::optional<double> C;  // needs C2 and ‖Σ₁⁻¹ - H*‖
  double alpha_max = 0.0;       // largest α for the Σ-closeness bound (+inf when γ = 0)
  double mu_gap_bound = 0.0;    // bound on f(μ̂*) - f(μ*)
  double mu_dist_bound = 0.0;   // bound on ‖μ* - μ̂*‖² (squared distance)
  double sigma_dist_bound = 0.0;       // bound on ‖Σ̂* - Π_S((∇²f(μ̂*))⁻¹)‖
  double sigma_star_dist_bound = 0.0;  // bound on ‖Σ* - Σ̂*‖
};

struct ConstantsReport {
  TheoryConstants constants;
  std::vector<std::string> warnings;  // "C2NotPositive", "AlphaAboveMax", ...
};

/// Transcribes every constant of the convergence analysis. f_gap_initial and
/// sigma1_err (‖Σ₁⁻¹ - H*‖_F) are only known with an oracle; without them C2
/// and C are reported as unavailable.
ConstantsReport compute_constants(const SmoothnessSpec& spec, const MinesConfig& config, Eigen::Index d, long K,
                                  std::optional<double> f_gap_initial, std::optional<double> sigma1_err);

}  // namespace mines
