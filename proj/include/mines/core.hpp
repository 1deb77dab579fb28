#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "mines/sym_matrix.hpp"

namespace mines {

enum class Stage { Global, Local };

constexpr const char* to_string(Stage stage) { return stage == Stage::Global ? "global" : "local"; }

/// Regularity constants of the objective: gradient Lipschitz L, strong
/// convexity sigma, Hessian Lipschitz gamma.
struct SmoothnessSpec {
  double L = 1.0;
  double sigma_sc = 1.0;
  double gamma = 0.0;

  void validate() const;
};

/// θ = (μ, Σ⁻¹) plus bookkeeping. sigma_inv always carries its
/// eigendecomposition after an accepted step.
struct SearchState {
  Eigen::VectorXd mu;
  SymMatrixd sigma_inv;
  long k = 1;
  Stage stage = Stage::Global;
  std::uint64_t evals = 0;
};

// Step-size schedules for the mean update.
struct TheoryGlobal {};  // η₁ = bτ/(4L c₁) throughout
struct TheoryLocal {};   // two stages: bτ/(4L c₁), then b/(4 𝓛_k c₁) after the switch
struct ConstantStep {
  double value;
};
struct CustomStep {
  std::function<double(const SearchState&)> rule;
};
using Eta1Schedule = std::variant<TheoryGlobal, TheoryLocal, ConstantStep, CustomStep>;

// Step-size schedules for the inverse-covariance update.
struct InverseK {};  // η₂ = 1/k
using Eta2Schedule = std::variant<InverseK, ConstantStep>;

/// How the Global → Local transition is decided.
enum class SwitchMode {
  OracleExact,  // the local-region condition on f(μ_k) - f*, needs the oracle
  Heuristic,    // Σ⁻¹ relative change over a 50-iteration window below 10%
};

/// How 𝓛_k and ξ_k are obtained in the Local stage.
enum class LocalEstimate {
  TheoremBound,      // closed-form high-probability bounds with constant C (oracle)
  OracleSpectral,    // extreme eigenvalues of Σ^{1/2} ∇²f(μ_k) Σ^{1/2} (oracle)
  FiniteDifference,  // same, with a projected finite-difference Hessian (black box)
};

struct MinesConfig {
  double alpha = 1e-3;
  int batch = 1;
  SpectralBandd band{1e-4, 1e4};
  Eta1Schedule eta1 = TheoryLocal{};
  Eta2Schedule eta2 = InverseK{};
  long max_iters = 1000;
  std::uint64_t seed = 0;
  double delta = 0.05;
  Eigen::VectorXd initial_mu;  // μ₁; empty means the origin

  SwitchMode switch_mode = SwitchMode::Heuristic;
  LocalEstimate local_estimate = LocalEstimate::FiniteDifference;
  int hessian_refresh = 100;  // iterations between finite-difference Hessian refreshes
  int switch_window = 50;
  double switch_tolerance = 0.1;

  /// Known regularity constants; when absent the oracle's (verification runs)
  /// or finite-difference estimates are used.
  std::optional<SmoothnessSpec> smoothness;

  long trace_stride = 1;
  std::optional<double> target_gap;       // early stop on f_gap (oracle)
  std::optional<std::uint64_t> max_evals;  // stop before exceeding this many queries
  bool exact_expectation = false;          // replace estimators by their means (quadratics, oracle)
  bool record_wall_clock = false;

  void validate() const;
};

/// Defaults: b = d, α = 1e-3, band (σ/2, 2L) and η₁ = 0.25/L when the
/// smoothness is known; otherwise band (1e-4, 1e4) and the two-stage schedule
/// with finite-difference local estimates.
MinesConfig default_config(Eigen::Index d, const std::optional<SmoothnessSpec>& smoothness = std::nullopt);

/// Σ₁⁻¹ = clip(I, band).
SymMatrixd initial_sigma_inv(Eigen::Index d, const SpectralBandd& band);

std::string describe(const Eta1Schedule& schedule);
std::string describe(const Eta2Schedule& schedule);

}  // namespace mines
