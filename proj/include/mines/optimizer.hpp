#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mines/core.hpp"
#include "mines/problems.hpp"
#include "mines/rng.hpp"
#include "mines/theory.hpp"

namespace mines {

enum class Algo { Mines, VanillaNes, RgfIdentity };

const char* to_string(Algo algo);
/// Accepts "mines", "nes" / "vanilla_nes", "rgf".
std::optional<Algo> parse_algo(const std::string& name);

struct LocalEstimates {
  double L_script = 0.0;  // 𝓛_k: ∇²f(μ_k) ⪯ 𝓛_k Σ_k⁻¹
  double xi = 0.0;        // ξ_k: ξ_k Σ_k⁻¹ ⪯ ∇²f(μ_k)
};

struct ScheduleState {
  Stage stage = Stage::Global;
  double eta1_k = 0.0;
  double eta2_k = 0.0;
  BatchConstants constants;
  std::optional<LocalEstimates> local_estimates;

  std::optional<SmoothnessSpec> smoothness;  // configured, from the oracle, or estimated
  std::optional<double> theorem_C;           // C of the covariance bound (TheoremBound mode)
  std::deque<SymMatrixd> recent_sigma_inv;   // heuristic switch window, oldest first
  std::optional<SymMatrixd> hessian_estimate;
  long hessian_estimated_at = -1;
  std::uint64_t aux_queries = 0;  // finite-difference Hessian queries
  std::optional<long> switch_iteration;
};

/// Resolves constants and smoothness for a run starting from `initial`.
/// Throws TheoryModeNeedsOracle when a theory schedule has no L available.
ScheduleState init_schedule(const Problem& problem, const SearchState& initial, const MinesConfig& config);

/// Step sizes for iteration state.k. Moves Global → Local once the switch
/// condition holds (never back).
ScheduleState schedule_update(ScheduleState schedule, const SearchState& state, const Problem& problem,
                              const MinesConfig& config);

/// Whether iteration state.k is in the local region, per config.switch_mode.
bool switch_condition(const SearchState& state, const Problem& problem, const ScheduleState& schedule,
                      const MinesConfig& config);

/// The local-region test on f(μ_k) - f*; +inf right-hand side when γ = 0.
bool local_region_condition(double f_gap, const SmoothnessSpec& spec, const SpectralBandd& band,
                            const LocalEstimates& estimates);

/// Finite-difference Hessian with central second differences on the
/// diagonal and the four-point mixed difference off it: 2d + d(d-1)/2 + 1 queries.
SymMatrixd finite_difference_hessian(const Problem& problem, const Eigen::VectorXd& x, double h);

/// One MiNES iteration: one antithetic batch feeds both g̃ and G̃,
/// μ ← μ - η₁g̃, Σ⁻¹ ← Π(Σ⁻¹ + η₂G̃). Throws NonFiniteValue on NaN/∞ queries.
SearchState mines_step(const SearchState& state, const Problem& problem, const MinesConfig& config,
                       const ScheduleState& schedule, RngStream& rng);

/// Same update with g̃ and G̃ replaced by their exact means Σ∇f(μ) and
/// H - Σ⁻¹ (quadratics, oracle). No queries are issued.
SearchState mines_step_exact(const SearchState& state, const Problem& problem, const MinesConfig& config,
                             const ScheduleState& schedule);

/// Identity-covariance antithetic random gradient-free step; 2b queries.
SearchState rgf_baseline_step(const SearchState& state, const Problem& problem, double eta, double alpha, int b,
                              RngStream& rng);

struct NesState {
  Eigen::VectorXd mu;
  SymMatrixd covariance;  // Σ̄, the full search covariance
  long k = 1;
  std::uint64_t evals = 0;
  long repairs = 0;  // eigenvalue-floor repairs after losing definiteness
};

/// Vanilla NES natural-gradient step on raw f-values; b queries.
NesState nes_baseline_step(const NesState& state, const Problem& problem, double eta, int b, RngStream& rng);

struct TraceRow {
  long k = 0;
  std::uint64_t n_evals = 0;
  double f_value = 0.0;
  std::optional<double> f_gap;
  std::optional<double> sigma_err_fro;
  std::optional<double> eta1;
  std::optional<double> eta2;
  Stage stage = Stage::Global;
  std::optional<double> wall_ms;
};

struct RunTrace {
  Algo algo = Algo::Mines;
  std::vector<TraceRow> rows;
  std::optional<long> switch_iteration;
  std::optional<std::string> error;  // set when a step failed; rows up to the failure are kept
  bool stopped_early = false;
  SearchState final_state;
  std::optional<NesState> final_nes;
  std::uint64_t aux_queries = 0;
};

/// Queries per iteration (excluding finite-difference Hessian refreshes).
std::uint64_t queries_per_iteration(Algo algo, int b);

/// Runs config.max_iters iterations (fewer on early stop or budget exhaustion).
/// Oracle columns are filled when the problem has an oracle. Step errors are
/// caught and recorded in RunTrace::error. Baselines take their step size from
/// a ConstantStep eta1.
RunTrace run(Algo algo, const Problem& problem, const MinesConfig& config, RngStream& rng);

}  // namespace mines
