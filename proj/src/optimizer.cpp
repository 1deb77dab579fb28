#include "mines/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "mines/estimators.hpp"
#include "mines/geometry.hpp"
#include "mines/sampling.hpp"

namespace mines {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

bool uses_theory_eta1(const MinesConfig& config) {
  return std::holds_alternative<TheoryGlobal>(config.eta1) || std::holds_alternative<TheoryLocal>(config.eta1);
}

double fd_step(const Eigen::VectorXd& x) { return 1e-4 * std::max(1.0, x.norm()); }

// Covariance Σ from the cached decomposition of Σ⁻¹.
SymMatrixd covariance_of(const SymMatrixd& sigma_inv) {
  const EigenPair<double> eig = sigma_inv.eig();
  return sym_from_eigen<double>(eig.vectors, eig.values.cwiseInverse());
}

// Extreme eigenvalues of Σ^{1/2} H Σ^{1/2}.
LocalEstimates spectral_estimates(const SymMatrixd& sigma_inv, const SymMatrixd& hessian) {
  const Eigen::MatrixXd root = matrix_sqrt_from_inverse(sigma_inv).sqrt.matrix();
  const Eigen::VectorXd values = SymMatrixd(root * hessian.matrix() * root).eigenvalues();
  return {values(0), values(values.size() - 1)};
}

LocalEstimates estimate_local(const SearchState& state, const Problem& problem, ScheduleState& schedule,
                              const MinesConfig& config) {
  switch (config.local_estimate) {
    case LocalEstimate::TheoremBound: {
      const Oracle& oracle = problem.oracle(Verification{});
      const SmoothnessSpec& spec = *schedule.smoothness;
      const double tau = config.band.tau;
      const double zeta = config.band.zeta;
      const double gap = std::max(0.0, problem.monitor(state.mu) - oracle.min_value);
      const SymMatrixd hessian = oracle.hessian(state.mu);
      const double clip_err = hessian.frobenius_distance(project_spectral_band(hessian, config.band).matrix);
      const double c_term = schedule.theorem_C ? std::sqrt(*schedule.theorem_C / static_cast<double>(state.k))
                                               : std::numeric_limits<double>::infinity();
      const double spread = (c_term + spec.gamma * std::sqrt(2.0 * gap / spec.sigma_sc) + clip_err) / tau;
      return {std::min(spec.L / tau, 1.0 + spread), std::max(spec.sigma_sc / zeta, 1.0 - spread)};
    }
    case LocalEstimate::OracleSpectral:
      return spectral_estimates(state.sigma_inv, problem.oracle(Verification{}).hessian(state.mu));
    case LocalEstimate::FiniteDifference: {
      const bool stale = !schedule.hessian_estimate ||
                         state.k - schedule.hessian_estimated_at >= static_cast<long>(config.hessian_refresh);
      if (stale) {
        const std::uint64_t before = problem.queries();
        const SymMatrixd raw = finite_difference_hessian(problem, state.mu, fd_step(state.mu));
        schedule.aux_queries += problem.queries() - before;
        schedule.hessian_estimate = project_spectral_band(raw, config.band).matrix;
        schedule.hessian_estimated_at = state.k;
      }
      return spectral_estimates(state.sigma_inv, *schedule.hessian_estimate);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown local estimate mode");
}

bool oracle_dependent(const MinesConfig& config) {
  return config.switch_mode == SwitchMode::OracleExact || config.local_estimate != LocalEstimate::FiniteDifference;
}

}  // namespace

const char* to_string(Algo algo) {
  switch (algo) {
    case Algo::Mines:
      return "mines";
    case Algo::VanillaNes:
      return "nes";
    case Algo::RgfIdentity:
      return "rgf";
  }
  return "unknown";
}

std::optional<Algo> parse_algo(const std::string& name) {
  if (name == "mines") return Algo::Mines;
  if (name == "nes" || name == "vanilla_nes") return Algo::VanillaNes;
  if (name == "rgf") return Algo::RgfIdentity;
  return std::nullopt;
}

SymMatrixd finite_difference_hessian(const Problem& problem, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const Eigen::Index d = x.size();
  const double f0 = problem(x);
  Eigen::VectorXd plus(d);
  Eigen::MatrixXd hessian(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd z = x;
    z(i) += h;
    plus(i) = problem(z);
    z(i) = x(i) - h;
    const double minus = problem(z);
    hessian(i, i) = (plus(i) - 2.0 * f0 + minus) / (h * h);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Eigen::VectorXd z = x;
      z(i) += h;
      z(j) += h;
      hessian(i, j) = (problem(z) - plus(i) - plus(j) + f0) / (h * h);
      hessian(j, i) = hessian(i, j);
    }
  }
  return SymMatrixd(hessian);
}

bool local_region_condition(double f_gap, const SmoothnessSpec& spec, const SpectralBandd& band,
                            const LocalEstimates& estimates) {
  if (spec.gamma == 0.0) return f_gap <= std::numeric_limits<double>::infinity();
  const double g2 = spec.gamma * spec.gamma;
  const double tau = band.tau;
  const double l4 = std::pow(estimates.L_script, 4);
  const double first = 72.0 * l4 * std::pow(tau, 4) / (spec.L * g2);
  const double denom = spec.L / tau + 2.0 * estimates.xi;
  const double second = estimates.xi * estimates.xi * std::pow(spec.sigma_sc, 3) / (8.0 * g2 * denom * denom);
  return f_gap <= std::min(first, second);
}

ScheduleState init_schedule(const Problem& problem, const SearchState& initial, const MinesConfig& config) {
  ScheduleState schedule;
  const Eigen::Index d = problem.dim();
  schedule.constants = batch_constants(d, config.batch, config.delta);

  if (oracle_dependent(config) && !problem.has_oracle()) {
    throw Error(ErrorKind::TheoryModeNeedsOracle,
                "oracle switch or local-estimate mode selected for a problem without an oracle");
  }

  if (config.smoothness) {
    schedule.smoothness = config.smoothness;
  } else if (problem.has_oracle() && oracle_dependent(config)) {
    schedule.smoothness = problem.oracle(Verification{}).smoothness;
  } else if (uses_theory_eta1(config)) {
    if (config.local_estimate != LocalEstimate::FiniteDifference) {
      throw Error(ErrorKind::TheoryModeNeedsOracle, "theory step sizes need L: set smoothness or use an oracle");
    }
    // Black box: L and σ from the extreme eigenvalues of a finite-difference Hessian at μ₁.
    const std::uint64_t before = problem.queries();
    const SymMatrixd raw = finite_difference_hessian(problem, initial.mu, fd_step(initial.mu));
    schedule.aux_queries += problem.queries() - before;
    const Eigen::VectorXd values = raw.eigenvalues();
    const double top = std::max(values(0), std::numeric_limits<double>::min());
    schedule.smoothness = SmoothnessSpec{top, std::clamp(values(values.size() - 1), 1e-12 * top, top), 0.0};
    schedule.hessian_estimate = project_spectral_band(raw, config.band).matrix;
    schedule.hessian_estimated_at = initial.k;
  }

  if (config.local_estimate == LocalEstimate::TheoremBound) {
    const Oracle& oracle = problem.oracle(Verification{});
    const double gap = problem.monitor(initial.mu) - oracle.min_value;
    const SymMatrixd target = project_spectral_band(oracle.hessian(oracle.minimizer), config.band).matrix;
    const double sigma1_err = initial.sigma_inv.frobenius_distance(target);
    schedule.theorem_C =
        compute_constants(*schedule.smoothness, config, d, std::max(config.max_iters, 1L), gap, sigma1_err)
            .constants.C;
  }
  return schedule_update(std::move(schedule), initial, problem, config);
}

bool switch_condition(const SearchState& state, const Problem& problem, const ScheduleState& schedule,
                      const MinesConfig& config) {
  if (config.switch_mode == SwitchMode::OracleExact) {
    const Oracle& oracle = problem.oracle(Verification{});
    if (!schedule.smoothness) throw Error(ErrorKind::OracleRequired, "exact switch needs smoothness constants");
    ScheduleState scratch = schedule;
    const LocalEstimates estimates =
        schedule.local_estimates ? *schedule.local_estimates : estimate_local(state, problem, scratch, config);
    const double gap = problem.monitor(state.mu) - oracle.min_value;
    return local_region_condition(gap, *schedule.smoothness, config.band, estimates);
  }
  const auto window = static_cast<std::size_t>(config.switch_window);
  if (schedule.recent_sigma_inv.size() <= window) return false;
  const SymMatrixd& oldest = schedule.recent_sigma_inv.front();
  const double scale = oldest.matrix().norm();
  return schedule.recent_sigma_inv.back().frobenius_distance(oldest) < config.switch_tolerance * scale;
}

ScheduleState schedule_update(ScheduleState schedule, const SearchState& state, const Problem& problem,
                              const MinesConfig& config) {
  schedule.recent_sigma_inv.emplace_back(state.sigma_inv.matrix());
  while (schedule.recent_sigma_inv.size() > static_cast<std::size_t>(config.switch_window) + 1) {
    schedule.recent_sigma_inv.pop_front();
  }

  const bool two_stage = std::holds_alternative<TheoryLocal>(config.eta1);
  schedule.local_estimates.reset();
  if (two_stage && (schedule.stage == Stage::Local || config.switch_mode == SwitchMode::OracleExact)) {
    schedule.local_estimates = estimate_local(state, problem, schedule, config);
  }
  if (two_stage && schedule.stage == Stage::Global && switch_condition(state, problem, schedule, config)) {
    schedule.stage = Stage::Local;
    schedule.switch_iteration = state.k;
    if (!schedule.local_estimates) schedule.local_estimates = estimate_local(state, problem, schedule, config);
  }

  const double b = static_cast<double>(config.batch);
  const double c1 = schedule.constants.c1;
  schedule.eta1_k = std::visit(
      Overloaded{
          [&](const TheoryGlobal&) { return b * config.band.tau / (4.0 * schedule.smoothness->L * c1); },
          [&](const TheoryLocal&) {
            if (schedule.stage == Stage::Local) return b / (4.0 * schedule.local_estimates->L_script * c1);
            return b * config.band.tau / (4.0 * schedule.smoothness->L * c1);
          },
          [](const ConstantStep& s) { return s.value; },
          [&](const CustomStep& s) { return s.rule(state); },
      },
      config.eta1);
  schedule.eta2_k = std::visit(Overloaded{
                                   [&](const InverseK&) { return 1.0 / static_cast<double>(state.k); },
                                   [](const ConstantStep& s) { return s.value; },
                               },
                               config.eta2);
  return schedule;
}

SearchState mines_step(const SearchState& state, const Problem& problem, const MinesConfig& config,
                       const ScheduleState& schedule, RngStream& rng) {
  const MatrixRoots<double> roots = matrix_sqrt_from_inverse(state.sigma_inv);
  const AntitheticBatch batch = draw_antithetic_batch(problem, state.mu, roots, config.alpha, config.batch, rng);
  require_finite(batch);
  const MuGradEstimate g = mu_gradient_estimate(batch, config.alpha);
  const SigmaGradEstimate big_g = sigma_gradient_estimate(batch, state.sigma_inv, roots.inv_sqrt, config.alpha);

  SearchState next;
  next.mu = state.mu - schedule.eta1_k * g.vector;
  next.sigma_inv = mirror_step(state.sigma_inv, big_g.matrix, schedule.eta2_k, config.band).matrix;
  if (!band_contains(config.band, next.sigma_inv)) {
    throw Error(ErrorKind::NonFiniteValue, "inverse covariance left the spectral band");
  }
  next.k = state.k + 1;
  next.stage = schedule.stage;
  next.evals = state.evals + static_cast<std::uint64_t>(2 * config.batch + 1);
  return next;
}

SearchState mines_step_exact(const SearchState& state, const Problem& problem, const MinesConfig& config,
                             const ScheduleState& schedule) {
  const Oracle& oracle = problem.oracle(Verification{});
  const Eigen::VectorXd g = covariance_of(state.sigma_inv).matrix() * oracle.grad(state.mu);
  const SymMatrixd big_g(oracle.hessian(state.mu).matrix() - state.sigma_inv.matrix());

  SearchState next;
  next.mu = state.mu - schedule.eta1_k * g;
  next.sigma_inv = mirror_step(state.sigma_inv, big_g, schedule.eta2_k, config.band).matrix;
  next.k = state.k + 1;
  next.stage = schedule.stage;
  next.evals = state.evals;
  return next;
}

SearchState rgf_baseline_step(const SearchState& state, const Problem& problem, double eta, double alpha, int b,
                              RngStream& rng) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (b < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
  const Eigen::Index d = state.mu.size();
  Eigen::MatrixXd directions(d, b);
  for (int i = 0; i < b; ++i) directions.col(i) = standard_normal_vector(rng, d);
  Eigen::VectorXd weights(b);
  for (int i = 0; i < b; ++i) {
    const double plus = problem(state.mu + alpha * directions.col(i));
    const double minus = problem(state.mu - alpha * directions.col(i));
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw Error(ErrorKind::NonFiniteValue, "query at antithetic pair " + std::to_string(i) + " is not finite");
    }
    weights(i) = (plus - minus) / (2.0 * alpha);
  }
  SearchState next = state;
  next.mu = state.mu - eta * (directions * weights) / static_cast<double>(b);
  next.k = state.k + 1;
  next.evals = state.evals + static_cast<std::uint64_t>(2 * b);
  return next;
}

NesState nes_baseline_step(const NesState& state, const Problem& problem, double eta, int b, RngStream& rng) {
  if (b < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
  const Eigen::Index d = state.mu.size();
  const EigenPair<double> eig = state.covariance.eig();
  if (!(eig.values.minCoeff() > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "NES covariance is not positive definite");
  }
  const Eigen::MatrixXd root = eig.vectors * eig.values.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
  const Eigen::MatrixXd& cov = state.covariance.matrix();

  Eigen::VectorXd mu_step = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov_step = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < b; ++i) {
    const Eigen::VectorXd z = root * standard_normal_vector(rng, d);
    const double value = problem(state.mu + z);
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::NonFiniteValue, "NES query " + std::to_string(i) + " is not finite");
    }
    mu_step += value * z;
    cov_step += value * (z * z.transpose() - cov);
  }
  const double scale = eta / static_cast<double>(b);

  NesState next = state;
  next.mu = state.mu - scale * mu_step;
  SymMatrixd updated(cov - scale * cov_step);
  const EigenPair<double> updated_eig = updated.eig();
  if (updated_eig.values.minCoeff() < 1e-10) {
    updated = sym_from_eigen<double>(updated_eig.vectors, updated_eig.values.cwiseMax(1e-10));
    ++next.repairs;
  }
  next.covariance = updated.decomposed();
  next.k = state.k + 1;
  next.evals = state.evals + static_cast<std::uint64_t>(b);
  return next;
}

std::uint64_t queries_per_iteration(Algo algo, int b) {
  const auto bb = static_cast<std::uint64_t>(b);
  switch (algo) {
    case Algo::Mines:
      return 2 * bb + 1;
    case Algo::RgfIdentity:
      return 2 * bb;
    case Algo::VanillaNes:
      return bb;
  }
  return 0;
}

RunTrace run(Algo algo, const Problem& problem, const MinesConfig& config, RngStream& rng) {
  config.validate();
  const Eigen::Index d = problem.dim();
  const Eigen::VectorXd mu0 = config.initial_mu.size() == 0 ? Eigen::VectorXd::Zero(d) : config.initial_mu;
  if (mu0.size() != d) throw Error(ErrorKind::DimensionMismatch, "initial_mu length differs from problem dimension");
  if (config.exact_expectation && algo == Algo::Mines && !problem.has_oracle()) {
    throw Error(ErrorKind::OracleRequired, "exact-expectation mode needs an oracle");
  }

  RunTrace trace;
  trace.algo = algo;
  SearchState state{mu0, initial_sigma_inv(d, config.band), 1, Stage::Global, 0};

  std::optional<double> f_star;
  std::optional<SymMatrixd> sigma_target;
  if (problem.has_oracle()) {
    const Oracle& oracle = problem.oracle(Verification{});
    f_star = oracle.min_value;
    if (algo == Algo::Mines) {
      sigma_target = project_spectral_band(oracle.hessian(oracle.minimizer), config.band).matrix;
    }
  }

  double baseline_eta = 0.0;
  std::optional<NesState> nes;
  ScheduleState schedule;
  if (algo == Algo::Mines) {
    schedule = init_schedule(problem, state, config);
  } else {
    const auto* step = std::get_if<ConstantStep>(&config.eta1);
    if (!step) throw Error(ErrorKind::InvalidArgument, "baselines need a constant eta1");
    baseline_eta = step->value;
    if (algo == Algo::VanillaNes) {
      const SymMatrixd cov(config.alpha * config.alpha * covariance_of(state.sigma_inv).matrix());
      nes = NesState{mu0, cov.decomposed(), 1, 0, 0};
    }
  }

  const auto start = std::chrono::steady_clock::now();
  auto current_mu = [&]() -> const Eigen::VectorXd& { return nes ? nes->mu : state.mu; };
  auto total_evals = [&]() { return (nes ? nes->evals : state.evals) + schedule.aux_queries; };
  auto make_row = [&](long k, std::optional<double> eta1, std::optional<double> eta2, Stage stage) {
    TraceRow row;
    row.k = k;
    row.n_evals = total_evals();
    row.f_value = problem.monitor(current_mu());
    if (f_star) row.f_gap = row.f_value - *f_star;
    if (sigma_target) row.sigma_err_fro = state.sigma_inv.frobenius_distance(*sigma_target);
    row.eta1 = eta1;
    row.eta2 = eta2;
    row.stage = stage;
    if (config.record_wall_clock) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return row;
  };

  trace.rows.push_back(make_row(0, std::nullopt, std::nullopt, Stage::Global));
  const std::uint64_t per_iteration = queries_per_iteration(algo, config.batch);
  long completed = 0;
  bool last_recorded = true;
  double last_eta1 = 0.0;
  double last_eta2 = 0.0;
  Stage last_stage = Stage::Global;

  for (long it = 1; it <= config.max_iters; ++it) {
    if (config.max_evals && !config.exact_expectation && total_evals() + per_iteration > *config.max_evals) {
      trace.stopped_early = true;
      break;
    }
    try {
      if (algo == Algo::Mines) {
        if (it > 1) schedule = schedule_update(std::move(schedule), state, problem, config);
        last_eta1 = schedule.eta1_k;
        last_eta2 = schedule.eta2_k;
        last_stage = schedule.stage;
        state = config.exact_expectation ? mines_step_exact(state, problem, config, schedule)
                                         : mines_step(state, problem, config, schedule, rng);
      } else if (algo == Algo::RgfIdentity) {
        last_eta1 = baseline_eta;
        state = rgf_baseline_step(state, problem, baseline_eta, config.alpha, config.batch, rng);
      } else {
        last_eta1 = baseline_eta;
        nes = nes_baseline_step(*nes, problem, baseline_eta, config.batch, rng);
      }
    } catch (const Error& e) {
      trace.error = e.what();
      break;
    }
    completed = it;
    last_recorded = false;
    const std::optional<double> eta2 = algo == Algo::Mines ? std::optional<double>(last_eta2) : std::nullopt;
    if (it % config.trace_stride == 0 || it == config.max_iters) {
      trace.rows.push_back(make_row(it, last_eta1, eta2, last_stage));
      last_recorded = true;
    }
    if (config.target_gap && f_star && problem.monitor(current_mu()) - *f_star < *config.target_gap) {
      trace.stopped_early = true;
      break;
    }
  }
  if (!last_recorded) {
    const std::optional<double> eta2 = algo == Algo::Mines ? std::optional<double>(last_eta2) : std::nullopt;
    trace.rows.push_back(make_row(completed, last_eta1, eta2, last_stage));
  }

  trace.switch_iteration = schedule.switch_iteration;
  trace.final_state = state;
  trace.final_nes = nes;
  trace.aux_queries = schedule.aux_queries;
  return trace;
}

}  // namespace mines
