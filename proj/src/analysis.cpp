#include "mines/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/QR>

#include "mines/estimators.hpp"
#include "mines/geometry.hpp"
#include "mines/sampling.hpp"

namespace mines {

namespace {

RateFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate fit needs at least two distinct k");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

void check_fit_input(std::span<const double> ks, std::span<const double> values) {
  if (ks.size() != values.size()) throw Error(ErrorKind::DimensionMismatch, "k and value series differ in length");
  if (ks.size() < 2) throw Error(ErrorKind::InvalidArgument, "rate fit needs at least two points");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) {
      throw Error(ErrorKind::NonPositiveValue, "value at k = " + std::to_string(ks[i]) + " is not positive");
    }
  }
}

std::pair<std::vector<double>, std::vector<double>> window_series(const RunTrace& trace, TraceColumn column,
                                                                  long k_start, long k_end) {
  if (!(k_start < k_end)) throw Error(ErrorKind::InvalidArgument, "fit window needs k_start < k_end");
  std::vector<double> ks;
  std::vector<double> values;
  for (const TraceRow& row : trace.rows) {
    if (row.k < k_start || row.k > k_end) continue;
    const std::optional<double> value =
        column == TraceColumn::FGap
            ? row.f_gap
            : (row.sigma_err_fro ? std::optional<double>(*row.sigma_err_fro * *row.sigma_err_fro) : std::nullopt);
    if (!value) throw Error(ErrorKind::OracleRequired, "trace column is NA at k = " + std::to_string(row.k));
    ks.push_back(static_cast<double>(row.k));
    values.push_back(*value);
  }
  if (ks.size() < 10) {
    throw Error(ErrorKind::InvalidArgument,
                "rate fit needs at least 10 rows in the window, got " + std::to_string(ks.size()));
  }
  return {std::move(ks), std::move(values)};
}

struct Welford {
  Eigen::ArrayXd mean;
  Eigen::ArrayXd m2;
  long n = 0;

  explicit Welford(Eigen::Index size) : mean(Eigen::ArrayXd::Zero(size)), m2(Eigen::ArrayXd::Zero(size)) {}

  void add(const Eigen::ArrayXd& x) {
    ++n;
    const Eigen::ArrayXd delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  // Largest |mean - target| / standard error over all entries.
  double max_abs_z(const Eigen::ArrayXd& target) const {
    const Eigen::ArrayXd se = (m2 / static_cast<double>(n - 1) / static_cast<double>(n)).sqrt();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      const double diff = std::abs(mean(i) - target(i));
      const double z = se(i) > 0.0 ? diff / se(i) : (diff < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity());
      worst = std::max(worst, z);
    }
    return worst;
  }
};

Eigen::ArrayXd flatten(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::ArrayXd>(m.data(), m.size()); }

Eigen::MatrixXd random_rotation(RngStream& rng, Eigen::Index d) {
  Eigen::MatrixXd gaussian(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

SymMatrixd random_symmetric(RngStream& rng, Eigen::Index d, double scale) {
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = scale * rng.normal();
  }
  return SymMatrixd(g);
}

double relative_error(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& exact, double floor) {
  return (approx - exact).norm() / std::max(exact.norm(), floor);
}

}  // namespace

RateFit fit_power_law(std::span<const double> ks, std::span<const double> values) {
  check_fit_input(ks, values);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0)) throw Error(ErrorKind::NonPositiveValue, "power-law fit needs k > 0");
    x.push_back(std::log(ks[i]));
    y.push_back(std::log(values[i]));
  }
  RateFit fit = least_squares(x, y);
  fit.k_start = static_cast<long>(ks.front());
  fit.k_end = static_cast<long>(ks.back());
  return fit;
}

RateFit fit_geometric(std::span<const double> ks, std::span<const double> values) {
  check_fit_input(ks, values);
  std::vector<double> x(ks.begin(), ks.end());
  std::vector<double> y;
  for (double v : values) y.push_back(std::log(v));
  RateFit fit = least_squares(x, y);
  fit.k_start = static_cast<long>(ks.front());
  fit.k_end = static_cast<long>(ks.back());
  return fit;
}

RateFit fit_rate(const RunTrace& trace, TraceColumn column, long k_start, long k_end) {
  const auto [ks, values] = window_series(trace, column, k_start, k_end);
  return fit_power_law(ks, values);
}

RateFit fit_geometric_rate(const RunTrace& trace, TraceColumn column, long k_start, long k_end) {
  const auto [ks, values] = window_series(trace, column, k_start, k_end);
  return fit_geometric(ks, values);
}

nlohmann::json SuiteReport::to_json() const {
  return {{"suite", suite}, {"pass", pass}, {"metrics", metrics}, {"thresholds", thresholds}};
}

SuiteReport unbiasedness_suite(const Problem& quadratic, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv,
                               double alpha, int b, long n_batches, RngStream& rng, SigmaEstimatorVariant variant) {
  if (n_batches < 2) throw Error(ErrorKind::InvalidArgument, "unbiasedness suite needs at least 2 batches");
  const Oracle& oracle = quadratic.oracle(Verification{});
  const Eigen::Index d = quadratic.dim();
  const SymMatrixd s_inv = sigma_inv.decomposed();
  const MatrixRoots<double> roots = matrix_sqrt_from_inverse(s_inv);
  const Eigen::MatrixXd covariance = roots.sqrt.matrix() * roots.sqrt.matrix();

  const Eigen::MatrixXd sigma_target = oracle.hessian(mu).matrix() - s_inv.matrix();
  const Eigen::VectorXd mu_target = covariance * oracle.grad(mu);

  Welford sigma_stats(d * d);
  Welford mu_stats(d);
  for (long n = 0; n < n_batches; ++n) {
    const AntitheticBatch batch = draw_antithetic_batch(quadratic, mu, roots, alpha, b, rng);
    Eigen::MatrixXd big_g = sigma_gradient_estimate(batch, s_inv, roots.inv_sqrt, alpha).matrix.matrix();
    if (variant == SigmaEstimatorVariant::DropInverseTerm) big_g += s_inv.matrix();
    sigma_stats.add(flatten(big_g));
    mu_stats.add(mu_gradient_estimate(batch, alpha).vector.array());
  }

  const double z_sigma = sigma_stats.max_abs_z(flatten(sigma_target));
  const double z_mu = mu_stats.max_abs_z(mu_target.array());
  SuiteReport report;
  report.suite = "unbiasedness";
  report.pass = z_sigma < 4.0 && z_mu < 4.0;
  report.metrics = {{"d", d},
                    {"b", b},
                    {"alpha", alpha},
                    {"n_batches", n_batches},
                    {"max_abs_z_sigma", z_sigma},
                    {"max_abs_z_mu", z_mu},
                    {"variant", variant == SigmaEstimatorVariant::Faithful ? "faithful" : "drop_inverse_term"}};
  report.thresholds = {{"max_abs_z", 4.0}};
  return report;
}

double variance_floor_closed_form(double hessian, double sigma_inv) {
  return 19.5 * hessian * hessian - 2.0 * sigma_inv * hessian + sigma_inv * sigma_inv;
}

SuiteReport variance_floor_check(long n_samples, RngStream& rng, double hessian, double sigma_inv) {
  if (n_samples < 2) throw Error(ErrorKind::InvalidArgument, "variance floor check needs at least 2 samples");
  if (!(sigma_inv > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "sigma_inv must be positive");
  const Problem scalar("scalar_quadratic", 1, [hessian](const Eigen::VectorXd& z) {
    return 0.5 * hessian * z(0) * z(0);
  });
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
  const SymMatrixd s_inv = SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, sigma_inv)).decomposed();
  const MatrixRoots<double> roots = matrix_sqrt_from_inverse(s_inv);
  const double alpha = 1.0;

  double mean = 0.0;
  for (long n = 0; n < n_samples; ++n) {
    const AntitheticBatch batch = draw_antithetic_batch(scalar, mu, roots, alpha, 1, rng);
    const double g = sigma_gradient_estimate(batch, s_inv, roots.inv_sqrt, alpha).matrix(0, 0);
    mean += (g * g - mean) / static_cast<double>(n + 1);
  }

  const double closed = variance_floor_closed_form(hessian, sigma_inv);
  const double lower = 18.5 * hessian * hessian;
  SuiteReport report;
  report.suite = "variance_floor";
  report.pass = std::abs(mean - closed) <= 0.1 * closed && closed >= lower;
  report.metrics = {{"value", mean},           {"closed_form", closed}, {"lower_bound", lower},
                    {"hessian", hessian},      {"sigma_inv", sigma_inv}, {"n_samples", n_samples},
                    {"relative_error", std::abs(mean - closed) / closed}};
  report.thresholds = {{"relative_tolerance", 0.1}, {"low", 0.9 * closed}, {"high", 1.1 * closed}};
  return report;
}

SuiteReport moments_check(Eigen::Index d, int p, long n_samples, RngStream& rng) {
  if (d < 1 || p < 1 || n_samples < 2) throw Error(ErrorKind::InvalidArgument, "moments check needs d, p >= 1");
  double mean = 0.0;
  double m2 = 0.0;
  for (long n = 0; n < n_samples; ++n) {
    const double value = std::pow(standard_normal_vector(rng, d).norm(), p);
    const double delta = value - mean;
    mean += delta / static_cast<double>(n + 1);
    m2 += delta * (value - mean);
  }
  const double se = std::sqrt(m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));
  const double dd = static_cast<double>(d);
  const double lower = std::pow(dd, p / 2.0);
  const double upper = std::pow(static_cast<double>(p) + dd, p / 2.0);

  // The bounds hold for the expectation; for p = 2 the lower one is attained
  // (E‖u‖² = d), so the sample mean is compared with a 4 standard-error margin.
  SuiteReport report;
  report.suite = "moments";
  report.pass = mean >= lower - 4.0 * se && mean <= upper + 4.0 * se;
  report.metrics = {{"d", d},
                    {"p", p},
                    {"n_samples", n_samples},
                    {"value", mean},
                    {"std_error", se},
                    {"strictly_inside", mean >= lower && mean <= upper}};
  report.thresholds = {{"low", lower}, {"high", upper}, {"margin_std_errors", 4.0}};
  return report;
}

SuiteReport projection_check(long n_matrices, Eigen::Index max_dim, long feasible_per_matrix, RngStream& rng,
                             double tolerance) {
  if (n_matrices < 1 || max_dim < 1) throw Error(ErrorKind::InvalidArgument, "projection check needs work to do");
  double worst_idempotence = 0.0;
  double worst_expansion = -std::numeric_limits<double>::infinity();
  double worst_minimality = -std::numeric_limits<double>::infinity();
  long violations = 0;
  long clipped_cases = 0;

  for (long m = 0; m < n_matrices; ++m) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(m % max_dim);
    const double tau = 0.1 + rng.uniform();
    const SpectralBandd band(tau, tau + 3.0 * rng.uniform());
    const SymMatrixd a = random_symmetric(rng, d, 2.0);
    const SymMatrixd b = random_symmetric(rng, d, 2.0);

    const Projected<double> pa = project_spectral_band(a, band);
    if (pa.report.clipped_low + pa.report.clipped_high > 0) ++clipped_cases;
    const SymMatrixd again = project_spectral_band(SymMatrixd(pa.matrix.matrix()), band).matrix;
    const double idempotence = again.frobenius_distance(pa.matrix);
    worst_idempotence = std::max(worst_idempotence, idempotence);

    const double expansion =
        pa.matrix.frobenius_distance(project_spectral_band(b, band).matrix) - a.frobenius_distance(b);
    worst_expansion = std::max(worst_expansion, expansion);

    const double own = a.frobenius_distance(pa.matrix);
    bool minimal = true;
    for (long j = 0; j < feasible_per_matrix; ++j) {
      SymMatrixd x;
      if (j % 2 == 0) {
        Eigen::VectorXd values(d);
        for (Eigen::Index i = 0; i < d; ++i) values(i) = band.tau + (band.zeta - band.tau) * rng.uniform();
        const Eigen::MatrixXd q = random_rotation(rng, d);
        x = SymMatrixd(q * values.asDiagonal() * q.transpose());
      } else {
        // Feasible points close to Π(A) probe the optimality sharply.
        const SymMatrixd nudge = random_symmetric(rng, d, 1e-3);
        x = project_spectral_band(SymMatrixd(pa.matrix.matrix() + nudge.matrix()), band).matrix;
      }
      const double gap = own - a.frobenius_distance(x);
      worst_minimality = std::max(worst_minimality, gap);
      minimal = minimal && gap <= tolerance;
    }
    if (idempotence > tolerance || expansion > tolerance || !minimal) ++violations;
  }

  SuiteReport report;
  report.suite = "projection";
  report.pass = violations == 0;
  report.metrics = {{"n_matrices", n_matrices},
                    {"max_dim", max_dim},
                    {"feasible_per_matrix", feasible_per_matrix},
                    {"clipped_cases", clipped_cases},
                    {"violations", violations},
                    {"max_idempotence_error", worst_idempotence},
                    {"max_expansion", worst_expansion},
                    {"max_minimality_gap", worst_minimality}};
  report.thresholds = {{"tolerance", tolerance}};
  return report;
}

SuiteReport fd_check(const Problem& quadratic, const Eigen::VectorXd& mu, const SymMatrixd& sigma_inv, double alpha,
                     double h, RngStream& rng) {
  const Oracle& oracle = quadratic.oracle(Verification{});
  const QAlphaGradient fd = q_alpha_fd_gradient(quadratic, mu, sigma_inv, alpha, h, rng);
  const Eigen::MatrixXd hessian = oracle.hessian(mu).matrix();
  const Eigen::MatrixXd exact_sigma = 0.5 * alpha * alpha * (hessian - sigma_inv.matrix());
  const Eigen::VectorXd exact_mu = oracle.grad(mu);
  const double floor = alpha * alpha * hessian.norm();
  const double sigma_err = relative_error(fd.dsigma.matrix(), exact_sigma, floor);
  const double mu_err = relative_error(fd.dmu, exact_mu, hessian.norm());

  SuiteReport report;
  report.suite = "fd_check";
  report.pass = sigma_err < 1e-5 && mu_err < 1e-6;
  report.metrics = {{"d", quadratic.dim()},
                    {"alpha", alpha},
                    {"h", h},
                    {"sigma_relative_error", sigma_err},
                    {"mu_relative_error", mu_err},
                    {"dsigma_norm", fd.dsigma.matrix().norm()}};
  report.thresholds = {{"sigma_relative_error", 1e-5}, {"mu_relative_error", 1e-6}};
  return report;
}

SymMatrixd characterized_sigma_inv_target(const Problem& quadratic, const SpectralBandd& band) {
  const Oracle& oracle = quadratic.oracle(Verification{});
  return project_spectral_band(oracle.hessian(oracle.minimizer), band).matrix;
}

SuiteReport minimizer_characterization_check(const Problem& quadratic, const SpectralBandd& band, double alpha,
                                             const SearchState& final_state, double mu_tolerance,
                                             double sigma_rel_tolerance) {
  const Oracle& oracle = quadratic.oracle(Verification{});
  const SymMatrixd target = characterized_sigma_inv_target(quadratic, band);
  const double hessian_norm = oracle.hessian(oracle.minimizer).matrix().norm();
  const double mu_dist = (final_state.mu - oracle.minimizer).norm();
  const double sigma_rel = final_state.sigma_inv.frobenius_distance(target) / hessian_norm;

  SuiteReport report;
  report.suite = "minimizer_characterization";
  report.pass = mu_dist < mu_tolerance && sigma_rel < sigma_rel_tolerance;
  report.metrics = {{"alpha", alpha},
                    {"mu_distance", mu_dist},
                    {"sigma_relative_error", sigma_rel},
                    {"top_eigenvalue", final_state.sigma_inv.eigenvalues()(0)},
                    {"target_top_eigenvalue", target.eigenvalues()(0)}};
  report.thresholds = {{"mu_distance", mu_tolerance}, {"sigma_relative_error", sigma_rel_tolerance}};
  return report;
}

nlohmann::json to_json(const TheoryConstants& t) {
  auto optional_number = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto finite_or_inf = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
  };
  return {{"c1", t.c1},
          {"c2", t.c2},
          {"c3", t.c3},
          {"delta_alpha_1", t.delta_alpha_1},
          {"delta_alpha_2", t.delta_alpha_2},
          {"A_K", t.A_K},
          {"C1", t.C1},
          {"C2", optional_number(t.C2)},
          {"C3", t.C3},
          {"C4", t.C4},
          {"C", optional_number(t.C)},
          {"alpha_max", finite_or_inf(t.alpha_max)},
          {"mu_gap_bound", t.mu_gap_bound},
          {"mu_dist_bound", t.mu_dist_bound},
          {"sigma_dist_bound", t.sigma_dist_bound},
          {"sigma_star_dist_bound", t.sigma_star_dist_bound}};
}

}  // namespace mines
