#include "mines/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mines {

BatchConstants batch_constants(Eigen::Index d, int b, double delta) {
  if (d < 1 || b < 1) throw Error(ErrorKind::InvalidArgument, "d and b must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
  const double dd = static_cast<double>(d);
  const double bb = static_cast<double>(b);
  const double root_sum = std::sqrt(dd) + std::sqrt(bb) + std::sqrt(2.0 * std::log(2.0 / delta));
  return {root_sum * root_sum, bb - 2.0 * std::sqrt(bb * std::log(1.0 / delta)), 2.0 * dd + 3.0 * std::log(1.0 / delta)};
}

ConstantsReport compute_constants(const SmoothnessSpec& spec, const MinesConfig& config, Eigen::Index d, long K,
                                  std::optional<double> f_gap_initial, std::optional<double> sigma1_err) {
  spec.validate();
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "K must be >= 1");
  if (!(config.alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be non-negative");

  const double L = spec.L;
  const double sigma = spec.sigma_sc;
  const double gamma = spec.gamma;
  const double alpha = config.alpha;
  const double tau = config.band.tau;
  const double zeta = config.band.zeta;
  const double delta = config.delta;
  const double dd = static_cast<double>(d);
  const double b = static_cast<double>(config.batch);
  const double kk = static_cast<double>(K);

  ConstantsReport report;
  TheoryConstants& t = report.constants;
  const BatchConstants bc = batch_constants(d, config.batch, delta);
  t.c1 = bc.c1;
  t.c2 = bc.c2;
  t.c3 = bc.c3;
  const double c1 = t.c1;
  const double c2 = t.c2;
  const double c3 = t.c3;
  if (c2 <= 0.0) report.warnings.emplace_back("C2NotPositive");

  const double a2 = alpha * alpha;
  const double a4 = a2 * a2;
  const double tau3 = tau * tau * tau;

  t.delta_alpha_1 = std::pow(c3, 3) * gamma * b * a4 / (32.0 * 9.0 * c1 * L * zeta * tau3) *
                    (1.0 + c1 * c3 / (2.0 * tau * zeta));

  t.delta_alpha_2 = std::pow(b, 1.5) * std::pow(zeta, 3) * std::pow(gamma, 4) * std::pow(c3, 6) * a4 * a2 /
                        (256.0 * 81.0 * std::pow(sigma, 3) * std::pow(c1, 3) * std::pow(tau, 6)) +
                    b * zeta * gamma * gamma * std::pow(c3, 4) * a4 / (32.0 * 9.0 * sigma * tau3 * c1 * c1) +
                    b * gamma * std::pow(c3, 3) * a4 / (32.0 * 9.0 * tau3 * c1);

  t.A_K = 8.0 * std::log(1.0 / (b * delta)) + 16.0 * std::log(kk + 1.0) + dd;
  t.C1 = t.A_K * L * (zeta * t.A_K + dd * zeta) / tau * std::sqrt((2.0 / b) * std::log(kk * kk / delta));

  if (gamma == 0.0) {
    t.C2 = 0.0;
  } else if (f_gap_initial && c2 > 0.0) {
    const double floor = std::max(t.delta_alpha_1, t.delta_alpha_2);
    t.C2 = std::sqrt(32.0 * c1 * L * zeta * gamma * gamma / (c2 * tau * sigma * sigma) *
                     (*f_gap_initial + (kk - 1.0) * floor));
  }

  t.C3 = std::pow(c3, 1.5) * (c3 + 1.0) * zeta * gamma * std::sqrt(kk - 1.0) /
         (4.0 * std::pow(tau, 1.5) * std::sqrt(dd)) * alpha;

  const double spread = c3 * zeta + std::sqrt(dd) * zeta;
  t.C4 = 2.0 * L * L * c3 * c3 * spread * spread / (b * tau * tau) + dd * zeta * zeta / (2.0 * b);

  if (t.C2 && sigma1_err) {
    const double sum = t.C1 + *t.C2 + t.C3;
    t.C = std::max({9.0 * sum * sum / 4.0 + 3.0 * t.C4, 2.0 * t.C4 + L * L / b, *sigma1_err * *sigma1_err});
  }

  const double moment_sum = std::pow(dd + 5.0, 2.5) + dd * std::pow(dd + 3.0, 1.5);
  t.alpha_max = gamma == 0.0 ? std::numeric_limits<double>::infinity()
                             : 3.0 * std::pow(tau, 1.5) * sigma / (gamma * zeta) / moment_sum;
  if (alpha > t.alpha_max) report.warnings.emplace_back("AlphaAboveMax");

  const double a3 = a2 * alpha;
  const double d3 = std::pow(dd + 3.0, 1.5);
  const double band_gap = 1.0 / tau - 1.0 / zeta;
  t.mu_gap_bound = dd * L * a2 / tau + gamma * a3 * d3 / (3.0 * std::pow(tau, 1.5)) + dd * a2 / 2.0 * band_gap;
  t.mu_dist_bound = 2.0 * dd * L * a2 / (sigma * tau) + 2.0 * gamma * a3 * d3 / (3.0 * sigma * std::pow(tau, 1.5)) +
                    dd * a2 / sigma * band_gap;
  t.sigma_dist_bound = alpha * gamma * zeta / (3.0 * std::pow(tau, 1.5) * sigma * sigma) * moment_sum;
  t.sigma_star_dist_bound = 2.0 * t.sigma_dist_bound + gamma / (sigma * sigma) * std::sqrt(t.mu_dist_bound);
  return report;
}

}  // namespace mines
