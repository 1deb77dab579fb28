// Acceptance suite: prints one PASS/FAIL line per criterion AC-1..AC-10 and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/commands.hpp"
#include "mines/analysis.hpp"
#include "mines/geometry.hpp"
#include "mines/optimizer.hpp"
#include "mines/problems.hpp"

namespace fs = std::filesystem;
using namespace mines;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, format, value);
  return buffer;
}

// Inverse covariance with a seeded eigenbasis and eigenvalues uniform in the band.
SymMatrixd random_in_band(Eigen::Index d, const SpectralBandd& band, RngStream& rng) {
  const Eigen::MatrixXd q = seeded_rotation(d, static_cast<std::uint64_t>(1e9 * rng.uniform()));
  Eigen::VectorXd values(d);
  for (Eigen::Index i = 0; i < d; ++i) values(i) = band.tau + (band.zeta - band.tau) * rng.uniform();
  return SymMatrixd(q * values.asDiagonal() * q.transpose()).decomposed();
}

Outcome ac1_unbiasedness(std::uint64_t seed) {
  const SpectralBandd band(0.5, 20.0);
  double worst_sigma = 0.0;
  double worst_mu = 0.0;
  double slowest = 0.0;
  bool pass = true;
  for (Eigen::Index d : {1, 3, 5}) {
    for (int b : {1, 4}) {
      RngStream rng(seed, static_cast<std::uint64_t>(10 * d + b));
      const Problem p = make_quadratic_log_spaced(d, 10.0, seed + static_cast<std::uint64_t>(d));
      const SymMatrixd sigma_inv = random_in_band(d, band, rng);
      const Eigen::VectorXd mu = 2.0 * standard_normal_vector(rng, d);
      const auto start = std::chrono::steady_clock::now();
      const SuiteReport r = unbiasedness_suite(p, mu, sigma_inv, 1e-2, b, 100000, rng);
      slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      worst_sigma = std::max(worst_sigma, r.metrics["max_abs_z_sigma"].get<double>());
      worst_mu = std::max(worst_mu, r.metrics["max_abs_z_mu"].get<double>());
      pass = pass && r.pass;
    }
  }
  pass = pass && slowest < 30.0;
  return {pass, "max|z| Sigma " + fmt("%.2f", worst_sigma) + ", mu " + fmt("%.2f", worst_mu) + " (< 4), slowest " +
                    fmt("%.2f", slowest) + " s"};
}

Outcome ac2_variance_floor(std::uint64_t seed) {
  RngStream rng(seed, 2);
  const auto start = std::chrono::steady_clock::now();
  const SuiteReport r = variance_floor_check(1000000, rng);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double value = r.metrics["value"].get<double>();
  const bool pass = r.pass && value >= 18.5 * 0.9 && value <= 18.5 * 1.1 && seconds < 10.0;
  return {pass, "E||G||^2 = " + fmt("%.4f", value) + " vs 18.5 +-10%, " + fmt("%.2f", seconds) + " s"};
}

MinesConfig ac3_config(std::uint64_t seed) {
  MinesConfig c;
  c.alpha = 1e-3;
  c.batch = 5;
  c.band = SpectralBandd(0.5, 200.0);
  c.eta1 = ConstantStep{0.25 / 100.0};
  c.eta2 = InverseK{};
  c.max_iters = 10000;
  c.seed = seed;
  return c;
}

struct Ac3Result {
  Outcome outcome;
  SearchState replicate0_final;
};

Ac3Result ac3_covariance_rate(std::uint64_t seed) {
  const Problem p = make_quadratic_log_spaced(5, 100.0, seed);
  const MinesConfig c = ac3_config(seed);
  const auto start = std::chrono::steady_clock::now();
  int in_range = 0;
  bool decreased = true;
  std::string slopes;
  SearchState first;
  for (int rep = 0; rep < 5; ++rep) {
    RngStream rng(seed, static_cast<std::uint64_t>(rep));
    const RunTrace trace = run(Algo::Mines, p, c, rng);
    if (trace.error) return {{false, "replicate " + std::to_string(rep) + ": " + *trace.error}, {}};
    const RateFit fit = fit_rate(trace, TraceColumn::SigmaErrSq, 1000, 10000);
    if (fit.slope >= -1.3 && fit.slope <= -0.7) ++in_range;
    const double initial = std::pow(*trace.rows.front().sigma_err_fro, 2);
    const double final = std::pow(*trace.rows.back().sigma_err_fro, 2);
    decreased = decreased && final < initial / 100.0;
    slopes += (rep ? ", " : "") + fmt("%.3f", fit.slope);
    if (rep == 0) first = trace.final_state;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = in_range >= 4 && decreased && seconds < 120.0;
  return {{pass, "slopes [" + slopes + "], " + std::to_string(in_range) + "/5 in [-1.3,-0.7], final < initial/100: " +
                     (decreased ? "yes" : "no") + ", " + fmt("%.1f", seconds) + " s"},
          first};
}

Outcome ac4_minimizer(std::uint64_t seed, const SearchState& final_state) {
  const Problem p = make_quadratic_log_spaced(5, 100.0, seed);
  const MinesConfig c = ac3_config(seed);
  const SuiteReport wide = minimizer_characterization_check(p, c.band, c.alpha, final_state, 1e-3, 0.1);

  MinesConfig clipped = c;
  clipped.band = SpectralBandd(0.5, 50.0);
  RngStream rng(seed, 40);
  const RunTrace trace = run(Algo::Mines, p, clipped, rng);
  const double top = trace.final_state.sigma_inv.eigenvalues()(0);
  const bool top_ok = !trace.error && std::abs(top - 50.0) <= 0.05 * 50.0;
  return {wide.pass && top_ok, "||mu-mu*|| " + fmt("%.2e", wide.metrics["mu_distance"].get<double>()) +
                                   " (< 1e-3), rel Sigma err " +
                                   fmt("%.4f", wide.metrics["sigma_relative_error"].get<double>()) +
                                   " (< 0.1), clipped top eigenvalue " + fmt("%.3f", top) + " vs zeta 50 (5%)"};
}

Outcome ac5_two_stage(std::uint64_t seed) {
  const Problem p = make_quadratic_log_spaced(5, 100.0, seed);
  MinesConfig c = ac3_config(seed);
  c.eta1 = TheoryLocal{};
  c.smoothness = p.oracle(Verification{}).smoothness;
  c.switch_mode = SwitchMode::Heuristic;
  c.local_estimate = LocalEstimate::OracleSpectral;
  c.target_gap = 1e-20;
  RngStream rng(seed, 50);
  const RunTrace trace = run(Algo::Mines, p, c, rng);
  if (trace.error) return {false, *trace.error};
  if (!trace.switch_iteration) return {false, "no stage switch within K"};
  const long sw = *trace.switch_iteration;
  const long end = trace.rows.back().k;
  bool fits_ok = sw >= 10 && end - sw >= 10;
  double before = 0.0;
  double after = 0.0;
  if (fits_ok) {
    before = fit_geometric_rate(trace, TraceColumn::FGap, 1, sw).slope;
    after = fit_geometric_rate(trace, TraceColumn::FGap, sw, end).slope;
  }

  MinesConfig exact = c;
  exact.exact_expectation = true;
  RngStream unused(seed, 51);
  const RunTrace det = run(Algo::Mines, p, exact, unused);
  bool monotone = !det.error.has_value();
  for (std::size_t i = 1; monotone && i < det.rows.size(); ++i) monotone = *det.rows[i].f_gap <= *det.rows[i - 1].f_gap;

  const bool pass = fits_ok && after <= before && monotone;
  return {pass, "switch at k=" + std::to_string(sw) + ", semilog slope before " + fmt("%.3e", before) + ", after " +
                    fmt("%.3e", after) + ", exact-mode monotone: " + (monotone ? "yes" : "no") + " over " +
                    std::to_string(det.rows.size() - 1) + " iterations"};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int invoke(const std::vector<std::string>& args, std::string* stderr_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  if (stderr_text) *stderr_text = err.str();
  return code;
}

Outcome ac6_preconditioning(std::uint64_t seed, const fs::path& root) {
  const fs::path dir = root / "ac6";
  fs::remove_all(dir);
  std::string err;
  const int code = invoke({"compare", "--problem", "quadratic:d=10,kappa=1000,rot=" + std::to_string(seed), "--algo",
                           "mines,rgf", "--alpha", "1e-3", "--budget", "100000", "--replicates", "5", "--seed",
                           std::to_string(seed), "--tau", "0.5", "--zeta", "2000", "--eta1", "theory-local",
                           "--baseline-eta", "2.5e-4", "--trace-stride", "100", "--jobs", "5", "--out", dir.string()},
                          &err);
  if (code != 0) return {false, "compare exited with " + std::to_string(code) + ": " + err};
  const auto summary = nlohmann::json::parse(read_text(dir / "summary.json"));
  const double mines_gap = summary["algos"]["mines"]["median_final_f_gap"].get<double>();
  const double rgf_gap = summary["algos"]["rgf"]["median_final_f_gap"].get<double>();
  return {mines_gap * 10.0 <= rgf_gap,
          "median final f_gap MiNES " + fmt("%.3e", mines_gap) + " vs RGF " + fmt("%.3e", rgf_gap) + " (ratio " +
              fmt("%.3g", rgf_gap / mines_gap) + ", need >= 10)"};
}

Outcome ac7_projection(std::uint64_t seed) {
  RngStream rng(seed, 7);
  const auto start = std::chrono::steady_clock::now();
  const SuiteReport r = projection_check(1000, 10, 100, rng, 1e-10);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {r.pass && seconds < 10.0,
          "idempotence " + fmt("%.2e", r.metrics["max_idempotence_error"].get<double>()) + ", expansion " +
              fmt("%.2e", r.metrics["max_expansion"].get<double>()) + ", minimality gap " +
              fmt("%.2e", r.metrics["max_minimality_gap"].get<double>()) + " (tol 1e-10), " + fmt("%.2f", seconds) +
              " s"};
}

Outcome ac8_derivatives(std::uint64_t seed) {
  double worst_sigma = 0.0;
  double worst_mu = 0.0;
  bool pass = true;
  for (Eigen::Index d : {1, 3, 5, 8}) {
    RngStream rng(seed, static_cast<std::uint64_t>(80 + d));
    const Problem p = make_quadratic_log_spaced(d, 50.0, seed + static_cast<std::uint64_t>(d));
    const SymMatrixd sigma_inv = random_in_band(d, SpectralBandd(0.5, 10.0), rng);
    const Eigen::VectorXd mu = standard_normal_vector(rng, d) + Eigen::VectorXd::Constant(d, 3.0);
    const SuiteReport r = fd_check(p, mu, sigma_inv, 0.3, 1e-5, rng);
    worst_sigma = std::max(worst_sigma, r.metrics["sigma_relative_error"].get<double>());
    worst_mu = std::max(worst_mu, r.metrics["mu_relative_error"].get<double>());
    pass = pass && r.pass;
  }
  return {pass, "max rel err dSigma " + fmt("%.2e", worst_sigma) + " (< 1e-5), dmu " + fmt("%.2e", worst_mu) +
                    " (< 1e-6)"};
}

Outcome ac9_moments(std::uint64_t seed) {
  bool pass = true;
  bool strict = true;
  for (Eigen::Index d : {2, 5, 10}) {
    for (int p : {2, 3, 4}) {
      RngStream rng(seed, static_cast<std::uint64_t>(90 + 10 * d + p));
      const SuiteReport r = moments_check(d, p, 100000, rng);
      pass = pass && r.pass;
      strict = strict && r.metrics["strictly_inside"].get<bool>();
    }
  }
  return {pass, std::string("9 (d, p) cells inside [d^{p/2}, (p+d)^{p/2}]") +
                    (strict ? "" : " (p = 2 within 4 SE of its exact lower end)")};
}

Outcome ac10_determinism(std::uint64_t seed, const fs::path& root) {
  const std::vector<std::string> base{"run",  "--problem", "quadratic:d=5,kappa=100", "--algo", "mines",
                                      "--iters", "1000",   "--seed",  std::to_string(seed),  "--alpha",
                                      "1e-3",    "--replicates", "3", "--jobs", "3"};
  std::vector<std::string> hashes;
  for (const char* name : {"a", "b"}) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back((root / "ac10" / name).string());
    fs::remove_all(root / "ac10" / name);
    if (invoke(args) != 0) return {false, "run failed"};
  }
  int identical = 0;
  for (int rep = 0; rep < 3; ++rep) {
    const std::string file = "trace_mines_rep" + std::to_string(rep) + ".csv";
    const std::string a = read_text(root / "ac10" / "a" / file);
    const std::string b = read_text(root / "ac10" / "b" / file);
    if (!a.empty() && a == b) ++identical;
  }
  return {identical == 3, std::to_string(identical) + "/3 replicate CSVs byte-identical across two invocations"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("MiNES acceptance suite");
  std::string out_dir = (fs::temp_directory_path() / "mines_acceptance").string();
  std::uint64_t seed = 20240611;
  app.add_option("--out", out_dir, "scratch directory for CLI-driven criteria");
  app.add_option("--seed", seed, "base seed");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out_dir);

  int failures = 0;
  auto report = [&](const std::string& id, const std::string& title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << title << ": " << o.detail << " ["
              << fmt("%.1f", seconds) << " s]" << std::endl;
  };

  SearchState ac3_final;
  report("AC-1", "estimator unbiasedness", [&] { return ac1_unbiasedness(seed); });
  report("AC-2", "variance floor", [&] { return ac2_variance_floor(seed); });
  report("AC-3", "covariance rate", [&] {
    Ac3Result r = ac3_covariance_rate(seed);
    ac3_final = r.replicate0_final;
    return r.outcome;
  });
  report("AC-4", "minimizer characterization", [&] {
    if (ac3_final.mu.size() == 0) return Outcome{false, "AC-3 run unavailable"};
    return ac4_minimizer(seed, ac3_final);
  });
  report("AC-5", "two-stage behavior", [&] { return ac5_two_stage(seed); });
  report("AC-6", "preconditioning benefit", [&] { return ac6_preconditioning(seed, out_dir); });
  report("AC-7", "projection correctness", [&] { return ac7_projection(seed); });
  report("AC-8", "derivative closed forms", [&] { return ac8_derivatives(seed); });
  report("AC-9", "Gaussian moment bounds", [&] { return ac9_moments(seed); });
  report("AC-10", "determinism", [&] { return ac10_determinism(seed, out_dir); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
