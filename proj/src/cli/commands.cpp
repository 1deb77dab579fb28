#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "mines/analysis.hpp"
#include "mines/theory.hpp"

namespace mines::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string cell(const std::optional<double>& value) { return value ? format_real(*value) : "NA"; }

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path.string() + "' failed");
}

// Flags shared by run and compare; unset flags leave the file value alone.
struct ExperimentFlags {
  std::string config_path;
  std::optional<std::string> problem;
  std::vector<std::string> algos;
  std::optional<double> alpha;
  std::optional<long long> batch;
  std::optional<long long> iters;
  std::optional<unsigned long long> seed;
  std::optional<double> tau;
  std::optional<double> zeta;
  std::optional<std::string> eta1;
  std::optional<std::string> eta2;
  std::optional<double> delta;
  std::optional<long long> replicates;
  std::optional<std::string> output_dir;
  std::optional<long long> jobs;
  std::optional<long long> trace_stride;
  std::optional<std::string> switch_mode;
  std::optional<std::string> local_estimate;
  std::optional<long long> hessian_refresh;
  std::optional<double> target_gap;
  std::optional<long long> max_evals;
  std::optional<double> baseline_eta;
  std::optional<std::string> smoothness;
  std::optional<long long> budget;
  bool exact_expectation = false;
  bool wall_clock = false;
  bool gnuplot = false;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f) {
  app->add_option("--config", f.config_path, "JSON configuration file");
  app->add_option("--problem", f.problem, "quadratic:d=5,kappa=100 | logreg:path=data.csv | logsumexp:d=5,m=20");
  app->add_option("--algo", f.algos, "mines, nes or rgf (repeat or comma-separate for compare)")->delimiter(',');
  app->add_option("--alpha", f.alpha, "smoothing radius (required)");
  app->add_option("--batch", f.batch, "antithetic pairs per iteration (default d)");
  app->add_option("--iters", f.iters, "iterations K");
  app->add_option("--seed", f.seed, "base seed (overrides MINES_SEED)");
  app->add_option("--tau", f.tau, "lower eigenvalue bound of the inverse covariance");
  app->add_option("--zeta", f.zeta, "upper eigenvalue bound of the inverse covariance");
  app->add_option("--eta1", f.eta1, "mean step: number, theory-global or theory-local");
  app->add_option("--eta2", f.eta2, "inverse-covariance step: number or inverse-k");
  app->add_option("--delta", f.delta, "confidence parameter of the theory constants");
  app->add_option("--replicates", f.replicates, "independent replicates");
  app->add_option("--out", f.output_dir, "output directory");
  app->add_option("--jobs", f.jobs, "replicates run concurrently");
  app->add_option("--trace-stride", f.trace_stride, "emit every n-th iteration");
  app->add_option("--switch-mode", f.switch_mode, "heuristic or oracle-exact");
  app->add_option("--local-estimate", f.local_estimate, "finite-difference, oracle-spectral or theorem");
  app->add_option("--hessian-refresh", f.hessian_refresh, "iterations between finite-difference Hessians");
  app->add_option("--target-gap", f.target_gap, "stop once f - f* falls below this (oracle problems)");
  app->add_option("--max-evals", f.max_evals, "query budget of a run");
  app->add_option("--baseline-eta", f.baseline_eta, "step size of the rgf and nes baselines");
  app->add_option("--smoothness", f.smoothness, "oracle or L,sigma,gamma");
  app->add_option("--budget", f.budget, "compare: matched query budget per run");
  app->add_flag("--exact-expectation", f.exact_expectation, "replace estimators by their means (quadratics)");
  app->add_flag("--wall-clock", f.wall_clock, "record wall_ms");
  app->add_flag("--gnuplot", f.gnuplot, "also write plot.gp");
}

json step_value(const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size()) return value;
  return text;
}

json merged_config(const ExperimentFlags& f) {
  json merged = f.config_path.empty() ? json::object() : load_config_file(f.config_path);
  if (!merged.is_object()) throw ConfigError("config: expected a JSON object");
  apply_seed_env(merged);
  auto set = [&](const char* key, const auto& value) {
    if (value) merged[key] = *value;
  };
  set("problem", f.problem);
  if (!f.algos.empty()) merged["algo"] = f.algos;
  set("alpha", f.alpha);
  set("batch", f.batch);
  set("iters", f.iters);
  if (f.seed) merged["seed"] = static_cast<std::uint64_t>(*f.seed);
  set("tau", f.tau);
  set("zeta", f.zeta);
  if (f.eta1) merged["eta1"] = step_value(*f.eta1);
  if (f.eta2) merged["eta2"] = step_value(*f.eta2);
  set("delta", f.delta);
  set("replicates", f.replicates);
  set("output_dir", f.output_dir);
  set("jobs", f.jobs);
  set("trace_stride", f.trace_stride);
  set("switch_mode", f.switch_mode);
  set("local_estimate", f.local_estimate);
  set("hessian_refresh", f.hessian_refresh);
  set("target_gap", f.target_gap);
  set("max_evals", f.max_evals);
  set("baseline_eta", f.baseline_eta);
  set("budget", f.budget);
  if (f.smoothness) {
    if (*f.smoothness == "oracle") {
      merged["smoothness"] = "oracle";
    } else {
      std::stringstream parts(*f.smoothness);
      std::vector<double> values;
      std::string item;
      while (std::getline(parts, item, ',')) {
        const json v = step_value(item);
        if (!v.is_number()) throw ConfigError("smoothness: expected oracle or L,sigma,gamma");
        values.push_back(v.get<double>());
      }
      if (values.size() < 2 || values.size() > 3) throw ConfigError("smoothness: expected oracle or L,sigma,gamma");
      merged["smoothness"] = {{"L", values[0]}, {"sigma", values[1]}, {"gamma", values.size() == 3 ? values[2] : 0.0}};
    }
  }
  if (f.exact_expectation) merged["exact_expectation"] = true;
  if (f.wall_clock) merged["wall_clock"] = true;
  if (f.gnuplot) merged["gnuplot"] = true;
  return merged;
}

struct Task {
  Algo algo;
  int replicate;
  MinesConfig mines;
};

struct Outcome {
  std::optional<RunTrace> trace;
  std::optional<std::string> error;
};

// Runs every task on up to `jobs` threads; results are stored by task index so
// output order never depends on scheduling.
std::vector<Outcome> execute(const ExperimentConfig& config, const std::vector<Task>& tasks) {
  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      try {
        const Problem problem = build_problem(config.problem);
        RngStream rng(tasks[i].mines.seed, static_cast<std::uint64_t>(tasks[i].replicate));
        outcomes[i].trace = run(tasks[i].algo, problem, tasks[i].mines, rng);
        if (outcomes[i].trace->error) outcomes[i].error = outcomes[i].trace->error;
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return outcomes;
}

MinesConfig config_for(const ExperimentConfig& config, Algo algo) {
  MinesConfig m = config.mines;
  if (algo != Algo::Mines) m.eta1 = ConstantStep{baseline_step(config)};
  return m;
}

json mean_std(const std::vector<double>& values) {
  if (values.empty()) return {{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  return {{"mean", mean}, {"std", sd}, {"n", values.size()}};
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string gnuplot_script(const std::vector<std::string>& files) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set datafile missing 'NA'\n"
      << "set logscale y\n"
      << "set xlabel 'queries'\n"
      << "set ylabel 'f - f*'\n"
      << "set key top right\n"
      << "plot";
  for (std::size_t i = 0; i < files.size(); ++i) {
    out << (i == 0 ? " " : ", \\\n     ") << "'" << files[i] << "' using 2:4 skip 1 with lines title '" << files[i]
        << "'";
  }
  out << "\n";
  return out.str();
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output_dir: cannot create '" + config.output_dir + "'");
  return dir;
}

int cmd_run(const ExperimentFlags& flags, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = resolve_config(merged_config(flags));
  if (config.algos.size() != 1) throw ConfigError("algo: run takes exactly one algorithm (use compare)");
  const Algo algo = config.algos.front();
  const MinesConfig mines = config_for(config, algo);
  const fs::path dir = prepare_output_dir(config);
  write_text(dir / "config.resolved.json", to_json(config).dump(2) + "\n");

  std::vector<Task> tasks;
  for (int r = 0; r < config.replicates; ++r) tasks.push_back({algo, r, mines});
  const std::vector<Outcome> outcomes = execute(config, tasks);

  std::vector<double> final_gaps;
  std::vector<double> final_sigma;
  std::vector<std::string> files;
  json switches = json::array();
  json errors = json::array();
  std::uint64_t total_queries = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (o.error) errors.push_back({{"replicate", i}, {"message", *o.error}});
    if (!o.trace) continue;
    const std::string name = std::string("trace_") + to_string(algo) + "_rep" + std::to_string(i) + ".csv";
    write_text(dir / name, trace_csv(*o.trace));
    files.push_back(name);
    const TraceRow& last = o.trace->rows.back();
    if (last.f_gap) final_gaps.push_back(*last.f_gap);
    if (last.sigma_err_fro) final_sigma.push_back(*last.sigma_err_fro);
    total_queries += last.n_evals;
    switches.push_back(o.trace->switch_iteration ? json(*o.trace->switch_iteration) : json(nullptr));
  }

  const json summary = {{"algo", to_string(algo)},
                        {"problem", config.problem.to_string()},
                        {"replicates", config.replicates},
                        {"final_f_gap", mean_std(final_gaps)},
                        {"final_sigma_err_fro", mean_std(final_sigma)},
                        {"total_queries", total_queries},
                        {"switch_iterations", switches},
                        {"errors", errors}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (config.gnuplot) write_text(dir / "plot.gp", gnuplot_script(files));

  out << "wrote " << files.size() << " trace(s) to " << dir.string() << "\n";
  if (!final_gaps.empty()) out << "final f_gap mean " << format_real(summary["final_f_gap"]["mean"].get<double>()) << "\n";
  if (!errors.empty()) {
    for (const json& e : errors) err << "replicate " << e["replicate"] << ": " << e["message"].get<std::string>() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_compare(const ExperimentFlags& flags, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = resolve_config(merged_config(flags));
  if (config.algos.size() < 2) throw ConfigError("algo: compare needs at least two algorithms");
  const fs::path dir = prepare_output_dir(config);
  write_text(dir / "config.resolved.json", to_json(config).dump(2) + "\n");

  std::vector<Task> tasks;
  for (Algo algo : config.algos) {
    MinesConfig m = config_for(config, algo);
    m.max_evals = config.budget;
    m.max_iters = static_cast<long>(config.budget);
    for (int r = 0; r < config.replicates; ++r) tasks.push_back({algo, r, m});
  }
  const std::vector<Outcome> outcomes = execute(config, tasks);

  std::ostringstream csv;
  csv << "algo,replicate,n_evals,f_gap\n";
  json per_algo = json::object();
  json errors = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string name = to_string(tasks[i].algo);
    if (outcomes[i].error) errors.push_back({{"algo", name}, {"replicate", tasks[i].replicate}, {"message", *outcomes[i].error}});
    if (!outcomes[i].trace) continue;
    for (const TraceRow& row : outcomes[i].trace->rows) {
      csv << name << ',' << tasks[i].replicate << ',' << row.n_evals << ',' << cell(row.f_gap) << '\n';
    }
    const TraceRow& last = outcomes[i].trace->rows.back();
    per_algo[name]["final_n_evals"].push_back(last.n_evals);
    per_algo[name]["final_f_gap"].push_back(last.f_gap ? json(*last.f_gap) : json(nullptr));
  }
  for (auto& [name, entry] : per_algo.items()) {
    std::vector<double> gaps;
    for (const json& g : entry["final_f_gap"]) {
      if (g.is_number()) gaps.push_back(g.get<double>());
    }
    entry["median_final_f_gap"] = gaps.empty() ? json(nullptr) : json(median(gaps));
  }
  write_text(dir / "compare.csv", csv.str());
  const json summary = {{"problem", config.problem.to_string()},
                        {"budget", config.budget},
                        {"replicates", config.replicates},
                        {"algos", per_algo},
                        {"errors", errors}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (config.gnuplot) {
    std::ostringstream gp;
    gp << "set datafile separator ','\nset datafile missing 'NA'\nset logscale y\n"
       << "set xlabel 'queries'\nset ylabel 'f - f*'\nplot";
    for (std::size_t a = 0; a < config.algos.size(); ++a) {
      const std::string name = to_string(config.algos[a]);
      gp << (a == 0 ? " " : ", \\\n     ") << "'compare.csv' using (strcol(1) eq '" << name
         << "' && $2 == 0 ? $3 : 1/0):4 skip 1 with lines title '" << name << "'";
    }
    gp << "\n";
    write_text(dir / "plot.gp", gp.str());
  }

  for (auto& [name, entry] : per_algo.items()) {
    out << std::left << std::setw(8) << name << " median final f_gap "
        << (entry["median_final_f_gap"].is_number() ? format_real(entry["median_final_f_gap"].get<double>()) : "NA")
        << "\n";
  }
  if (!errors.empty()) {
    for (const json& e : errors) err << e["algo"].get<std::string>() << " replicate " << e["replicate"] << ": "
                                     << e["message"].get<std::string>() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct DiagnoseFlags {
  std::string suite;
  std::optional<long> samples;
  std::uint64_t seed = 1;
  long long d = 0;  // 0: suite default
  int p = 3;
  int b = 1;
  double alpha = 0.0;  // 0: suite default
  double kappa = 10.0;
  double hessian = 1.0;
  double sigma_inv = 1.0;
  double h = 1e-5;
  std::string out;
};

// Random inverse covariance with spectrum in [0.5, 2].
SymMatrixd random_sigma_inv(Eigen::Index d, RngStream& rng) {
  Eigen::VectorXd values(d);
  for (Eigen::Index i = 0; i < d; ++i) values(i) = 0.5 + 1.5 * rng.uniform();
  const Eigen::MatrixXd q = seeded_rotation(d, static_cast<std::uint64_t>(rng.uniform() * 1e9));
  return SymMatrixd(q * values.asDiagonal() * q.transpose()).decomposed();
}

int cmd_diagnose(const DiagnoseFlags& f, std::ostream& out) {
  static const std::vector<std::string> suites{"unbiasedness", "variance_floor", "fd_check", "moments", "projection"};
  if (std::find(suites.begin(), suites.end(), f.suite) == suites.end()) {
    throw ConfigError("suite: unknown suite '" + f.suite +
                      "' (expected unbiasedness, variance_floor, fd_check, moments or projection)");
  }
  RngStream rng(f.seed, 0);
  SuiteReport report;
  if (f.suite == "unbiasedness") {
    const Eigen::Index d = f.d > 0 ? f.d : 3;
    const Problem q = make_quadratic_log_spaced(d, f.kappa, f.seed);
    const SymMatrixd sigma_inv = random_sigma_inv(d, rng);
    const Eigen::VectorXd mu = standard_normal_vector(rng, d);
    report = unbiasedness_suite(q, mu, sigma_inv, f.alpha > 0.0 ? f.alpha : 0.1, f.b, f.samples.value_or(100000), rng);
  } else if (f.suite == "variance_floor") {
    report = variance_floor_check(f.samples.value_or(1000000), rng, f.hessian, f.sigma_inv);
  } else if (f.suite == "fd_check") {
    const Eigen::Index d = f.d > 0 ? f.d : 3;
    const Problem q = make_quadratic_log_spaced(d, f.kappa, f.seed);
    const SymMatrixd sigma_inv = random_sigma_inv(d, rng);
    const Eigen::VectorXd mu = standard_normal_vector(rng, d);
    report = fd_check(q, mu, sigma_inv, f.alpha > 0.0 ? f.alpha : 0.5, f.h, rng);
  } else if (f.suite == "moments") {
    report = moments_check(f.d > 0 ? f.d : 5, f.p, f.samples.value_or(100000), rng);
  } else {
    report = projection_check(f.samples.value_or(1000), f.d > 0 ? f.d : 10, 100, rng);
  }

  const std::string path = f.out.empty() ? "diagnose_" + f.suite + ".json" : f.out;
  write_text(path, report.to_json().dump(2) + "\n");
  out << report.suite << ": " << (report.pass ? "PASS" : "FAIL") << "\n";
  for (const auto& [key, value] : report.metrics.items()) out << "  " << key << " = " << value.dump() << "\n";
  out << "report written to " << path << "\n";
  return report.pass ? kExitOk : kExitDiagnostic;
}

struct ConstantsFlags {
  double L = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  long long d = 0;
  int b = 0;
  double alpha = 0.0;
  double tau = 0.0;
  double zeta = 0.0;
  double delta = 0.05;
  long K = 0;
  std::optional<double> f_gap;
  std::optional<double> sigma1_err;
};

int cmd_constants(const ConstantsFlags& f, std::ostream& out) {
  if (f.d < 1 || f.b < 1 || f.K < 1) throw ConfigError("d, b and K must be >= 1");
  const SmoothnessSpec spec{f.L, f.sigma, f.gamma};
  try {
    spec.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("L: ") + e.what());
  }
  MinesConfig config;
  config.alpha = f.alpha;
  config.batch = f.b;
  config.delta = f.delta;
  try {
    config.band = SpectralBandd(f.tau, f.zeta);
  } catch (const Error&) {
    throw ConfigError("tau: band requires 0 < tau <= zeta < inf");
  }
  if (!(f.delta > 0.0 && f.delta < 1.0)) throw ConfigError("delta: must lie in (0, 1)");
  const ConstantsReport report = compute_constants(spec, config, f.d, f.K, f.f_gap, f.sigma1_err);
  const json j = to_json(report.constants);

  for (const auto& [key, value] : j.items()) {
    out << std::left << std::setw(24) << key << ' '
        << (value.is_number() ? format_real(value.get<double>()) : (value.is_null() ? "unavailable" : value.get<std::string>()))
        << "\n";
  }
  for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
  out << json{{"constants", j}, {"warnings", report.warnings}}.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string trace_csv(const RunTrace& trace) {
  std::ostringstream csv;
  csv << kTraceHeader << '\n';
  for (const TraceRow& row : trace.rows) {
    csv << row.k << ',' << row.n_evals << ',' << format_real(row.f_value) << ',' << cell(row.f_gap) << ','
        << cell(row.sigma_err_fro) << ',' << cell(row.eta1) << ',' << cell(row.eta2) << ',' << to_string(row.stage)
        << ',' << cell(row.wall_ms) << '\n';
  }
  return csv.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mirror natural evolution strategies: runs, comparisons, diagnostics and theory constants", "mines"};
  app.require_subcommand(1);

  ExperimentFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run one algorithm for several replicates and write traces");
  add_experiment_flags(run_cmd, run_flags);

  ExperimentFlags compare_flags;
  CLI::App* compare_cmd = app.add_subcommand("compare", "run several algorithms at a matched query budget");
  add_experiment_flags(compare_cmd, compare_flags);

  DiagnoseFlags diag;
  CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "run a statistical or numerical check");
  diagnose_cmd->add_option("suite", diag.suite, "unbiasedness | variance_floor | fd_check | moments | projection")
      ->required();
  diagnose_cmd->add_option("--samples", diag.samples, "samples, batches or matrices");
  diagnose_cmd->add_option("--seed", diag.seed, "seed");
  diagnose_cmd->add_option("--d", diag.d, "dimension");
  diagnose_cmd->add_option("--p", diag.p, "moment order");
  diagnose_cmd->add_option("--b", diag.b, "batch size");
  diagnose_cmd->add_option("--alpha", diag.alpha, "smoothing radius");
  diagnose_cmd->add_option("--kappa", diag.kappa, "condition number of the test quadratic");
  diagnose_cmd->add_option("--hessian", diag.hessian, "variance_floor: H");
  diagnose_cmd->add_option("--sigma-inv", diag.sigma_inv, "variance_floor: inverse covariance");
  diagnose_cmd->add_option("--fd-step", diag.h, "fd_check: finite-difference step");
  diagnose_cmd->add_option("--out", diag.out, "report path");

  ConstantsFlags cf;
  CLI::App* constants_cmd = app.add_subcommand("constants", "print the constants of the convergence analysis");
  constants_cmd->add_option("--L", cf.L, "gradient Lipschitz constant")->required();
  constants_cmd->add_option("--sigma", cf.sigma, "strong convexity")->required();
  constants_cmd->add_option("--gamma", cf.gamma, "Hessian Lipschitz constant")->required();
  constants_cmd->add_option("--d", cf.d, "dimension")->required();
  constants_cmd->add_option("--b", cf.b, "batch size")->required();
  constants_cmd->add_option("--alpha", cf.alpha, "smoothing radius")->required();
  constants_cmd->add_option("--tau", cf.tau, "band lower bound")->required();
  constants_cmd->add_option("--zeta", cf.zeta, "band upper bound")->required();
  constants_cmd->add_option("--delta", cf.delta, "failure probability")->capture_default_str();
  constants_cmd->add_option("--K", cf.K, "iterations")->required();
  constants_cmd->add_option("--f-gap", cf.f_gap, "f(mu_1) - f*, enables C2 and C");
  constants_cmd->add_option("--sigma1-err", cf.sigma1_err, "||Sigma_1^-1 - H*||_F, enables C");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_flags, out, err);
    if (compare_cmd->parsed()) return cmd_compare(compare_flags, out, err);
    if (diagnose_cmd->parsed()) return cmd_diagnose(diag, out);
    return cmd_constants(cf, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace mines::cli
