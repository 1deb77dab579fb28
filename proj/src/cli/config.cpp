#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mines/rng.hpp"

namespace mines::cli {

namespace {

using nlohmann::json;

template <class T>
T parse_scalar(const std::string& field, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(field + ": cannot parse '" + text + "'");
  }
  return value;
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key + ": expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
  return j.get<long long>();
}

bool boolean(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError(key + ": expected true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key + ": expected a string");
  return j.get<std::string>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "problem",        "algo",          "alpha",           "batch",         "tau",         "zeta",
      "eta1",           "eta2",          "iters",           "seed",          "delta",       "initial_mu",
      "switch_mode",    "local_estimate", "hessian_refresh", "switch_window", "switch_tolerance",
      "smoothness",     "trace_stride",  "target_gap",      "max_evals",     "exact_expectation",
      "wall_clock",     "baseline_eta",  "replicates",      "output_dir",    "jobs",        "gnuplot",
      "budget"};
  return keys;
}

class ParamReader {
 public:
  explicit ParamReader(const ProblemSpec& spec) : spec_(spec) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    const auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return std::nullopt;
    return it->second;
  }
  double real(const std::string& key, std::optional<double> fallback) {
    const auto value = raw(key);
    if (!value) {
      if (!fallback) throw ConfigError("problem: " + spec_.kind + " needs parameter '" + key + "'");
      return *fallback;
    }
    return parse_scalar<double>("problem." + key, *value);
  }
  long long whole(const std::string& key, std::optional<long long> fallback) {
    const auto value = raw(key);
    if (!value) {
      if (!fallback) throw ConfigError("problem: " + spec_.kind + " needs parameter '" + key + "'");
      return *fallback;
    }
    return parse_scalar<long long>("problem." + key, *value);
  }
  void finish() const {
    for (const auto& [key, value] : spec_.params) {
      if (!used_.count(key)) throw ConfigError("problem: unknown parameter '" + key + "' for " + spec_.kind);
    }
  }

 private:
  const ProblemSpec& spec_;
  std::set<std::string> used_;
};

Problem build_problem_unchecked(const ProblemSpec& spec) {
  ParamReader params(spec);
  if (spec.kind == "quadratic") {
    const long long d = params.whole("d", std::nullopt);
    const double kappa = params.real("kappa", 100.0);
    const auto rot = params.raw("rot");
    params.finish();
    if (d < 1) throw ConfigError("problem: d must be >= 1");
    if (rot && *rot == "none") {
      QuadraticSpec q;
      q.eigenvalues.resize(d);
      for (long long i = 0; i < d; ++i) {
        q.eigenvalues(i) = std::pow(kappa, d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1));
      }
      q.shift = Eigen::VectorXd::Ones(d);
      return make_quadratic(q);
    }
    const auto seed = rot ? parse_scalar<std::uint64_t>("problem.rot", *rot) : std::uint64_t{0};
    return make_quadratic_log_spaced(d, kappa, seed);
  }
  if (spec.kind == "logreg") {
    const auto path = params.raw("path");
    const double reg = params.real("reg", 1e-2);
    Dataset data;
    if (path) {
      data = load_csv_dataset(*path);
    } else {
      const long long n = params.whole("n", 200);
      const long long d = params.whole("d", 5);
      const long long seed = params.whole("seed", 0);
      if (n < 1 || d < 1) throw ConfigError("problem: n and d must be >= 1");
      data = synthetic_dataset(n, d, static_cast<std::uint64_t>(seed));
    }
    params.finish();
    return make_logreg(data.features, data.labels, reg);
  }
  if (spec.kind == "logsumexp") {
    const long long d = params.whole("d", 5);
    const long long m = params.whole("m", 20);
    const double temp = params.real("temp", 1.0);
    const double reg = params.real("reg", 0.1);
    const long long seed = params.whole("seed", 0);
    params.finish();
    if (d < 1 || m < 1) throw ConfigError("problem: d and m must be >= 1");
    RngStream rng(static_cast<std::uint64_t>(seed), 0x6c7365ULL);
    Eigen::MatrixXd anchors(m, d);
    for (long long i = 0; i < m; ++i) anchors.row(i) = standard_normal_vector(rng, d).transpose();
    return make_logsumexp(anchors, temp, reg);
  }
  throw ConfigError("problem: unknown kind '" + spec.kind + "' (expected quadratic, logreg or logsumexp)");
}

std::string switch_mode_name(SwitchMode mode) {
  return mode == SwitchMode::OracleExact ? "oracle-exact" : "heuristic";
}

std::string local_estimate_name(LocalEstimate mode) {
  switch (mode) {
    case LocalEstimate::TheoremBound:
      return "theorem";
    case LocalEstimate::OracleSpectral:
      return "oracle-spectral";
    case LocalEstimate::FiniteDifference:
      return "finite-difference";
  }
  return "finite-difference";
}

}  // namespace

std::string ProblemSpec::to_string() const {
  std::string out = kind;
  char sep = ':';
  for (const auto& [key, value] : params) {
    out += sep + key + "=" + value;
    sep = ',';
  }
  return out;
}

ProblemSpec parse_problem_spec(const std::string& spec_text) {
  ProblemSpec spec;
  const auto colon = spec_text.find(':');
  spec.kind = spec_text.substr(0, colon);
  if (spec.kind.empty()) throw ConfigError("problem: empty problem kind");
  if (colon == std::string::npos) return spec;
  std::stringstream rest(spec_text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("problem: expected key=value, got '" + item + "'");
    spec.params[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return spec;
}

Problem build_problem(const ProblemSpec& spec) {
  try {
    return build_problem_unchecked(spec);
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

ExperimentConfig resolve_config(const json& merged) {
  if (!merged.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : merged.items()) {
    if (!known_keys().count(key)) throw ConfigError(key + ": unknown field");
  }
  auto has = [&](const char* key) { return merged.contains(key) && !merged.at(key).is_null(); };

  ExperimentConfig config;
  if (!has("problem")) throw ConfigError("problem: required (e.g. quadratic:d=5,kappa=100)");
  config.problem = parse_problem_spec(text(merged.at("problem"), "problem"));
  const Problem problem = build_problem(config.problem);
  const Eigen::Index d = problem.dim();

  if (has("algo")) {
    const json& algo = merged.at("algo");
    std::vector<std::string> names;
    if (algo.is_array()) {
      for (const json& a : algo) names.push_back(text(a, "algo"));
    } else {
      names.push_back(text(algo, "algo"));
    }
    config.algos.clear();
    for (const std::string& name : names) {
      const auto parsed = parse_algo(name);
      if (!parsed) throw ConfigError("algo: unknown algorithm '" + name + "' (expected mines, nes or rgf)");
      config.algos.push_back(*parsed);
    }
    if (config.algos.empty()) throw ConfigError("algo: at least one algorithm is required");
  }

  std::optional<SmoothnessSpec> smoothness;
  if (has("smoothness")) {
    const json& s = merged.at("smoothness");
    if (s.is_string() && s.get<std::string>() == "oracle") {
      if (!problem.has_oracle()) throw ConfigError("smoothness: problem has no oracle");
      smoothness = problem.oracle(Verification{}).smoothness;
    } else if (s.is_object()) {
      smoothness = SmoothnessSpec{number(s.value("L", json()), "smoothness.L"),
                                  number(s.value("sigma", json()), "smoothness.sigma"),
                                  s.contains("gamma") ? number(s.at("gamma"), "smoothness.gamma") : 0.0};
    } else {
      throw ConfigError("smoothness: expected {\"L\", \"sigma\", \"gamma\"} or \"oracle\"");
    }
  }

  MinesConfig& m = config.mines;
  m = default_config(d, smoothness);
  if (!has("alpha")) throw ConfigError("alpha: required (smoothing radius, e.g. --alpha 1e-3)");
  m.alpha = number(merged.at("alpha"), "alpha");
  if (!(m.alpha > 0.0)) throw ConfigError("alpha: must be positive");

  if (has("batch")) m.batch = static_cast<int>(integer(merged.at("batch"), "batch"));
  if (has("tau") || has("zeta")) {
    const double tau = has("tau") ? number(merged.at("tau"), "tau") : m.band.tau;
    const double zeta = has("zeta") ? number(merged.at("zeta"), "zeta") : m.band.zeta;
    try {
      m.band = SpectralBandd(tau, zeta);
    } catch (const Error&) {
      throw ConfigError("tau: band requires 0 < tau <= zeta < inf");
    }
  }
  if (has("eta1")) {
    const json& e = merged.at("eta1");
    if (e.is_number()) {
      m.eta1 = ConstantStep{e.get<double>()};
    } else if (e == "theory-global") {
      m.eta1 = TheoryGlobal{};
    } else if (e == "theory-local") {
      m.eta1 = TheoryLocal{};
    } else {
      throw ConfigError("eta1: expected a number, \"theory-global\" or \"theory-local\"");
    }
  }
  if (has("eta2")) {
    const json& e = merged.at("eta2");
    if (e.is_number()) {
      m.eta2 = ConstantStep{e.get<double>()};
    } else if (e == "inverse-k") {
      m.eta2 = InverseK{};
    } else {
      throw ConfigError("eta2: expected a number or \"inverse-k\"");
    }
  }
  if (has("iters")) m.max_iters = integer(merged.at("iters"), "iters");
  if (has("seed")) {
    const json& s = merged.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    m.seed = s.get<std::uint64_t>();
  }
  if (has("delta")) m.delta = number(merged.at("delta"), "delta");
  if (has("initial_mu")) {
    const json& mu = merged.at("initial_mu");
    if (!mu.is_array() || static_cast<Eigen::Index>(mu.size()) != d) {
      throw ConfigError("initial_mu: expected an array of " + std::to_string(d) + " numbers");
    }
    m.initial_mu.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) m.initial_mu(i) = number(mu.at(static_cast<std::size_t>(i)), "initial_mu");
  }
  if (has("switch_mode")) {
    const std::string mode = text(merged.at("switch_mode"), "switch_mode");
    if (mode == "heuristic") {
      m.switch_mode = SwitchMode::Heuristic;
    } else if (mode == "oracle-exact") {
      m.switch_mode = SwitchMode::OracleExact;
    } else {
      throw ConfigError("switch_mode: expected \"heuristic\" or \"oracle-exact\"");
    }
  }
  if (has("local_estimate")) {
    const std::string mode = text(merged.at("local_estimate"), "local_estimate");
    if (mode == "theorem") {
      m.local_estimate = LocalEstimate::TheoremBound;
    } else if (mode == "oracle-spectral") {
      m.local_estimate = LocalEstimate::OracleSpectral;
    } else if (mode == "finite-difference") {
      m.local_estimate = LocalEstimate::FiniteDifference;
    } else {
      throw ConfigError("local_estimate: expected \"theorem\", \"oracle-spectral\" or \"finite-difference\"");
    }
  }
  if (has("hessian_refresh")) m.hessian_refresh = static_cast<int>(integer(merged.at("hessian_refresh"), "hessian_refresh"));
  if (has("switch_window")) m.switch_window = static_cast<int>(integer(merged.at("switch_window"), "switch_window"));
  if (has("switch_tolerance")) m.switch_tolerance = number(merged.at("switch_tolerance"), "switch_tolerance");
  if (has("trace_stride")) m.trace_stride = integer(merged.at("trace_stride"), "trace_stride");
  if (has("target_gap")) m.target_gap = number(merged.at("target_gap"), "target_gap");
  if (has("max_evals")) {
    const long long evals = integer(merged.at("max_evals"), "max_evals");
    if (evals < 0) throw ConfigError("max_evals: must be >= 0");
    m.max_evals = static_cast<std::uint64_t>(evals);
  }
  if (has("exact_expectation")) m.exact_expectation = boolean(merged.at("exact_expectation"), "exact_expectation");
  if (has("wall_clock")) m.record_wall_clock = boolean(merged.at("wall_clock"), "wall_clock");

  if (has("baseline_eta")) config.baseline_eta = number(merged.at("baseline_eta"), "baseline_eta");
  if (has("replicates")) config.replicates = static_cast<int>(integer(merged.at("replicates"), "replicates"));
  if (config.replicates < 1) throw ConfigError("replicates: must be >= 1");
  if (has("output_dir")) config.output_dir = text(merged.at("output_dir"), "output_dir");
  if (has("jobs")) config.jobs = static_cast<int>(integer(merged.at("jobs"), "jobs"));
  if (config.jobs < 1) throw ConfigError("jobs: must be >= 1");
  if (has("gnuplot")) config.gnuplot = boolean(merged.at("gnuplot"), "gnuplot");
  if (has("budget")) {
    const long long budget = integer(merged.at("budget"), "budget");
    if (budget < 1) throw ConfigError("budget: must be >= 1");
    config.budget = static_cast<std::uint64_t>(budget);
  }

  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config;
}

nlohmann::json to_json(const ExperimentConfig& config) {
  const MinesConfig& m = config.mines;
  json out;
  out["problem"] = config.problem.to_string();
  json algos = json::array();
  for (Algo a : config.algos) algos.push_back(to_string(a));
  out["algo"] = algos;
  out["alpha"] = m.alpha;
  out["batch"] = m.batch;
  out["tau"] = m.band.tau;
  out["zeta"] = m.band.zeta;
  if (const auto* step = std::get_if<ConstantStep>(&m.eta1)) {
    out["eta1"] = step->value;
  } else {
    out["eta1"] = describe(m.eta1);
  }
  if (const auto* step = std::get_if<ConstantStep>(&m.eta2)) {
    out["eta2"] = step->value;
  } else {
    out["eta2"] = describe(m.eta2);
  }
  out["iters"] = m.max_iters;
  out["seed"] = m.seed;
  out["delta"] = m.delta;
  if (m.initial_mu.size() > 0) {
    out["initial_mu"] = std::vector<double>(m.initial_mu.data(), m.initial_mu.data() + m.initial_mu.size());
  } else {
    out["initial_mu"] = nullptr;
  }
  out["switch_mode"] = switch_mode_name(m.switch_mode);
  out["local_estimate"] = local_estimate_name(m.local_estimate);
  out["hessian_refresh"] = m.hessian_refresh;
  out["switch_window"] = m.switch_window;
  out["switch_tolerance"] = m.switch_tolerance;
  if (m.smoothness) {
    out["smoothness"] = {{"L", m.smoothness->L}, {"sigma", m.smoothness->sigma_sc}, {"gamma", m.smoothness->gamma}};
  } else {
    out["smoothness"] = nullptr;
  }
  out["trace_stride"] = m.trace_stride;
  out["target_gap"] = m.target_gap ? json(*m.target_gap) : json(nullptr);
  out["max_evals"] = m.max_evals ? json(*m.max_evals) : json(nullptr);
  out["exact_expectation"] = m.exact_expectation;
  out["wall_clock"] = m.record_wall_clock;
  out["baseline_eta"] = config.baseline_eta ? json(*config.baseline_eta) : json(nullptr);
  out["replicates"] = config.replicates;
  out["output_dir"] = config.output_dir;
  out["jobs"] = config.jobs;
  out["gnuplot"] = config.gnuplot;
  out["budget"] = config.budget;
  return out;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_seed_env(nlohmann::json& merged) {
  const char* env = std::getenv("MINES_SEED");
  if (env == nullptr || *env == '\0') return;
  merged["seed"] = parse_scalar<std::uint64_t>("MINES_SEED", env);
}

double baseline_step(const ExperimentConfig& config) {
  if (config.baseline_eta) return *config.baseline_eta;
  if (const auto* step = std::get_if<ConstantStep>(&config.mines.eta1)) return step->value;
  if (config.mines.smoothness) return 0.25 / config.mines.smoothness->L;
  throw ConfigError("baseline_eta: rgf and nes need a step size (baseline_eta, numeric eta1 or smoothness)");
}

}  // namespace mines::cli
