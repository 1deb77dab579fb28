#include "mines/problems.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include <Eigen/Dense>

#include "mines/rng.hpp"

namespace mines {

Problem::Problem(std::string name, Eigen::Index dim, Objective objective, std::optional<Oracle> oracle)
    : name_(std::move(name)), dim_(dim), objective_(std::move(objective)), oracle_(std::move(oracle)) {
  if (dim_ < 1) throw Error(ErrorKind::InvalidArgument, "problem dimension must be >= 1");
}

Problem::Problem(const Problem& other)
    : name_(other.name_), dim_(other.dim_), objective_(other.objective_), oracle_(other.oracle_),
      queries_(other.queries()) {}

Problem& Problem::operator=(const Problem& other) {
  if (this != &other) {
    name_ = other.name_;
    dim_ = other.dim_;
    objective_ = other.objective_;
    oracle_ = other.oracle_;
    queries_.store(other.queries(), std::memory_order_relaxed);
  }
  return *this;
}

double Problem::operator()(const Eigen::VectorXd& z) const {
  if (z.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch,
                "query of size " + std::to_string(z.size()) + " for a problem of dimension " + std::to_string(dim_));
  }
  queries_.fetch_add(1, std::memory_order_relaxed);
  return objective_(z);
}

const Oracle& Problem::oracle(Verification) const {
  if (!oracle_) throw Error(ErrorKind::OracleRequired, "problem '" + name_ + "' has no oracle");
  return *oracle_;
}

Eigen::MatrixXd seeded_rotation(Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed, 0x726f74ULL);
  Eigen::MatrixXd gaussian(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Problem make_quadratic(const QuadraticSpec& spec) {
  const Eigen::Index d = spec.eigenvalues.size();
  if (d == 0) throw Error(ErrorKind::EmptySpectrum, "quadratic needs at least one eigenvalue");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(spec.eigenvalues(i) > 0.0)) {
      throw Error(ErrorKind::NonPositiveEigenvalue, "eigenvalue " + std::to_string(i) + " is not positive");
    }
  }
  const Eigen::VectorXd shift = spec.shift.size() == 0 ? Eigen::VectorXd::Zero(d) : spec.shift;
  if (shift.size() != d) throw Error(ErrorKind::DimensionMismatch, "shift length differs from spectrum length");

  const Eigen::MatrixXd q =
      spec.rotation_seed ? seeded_rotation(d, *spec.rotation_seed) : Eigen::MatrixXd::Identity(d, d);
  const SymMatrixd hessian(q.transpose() * spec.eigenvalues.asDiagonal() * q);
  const Eigen::MatrixXd h = hessian.matrix();
  const double offset = spec.offset;

  Oracle oracle;
  oracle.grad = [h, shift](const Eigen::VectorXd& z) -> Eigen::VectorXd { return h * (z - shift); };
  oracle.hessian = [hessian](const Eigen::VectorXd&) { return hessian; };
  oracle.minimizer = shift;
  oracle.min_value = offset;
  oracle.smoothness = {spec.eigenvalues.maxCoeff(), spec.eigenvalues.minCoeff(), 0.0};
  oracle.quadratic = true;

  auto objective = [h, shift, offset](const Eigen::VectorXd& z) {
    const Eigen::VectorXd e = z - shift;
    return offset + 0.5 * e.dot(h * e);
  };
  return Problem("quadratic", d, std::move(objective), std::move(oracle));
}

Problem make_quadratic_log_spaced(Eigen::Index d, double kappa, std::uint64_t rotation_seed) {
  if (d < 1) throw Error(ErrorKind::EmptySpectrum, "quadratic needs d >= 1");
  if (!(kappa >= 1.0)) throw Error(ErrorKind::InvalidArgument, "condition number must be >= 1");
  QuadraticSpec spec;
  spec.eigenvalues.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    spec.eigenvalues(i) = std::pow(kappa, t);
  }
  spec.rotation_seed = rotation_seed;
  spec.shift = Eigen::VectorXd::Ones(d);
  return make_quadratic(spec);
}

namespace {

// Damped Newton for the strongly convex built-ins; used once per problem to
// populate μ* and f*.
Eigen::VectorXd newton_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                const std::function<SymMatrixd(const Eigen::VectorXd&)>& hessian,
                                Eigen::VectorXd x) {
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd g = grad(x);
    if (g.norm() < 1e-13) break;
    const Eigen::VectorXd step = hessian(x).matrix().llt().solve(g);
    double t = 1.0;
    const double fx = f(x);
    while (t > 1e-12 && f(x - t * step) > fx - 0.25 * t * g.dot(step)) t *= 0.5;
    x -= t * step;
  }
  return x;
}

double logistic_loss(double margin) {
  return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

// 1 / (1 + e^{t}) without overflow.
double sigmoid_neg(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double largest_eigenvalue(const Eigen::MatrixXd& m) { return SymMatrixd(m).eigenvalues()(0); }

}  // namespace

Problem make_logreg(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, double reg) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "logistic regression needs at least one sample");
  if (labels.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(n) + " feature rows but " +
                                                  std::to_string(labels.size()) + " labels");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw Error(ErrorKind::BadLabel, "label at row " + std::to_string(i + 1) + " is not +-1");
    }
  }
  if (!(reg > 0.0)) throw Error(ErrorKind::InvalidArgument, "regularization must be positive");

  // Rows pre-multiplied by their labels: margins are yx·w.
  const Eigen::MatrixXd signed_x = labels.asDiagonal() * features;
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [signed_x, reg, inv_n](const Eigen::VectorXd& w) {
    const Eigen::VectorXd margins = signed_x * w;
    double total = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) total += logistic_loss(margins(i));
    return inv_n * total + 0.5 * reg * w.squaredNorm();
  };
  auto grad = [signed_x, reg, inv_n](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    const Eigen::VectorXd margins = signed_x * w;
    Eigen::VectorXd weights(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) weights(i) = -sigmoid_neg(margins(i));
    return inv_n * signed_x.transpose() * weights + reg * w;
  };
  auto hessian = [signed_x, reg, inv_n](const Eigen::VectorXd& w) {
    const Eigen::VectorXd margins = signed_x * w;
    Eigen::VectorXd curvature(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double s = sigmoid_neg(margins(i));
      curvature(i) = s * (1.0 - s);
    }
    Eigen::MatrixXd h = inv_n * signed_x.transpose() * curvature.asDiagonal() * signed_x;
    h.diagonal().array() += reg;
    return SymMatrixd(h);
  };

  Oracle oracle;
  oracle.grad = grad;
  oracle.hessian = hessian;
  oracle.minimizer = newton_minimize(objective, grad, hessian, Eigen::VectorXd::Zero(d));
  oracle.min_value = objective(oracle.minimizer);
  double cubic = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) cubic += std::pow(features.row(i).norm(), 3);
  oracle.smoothness = {largest_eigenvalue(0.25 * inv_n * features.transpose() * features) + reg, reg,
                       cubic * inv_n / (6.0 * std::sqrt(3.0))};
  oracle.quadratic = false;
  return Problem("logreg", d, std::move(objective), std::move(oracle));
}

Problem make_logsumexp(const Eigen::MatrixXd& anchors, double temp, double reg) {
  const Eigen::Index m = anchors.rows();
  const Eigen::Index d = anchors.cols();
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "log-sum-exp needs at least one anchor");
  if (!(temp > 0.0)) throw Error(ErrorKind::NonPositiveTemp, "temperature must be positive");
  if (!(reg > 0.0)) throw Error(ErrorKind::InvalidArgument, "regularization must be positive");

  auto softmax = [anchors, temp](const Eigen::VectorXd& z, double& lse) -> Eigen::VectorXd {
    const Eigen::VectorXd s = anchors * z / temp;
    const double top = s.maxCoeff();
    Eigen::VectorXd p = (s.array() - top).exp();
    const double total = p.sum();
    lse = top + std::log(total);
    return p / total;
  };
  auto objective = [softmax, temp, reg](const Eigen::VectorXd& z) {
    double lse = 0.0;
    softmax(z, lse);
    return temp * lse + 0.5 * reg * z.squaredNorm();
  };
  auto grad = [softmax, anchors, reg](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    double lse = 0.0;
    const Eigen::VectorXd p = softmax(z, lse);
    return anchors.transpose() * p + reg * z;
  };
  auto hessian = [softmax, anchors, temp, reg](const Eigen::VectorXd& z) {
    double lse = 0.0;
    const Eigen::VectorXd p = softmax(z, lse);
    const Eigen::MatrixXd cov = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
    Eigen::MatrixXd h = anchors.transpose() * cov * anchors / temp;
    h.diagonal().array() += reg;
    return SymMatrixd(h);
  };

  Oracle oracle;
  oracle.grad = grad;
  oracle.hessian = hessian;
  oracle.minimizer = newton_minimize(objective, grad, hessian, Eigen::VectorXd::Zero(d));
  oracle.min_value = objective(oracle.minimizer);
  const double gram_top = largest_eigenvalue(anchors.transpose() * anchors);
  const double max_row = anchors.rowwise().norm().maxCoeff();
  oracle.smoothness = {gram_top / temp + reg, reg, 2.0 * max_row * gram_top / (temp * temp)};
  oracle.quadratic = false;
  return Problem("logsumexp", d, std::move(objective), std::move(oracle));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    std::vector<double> values;
    std::string_view rest(line);
    std::size_t column = 0;
    while (true) {
      ++column;
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::ParseError, "row " + std::to_string(row_number) + ", column " +
                                               std::to_string(column) + ": '" + std::string(cell) +
                                               "' is not a number");
      }
      values.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (values.size() < 2) {
      throw Error(ErrorKind::ParseError,
                  "row " + std::to_string(row_number) + ": need at least one feature and a label");
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row_number) + " has " +
                                             std::to_string(values.size()) + " columns, expected " +
                                             std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyFile, "'" + path + "' contains no rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Dataset data{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  bool has_zero = false;
  bool has_minus = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = r[static_cast<std::size_t>(j)];
    const double label = r.back();
    if (label != 1.0 && label != -1.0 && label != 0.0) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(i + 1) + ": label must be -1, 0 or 1");
    }
    has_zero = has_zero || label == 0.0;
    has_minus = has_minus || label == -1.0;
    data.labels(i) = label;
  }
  if (has_zero && has_minus) {
    throw Error(ErrorKind::ParseError, "labels mix the {0,1} and {-1,+1} conventions");
  }
  if (has_zero) data.labels = (data.labels.array() == 0.0).select(-1.0, data.labels);
  return data;
}

void write_csv_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  char buffer[32];
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", data.features(i, j));
      out << buffer << ',';
    }
    out << (data.labels(i) > 0.0 ? "1" : "-1") << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

Dataset synthetic_dataset(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed, 0x6461746141ULL);
  const Eigen::VectorXd w_true = standard_normal_vector(rng, d);
  Dataset data{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    data.features.row(i) = standard_normal_vector(rng, d).transpose();
    const double score = data.features.row(i).dot(w_true) + 0.5 * rng.normal();
    data.labels(i) = score >= 0.0 ? 1.0 : -1.0;
  }
  return data;
}

}  // namespace mines
