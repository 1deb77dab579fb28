#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "mines/problems.hpp"
#include "test_support.hpp"

using namespace mines;
using mines::testing::error_kind_of;

namespace {

const Verification kVerify{};

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mines_unit_problems";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

Eigen::VectorXd central_gradient(const Problem& p, const Eigen::VectorXd& x) {
  const double h = 1e-5 * (1.0 + x.norm());
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
    e(i) = h;
    g(i) = (p.monitor(x + e) - p.monitor(x - e)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd central_hessian_from_grad(const Oracle& o, const Eigen::VectorXd& x) {
  const double h = 1e-5 * (1.0 + x.norm());
  Eigen::MatrixXd out(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
    e(i) = h;
    out.col(i) = (o.grad(x + e) - o.grad(x - e)) / (2.0 * h);
  }
  return (out + out.transpose()) / 2.0;
}

Problem seeded_logreg() {
  const Dataset data = synthetic_dataset(20, 5, 4);
  return make_logreg(data.features, data.labels, 0.05);
}

Problem seeded_logsumexp() {
  RngStream rng(6, 0);
  Eigen::MatrixXd anchors(8, 4);
  for (Eigen::Index j = 0; j < 4; ++j) {
    for (Eigen::Index i = 0; i < 8; ++i) anchors(i, j) = rng.normal();
  }
  return make_logsumexp(anchors, 0.7, 0.2);
}

}  // namespace

TEST_CASE("quadratic examples") {
  QuadraticSpec spec;
  spec.eigenvalues = Eigen::Vector2d(1, 4);
  const Problem p = make_quadratic(spec);
  CHECK(p(Eigen::Vector2d(1, 0)) == doctest::Approx(0.5));
  CHECK(p(Eigen::Vector2d(0, 1)) == doctest::Approx(2.0));
  CHECK(p.queries() == 2);
  CHECK(p.monitor(Eigen::Vector2d(1, 1)) == doctest::Approx(2.5));
  CHECK(p.queries() == 2);

  spec.eigenvalues = Eigen::Vector2d(1, 100);
  spec.rotation_seed = 17;
  const Problem rotated = make_quadratic(spec);
  const auto h = rotated.oracle(kVerify).hessian(Eigen::Vector2d(3, -2));
  const auto values = h.eigenvalues();
  CHECK(values(0) == doctest::Approx(100.0));
  CHECK(values(1) == doctest::Approx(1.0));
  CHECK(std::abs(h(0, 1)) > 1e-6);
}

TEST_CASE("quadratic oracle is exact") {
  QuadraticSpec spec;
  spec.eigenvalues = Eigen::Vector3d(1, 7, 30);
  spec.rotation_seed = 5;
  spec.shift = Eigen::Vector3d(1, -2, 0.5);
  spec.offset = 3.0;
  const Problem p = make_quadratic(spec);
  const Oracle& o = p.oracle(kVerify);
  CHECK(o.quadratic);
  CHECK(o.min_value == 3.0);
  CHECK(o.minimizer == spec.shift);
  CHECK(o.smoothness.L == doctest::Approx(30.0));
  CHECK(o.smoothness.sigma_sc == doctest::Approx(1.0));
  CHECK(o.smoothness.gamma == 0.0);
  RngStream rng(1, 0);
  const Eigen::MatrixXd h = o.hessian(spec.shift).matrix();
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = 3.0 * standard_normal_vector(rng, 3);
    CHECK((o.hessian(x).matrix() - h).norm() == 0.0);
    CHECK((o.grad(x) - h * (x - spec.shift)).norm() < 1e-12 * (1.0 + x.norm()));
    CHECK(p.monitor(x) == doctest::Approx(3.0 + 0.5 * (x - spec.shift).dot(h * (x - spec.shift))));
  }
}

TEST_CASE("quadratic construction errors") {
  QuadraticSpec spec;
  CHECK(error_kind_of([&] { make_quadratic(spec); }) == ErrorKind::EmptySpectrum);
  spec.eigenvalues = Eigen::Vector2d(1, 0);
  CHECK(error_kind_of([&] { make_quadratic(spec); }) == ErrorKind::NonPositiveEigenvalue);
  spec.eigenvalues = Eigen::Vector2d(1, 2);
  const Problem p = make_quadratic(spec);
  CHECK(error_kind_of([&] { p(Eigen::Vector3d::Zero()); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("log-spaced quadratic") {
  const Problem p = make_quadratic_log_spaced(5, 100.0, 3);
  const Oracle& o = p.oracle(kVerify);
  const auto values = o.hessian(Eigen::VectorXd::Zero(5)).eigenvalues();
  CHECK(values(0) == doctest::Approx(100.0));
  CHECK(values(2) == doctest::Approx(10.0));
  CHECK(values(4) == doctest::Approx(1.0));
  CHECK(o.minimizer == Eigen::VectorXd::Ones(5));
}

TEST_CASE("seeded rotation is orthogonal and reproducible") {
  const Eigen::MatrixXd q = seeded_rotation(6, 9);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
  CHECK(q == seeded_rotation(6, 9));
  CHECK(q != seeded_rotation(6, 10));
}

TEST_CASE("logistic regression") {
  SUBCASE("zero feature") {
    const Problem p = make_logreg(Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Ones(1), 0.1);
    const Eigen::Vector3d w(1, -2, 0.5);
    CHECK(p.monitor(w) == doctest::Approx(std::log(2.0) + 0.05 * w.squaredNorm()));
  }
  SUBCASE("gradient at the origin") {
    const Dataset data = synthetic_dataset(20, 5, 4);
    const Problem p = make_logreg(data.features, data.labels, 0.05);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
    for (Eigen::Index i = 0; i < 20; ++i) expected -= data.labels(i) * data.features.row(i).transpose();
    expected /= 40.0;
    CHECK((p.oracle(kVerify).grad(Eigen::VectorXd::Zero(5)) - expected).norm() < 1e-14);
  }
  SUBCASE("bad labels") {
    CHECK(error_kind_of([] { make_logreg(Eigen::MatrixXd::Ones(2, 2), Eigen::Vector2d(1, 0.5), 0.1); }) ==
          ErrorKind::BadLabel);
  }
  SUBCASE("oracle minimizer is stationary") {
    const Problem p = seeded_logreg();
    const Oracle& o = p.oracle(kVerify);
    CHECK(o.grad(o.minimizer).norm() < 1e-10);
    CHECK(p.monitor(o.minimizer) == doctest::Approx(o.min_value));
    CHECK(o.smoothness.gamma > 0.0);
    CHECK(o.smoothness.sigma_sc == 0.05);
  }
}

TEST_CASE("logsumexp") {
  SUBCASE("single anchor") {
    Eigen::MatrixXd a(1, 3);
    a << 1, -2, 0.5;
    const Problem p = make_logsumexp(a, 1.0, 2.0);
    const Eigen::Vector3d z(0.3, 0.1, -1);
    CHECK(p.monitor(z) == doctest::Approx(a.row(0).dot(z) + z.squaredNorm()));
    CHECK((p.oracle(kVerify).minimizer + a.row(0).transpose() / 2.0).norm() < 1e-10);
  }
  SUBCASE("symmetric anchors") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 0, -1, 0;
    const Problem p = make_logsumexp(a, 1.0, 1.0);
    CHECK(p.monitor(Eigen::Vector2d::Zero()) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("bad temperature") {
    CHECK(error_kind_of([] { make_logsumexp(Eigen::MatrixXd::Ones(2, 2), 0.0, 1.0); }) ==
          ErrorKind::NonPositiveTemp);
  }
  SUBCASE("Hessian against finite differences of the gradient") {
    const Problem p = seeded_logsumexp();
    const Oracle& o = p.oracle(kVerify);
    RngStream rng(2, 0);
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd x = standard_normal_vector(rng, 4);
      const Eigen::MatrixXd h = o.hessian(x).matrix();
      CHECK((central_hessian_from_grad(o, x) - h).norm() / h.norm() < 1e-5);
    }
  }
}

TEST_CASE("analytic gradients match central differences for every built-in problem") {
  std::vector<Problem> problems{make_quadratic_log_spaced(4, 30.0, 1), seeded_logreg(), seeded_logsumexp()};
  RngStream rng(10, 0);
  for (const Problem& p : problems) {
    const Oracle& o = p.oracle(kVerify);
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd x = standard_normal_vector(rng, p.dim());
      const Eigen::VectorXd g = o.grad(x);
      const Eigen::VectorXd fd = central_gradient(p, x);
      INFO(p.name());
      CHECK((fd - g).norm() / std::max(g.norm(), 1e-12) < 1e-5);
    }
  }
}

TEST_CASE("query counter is exact under concurrency") {
  const Problem p = make_quadratic_log_spaced(3, 10.0, 1);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&p] {
      const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
      for (int i = 0; i < 5000; ++i) p(x);
    });
  }
  for (auto& t : threads) t.join();
  CHECK(p.queries() == 40000);
  const Problem copy = p;
  CHECK(copy.queries() == p.queries());
}

TEST_CASE("oracle access without an oracle") {
  const Problem p("blackbox", 1, [](const Eigen::VectorXd& z) { return z(0); });
  CHECK_FALSE(p.has_oracle());
  CHECK(error_kind_of([&] { p.oracle(kVerify); }) == ErrorKind::OracleRequired);
}

TEST_CASE("CSV datasets") {
  SUBCASE("zero labels are remapped") {
    const auto path = scratch("remap.csv");
    write_text(path, "1.0,2.0,1\n0.5,-1.0,0\n");
    const Dataset data = load_csv_dataset(path.string());
    CHECK(data.features.rows() == 2);
    CHECK(data.features.cols() == 2);
    CHECK(data.features(1, 1) == -1.0);
    CHECK(data.labels(0) == 1.0);
    CHECK(data.labels(1) == -1.0);
  }
  SUBCASE("non-numeric cell") {
    const auto path = scratch("bad.csv");
    write_text(path, "abc,2.0,1\n0.5,-1.0,0\n");
    try {
      load_csv_dataset(path.string());
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
  }
  SUBCASE("empty and missing files") {
    const auto path = scratch("empty.csv");
    write_text(path, "");
    CHECK(error_kind_of([&] { load_csv_dataset(path.string()); }) == ErrorKind::EmptyFile);
    CHECK(error_kind_of([&] { load_csv_dataset(scratch("missing.csv").string()); }) == ErrorKind::IoError);
  }
  SUBCASE("round trip") {
    const Dataset data = synthetic_dataset(100, 4, 12);
    const auto path = scratch("roundtrip.csv");
    write_csv_dataset(path.string(), data);
    const Dataset back = load_csv_dataset(path.string());
    CHECK(back.features == data.features);
    CHECK(back.labels == data.labels);
  }
}
