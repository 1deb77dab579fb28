#include <cmath>

#include "mines/estimators.hpp"
#include "mines/geometry.hpp"
#include "test_support.hpp"

using namespace mines;
using mines::testing::error_kind_of;
using mines::testing::random_spd;
using mines::testing::random_symmetric;

TEST_CASE("projection examples") {
  SUBCASE("diagonal clipping") {
    const auto p = project_spectral_band(SymMatrixd::diagonal(Eigen::Vector3d(0.5, 5, 50)), SpectralBandd(1, 10));
    CHECK(p.matrix.frobenius_distance(SymMatrixd::diagonal(Eigen::Vector3d(1, 5, 10))) < 1e-12);
    CHECK(p.report.clipped_low == 1);
    CHECK(p.report.clipped_high == 1);
    CHECK(p.report.moved == doctest::Approx(std::sqrt(0.25 + 1600.0)));
  }
  SUBCASE("feasible input is a fixed point") {
    Eigen::MatrixXd a(2, 2);
    a << 3, 1, 1, 3;
    const SymMatrixd s(a);
    const auto p = project_spectral_band(s, SpectralBandd(1, 10));
    CHECK(p.matrix.matrix() == s.matrix());
    CHECK(p.report.moved == 0.0);
  }
  SUBCASE("2x2 with negative eigenvalue") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 3, 3, 2;
    Eigen::MatrixXd expected(2, 2);
    expected << 2.25, 1.75, 1.75, 2.25;
    const auto p = project_spectral_band(SymMatrixd(a), SpectralBandd(0.5, 4));
    CHECK((p.matrix.matrix() - expected).norm() < 1e-12);
  }
}

TEST_CASE("projection properties over random matrices") {
  RngStream rng(77, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index d = 1 + trial % 8;
    const double tau = 0.1 + rng.uniform();
    const SpectralBandd band(tau, tau + 5.0 * rng.uniform());
    const SymMatrixd a(random_symmetric(rng, d, 8.0));
    const SymMatrixd b(random_symmetric(rng, d, 8.0));
    const auto pa = project_spectral_band(a, band).matrix;
    const auto pb = project_spectral_band(b, band).matrix;
    REQUIRE(band_contains(band, pa));
    const auto ppa = project_spectral_band(SymMatrixd(pa.matrix()), band).matrix;
    CHECK(ppa.frobenius_distance(pa) < 1e-12 * std::max(1.0, pa.matrix().norm()));
    CHECK(pa.frobenius_distance(pb) <= a.frobenius_distance(b) + 1e-10);
    if (trial % 10 == 0) {
      const double own = a.frobenius_distance(pa);
      for (int j = 0; j < 100; ++j) {
        const SymMatrixd x(random_spd(rng, d, band.tau, band.zeta));
        REQUIRE(band_contains(band, x));
        CHECK(own <= a.frobenius_distance(x) + 1e-10);
      }
    }
  }
}

TEST_CASE("Bregman divergence") {
  SUBCASE("self divergence is zero") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 0.5, 0.5, 1;
    CHECK(std::abs(bregman_divergence(SymMatrixd(a), SymMatrixd(a), 0.7)) < 1e-14);
  }
  SUBCASE("scalar example") {
    const double value = bregman_divergence(SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, 2.0)),
                                            SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, 1.0)), 1.0);
    CHECK(value == doctest::Approx(-0.5 * (std::log(2.0) - 1.0)).epsilon(1e-12));
    CHECK(value == doctest::Approx(0.15343).epsilon(1e-4));
  }
  SUBCASE("nonnegative over random positive definite pairs") {
    RngStream rng(3, 0);
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::Index d = 1 + trial % 10;
      const SymMatrixd s1(random_spd(rng, d, 0.05, 20.0));
      const SymMatrixd s2(random_spd(rng, d, 0.05, 20.0));
      REQUIRE(bregman_divergence(s1, s2, 0.5 + rng.uniform()) >= -1e-10);
    }
  }
  SUBCASE("indefinite argument is rejected") {
    CHECK(error_kind_of([] {
            bregman_divergence(SymMatrixd::diagonal(Eigen::Vector2d(1, -1)), SymMatrixd::identity(2), 1.0);
          }) == ErrorKind::NotPositiveDefinite);
  }
}

TEST_CASE("mirror step examples") {
  const SpectralBandd band(0.1, 10);
  const auto one = SymMatrixd::identity(1);
  CHECK(mirror_step(one, SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, 0.5)), 1.0, band).matrix(0, 0) ==
        doctest::Approx(1.5));
  const auto clipped = mirror_step(one, SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, 20.0)), 1.0, band);
  CHECK(clipped.matrix(0, 0) == doctest::Approx(10.0));
  CHECK(clipped.report.clipped_high == 1);

  RngStream rng(9, 0);
  const SymMatrixd s(random_spd(rng, 2, 1.0, 3.0));
  const SymMatrixd g(random_symmetric(rng, 2, 4.0));
  const auto step = mirror_step(s, g, 0.3, band);
  const auto composed = project_spectral_band(SymMatrixd(s.matrix() + 0.3 * g.matrix()), band);
  CHECK(step.matrix.frobenius_distance(composed.matrix) < 1e-14);
  CHECK(error_kind_of([&] { mirror_step(s, SymMatrixd::identity(3), 1.0, band); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("mirror step minimizes the linearized objective plus Bregman term in one dimension") {
  // Q_α on f(z) = ½hz² is h·s·α²/2 - (α²/2)log s + const in s = Σ; the unconstrained
  // mirror step must equal argmin_s η₂·(∂Q/∂Σ)·s + B_R(s, s_k).
  const double h = 3.0;
  const double alpha = 0.4;
  const double eta2 = 0.2;
  const double sk = 0.8;
  const double dq = alpha * alpha / 2.0 * (h - 1.0 / sk);
  auto objective = [&](double s) {
    return eta2 * dq * s +
           bregman_divergence(SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, s)),
                              SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, sk)), alpha);
  };
  // Golden-section search on (1e-3, 10).
  double lo = 1e-3;
  double hi = 10.0;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - ratio * (hi - lo);
    const double b = lo + ratio * (hi - lo);
    if (objective(a) < objective(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double s_min = (lo + hi) / 2.0;
  const double g_tilde = 2.0 / (alpha * alpha) * dq;
  const auto step = mirror_step(SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, 1.0 / sk)),
                                SymMatrixd::diagonal(Eigen::VectorXd::Constant(1, g_tilde)), eta2,
                                SpectralBandd(1e-3, 1e3));
  CHECK(1.0 / step.matrix(0, 0) == doctest::Approx(s_min).epsilon(1e-6));
}
