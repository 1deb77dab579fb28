#include <algorithm>
#include <cmath>

#include "mines/theory.hpp"
#include "test_support.hpp"

using namespace mines;

namespace {

bool has_warning(const ConstantsReport& r, const std::string& name) {
  return std::find(r.warnings.begin(), r.warnings.end(), name) != r.warnings.end();
}

MinesConfig config_with(int b, double alpha, double tau, double zeta) {
  MinesConfig c;
  c.batch = b;
  c.alpha = alpha;
  c.band = SpectralBandd(tau, zeta);
  return c;
}

}  // namespace

TEST_CASE("batch constants for d = b = 4") {
  const BatchConstants bc = batch_constants(4, 4, 0.05);
  CHECK(bc.c1 == doctest::Approx(std::pow(4.0 + std::sqrt(2.0 * std::log(40.0)), 2)));
  CHECK(bc.c1 == doctest::Approx(45.10).epsilon(1e-3));
  CHECK(bc.c3 == doctest::Approx(8.0 + 3.0 * std::log(20.0)));
  CHECK(bc.c3 == doctest::Approx(16.99).epsilon(1e-3));
  CHECK(bc.c2 == doctest::Approx(-2.92).epsilon(1e-3));
}

TEST_CASE("non-positive c2 is flagged") {
  const SmoothnessSpec spec{10.0, 1.0, 0.0};
  const auto r4 = compute_constants(spec, config_with(4, 1e-3, 0.5, 20.0), 4, 1000, std::nullopt, std::nullopt);
  CHECK(r4.constants.c2 < 0.0);
  CHECK(has_warning(r4, "C2NotPositive"));
  const auto r1 = compute_constants(spec, config_with(1, 1e-3, 0.5, 20.0), 4, 1000, std::nullopt, std::nullopt);
  CHECK(r1.constants.c2 == doctest::Approx(1.0 - 2.0 * std::sqrt(std::log(20.0))));
  CHECK(has_warning(r1, "C2NotPositive"));
  const auto r64 = compute_constants(spec, config_with(64, 1e-3, 0.5, 20.0), 4, 1000, std::nullopt, std::nullopt);
  CHECK(r64.constants.c2 > 0.0);
  CHECK_FALSE(has_warning(r64, "C2NotPositive"));
}

TEST_CASE("every smoothing error floor vanishes for quadratics") {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const double sigma = 0.1 + rng.uniform();
    const double L = sigma * (1.0 + 100.0 * rng.uniform());
    const SmoothnessSpec spec{L, sigma, 0.0};
    const int b = 1 + static_cast<int>(50 * rng.uniform());
    const auto r = compute_constants(spec, config_with(b, 0.5 * rng.uniform(), sigma / 2, 2 * L), 5, 5000, 3.0,
                                     1.0);
    CHECK(r.constants.delta_alpha_1 == 0.0);
    CHECK(r.constants.delta_alpha_2 == 0.0);
    CHECK(r.constants.C3 == 0.0);
    CHECK(std::isinf(r.constants.alpha_max));
    CHECK_FALSE(has_warning(r, "AlphaAboveMax"));
  }
}

TEST_CASE("zero smoothing gives a zero bias bound") {
  const SmoothnessSpec spec{10.0, 1.0, 2.0};
  const auto r = compute_constants(spec, config_with(50, 0.0, 0.5, 20.0), 4, 1000, 1.0, 1.0);
  CHECK(r.constants.mu_gap_bound == 0.0);
  CHECK(r.constants.mu_dist_bound == 0.0);
}

TEST_CASE("optional constants need their inputs") {
  const SmoothnessSpec spec{10.0, 1.0, 2.0};
  const auto config = config_with(200, 1e-3, 0.5, 20.0);
  const auto none = compute_constants(spec, config, 4, 1000, std::nullopt, std::nullopt);
  CHECK_FALSE(none.constants.C2.has_value());
  CHECK_FALSE(none.constants.C.has_value());
  const auto with_gap = compute_constants(spec, config, 4, 1000, 2.0, std::nullopt);
  REQUIRE(with_gap.constants.C2.has_value());
  CHECK(*with_gap.constants.C2 > 0.0);
  CHECK_FALSE(with_gap.constants.C.has_value());
  const auto full = compute_constants(spec, config, 4, 1000, 2.0, 1.5);
  REQUIRE(full.constants.C.has_value());
  CHECK(*full.constants.C > 0.0);
}

TEST_CASE("a large smoothing radius triggers the alpha warning") {
  const SmoothnessSpec spec{10.0, 1.0, 5.0};
  const auto r = compute_constants(spec, config_with(50, 100.0, 0.5, 20.0), 4, 1000, std::nullopt, std::nullopt);
  CHECK(std::isfinite(r.constants.alpha_max));
  CHECK(has_warning(r, "AlphaAboveMax"));
}

TEST_CASE("constant calculators are pure") {
  const SmoothnessSpec spec{7.0, 0.3, 1.2};
  const auto config = config_with(30, 0.01, 0.2, 14.0);
  const auto a = compute_constants(spec, config, 6, 2000, 1.0, 2.0).constants;
  const auto b = compute_constants(spec, config, 6, 2000, 1.0, 2.0).constants;
  CHECK(a.c1 == b.c1);
  CHECK(a.delta_alpha_1 == b.delta_alpha_1);
  CHECK(a.delta_alpha_2 == b.delta_alpha_2);
  CHECK(a.C1 == b.C1);
  CHECK(*a.C == *b.C);
  CHECK(a.sigma_star_dist_bound == b.sigma_star_dist_bound);
}

TEST_CASE("invalid inputs") {
  const SmoothnessSpec spec{1.0, 0.5, 0.0};
  CHECK_THROWS_AS(batch_constants(0, 1, 0.05), Error);
  CHECK_THROWS_AS(batch_constants(2, 1, 1.5), Error);
  CHECK_THROWS_AS(compute_constants(spec, config_with(1, 1e-3, 0.1, 1.0), 2, 0, std::nullopt, std::nullopt), Error);
}
