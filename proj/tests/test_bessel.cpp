#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spinfreeze/bessel.hpp"

using spinfreeze::bessel_j;
using spinfreeze::find_first_peak;

TEST_CASE("special values at the origin") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(2, 0.0) == 0.0);
  CHECK(bessel_j(64, 0.0) == 0.0);
}

TEST_CASE("quadrature oracle agreement") {
  for (int n : {0, 1, 2, 3, 5, 8, 13, 20}) {
    for (double x : {0.05, 0.3, 0.9, 2.0, 3.054, 5.5, 10.0, 17.3, 25.0, 40.0, 50.0}) {
      const double ref = oracles::bessel_quadrature(n, x);
      CHECK(std::abs(bessel_j(n, x) - ref) < 1e-10);
    }
  }
}

TEST_CASE("negative order and argument reflections") {
  for (int n : {1, 2, 3, 7}) {
    for (double x : {0.2, 1.7, 6.3}) {
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      CHECK(bessel_j(-n, x) == doctest::Approx(sign * bessel_j(n, x)).epsilon(1e-14));
      CHECK(bessel_j(n, -x) == doctest::Approx(sign * bessel_j(n, x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("three-term recurrence") {
  for (int n = 1; n <= 20; ++n) {
    for (double x = 0.1; x < 40.0; x += 3.7) {
      const double lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
      const double rhs = (2.0 * n / x) * bessel_j(n, x);
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("squared sum rule at x = 3") {
  double sum = 0.0;
  for (int n = -40; n <= 40; ++n) sum += bessel_j(n, 3.0) * bessel_j(n, 3.0);
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(bessel_j(65, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_j(-65, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_j(0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(bessel_j(0, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("first peak of J_2 and the efficiency ceiling") {
  const auto peak = find_first_peak(2);
  // Dense-scan oracle value, step 1e-6 with local refinement.
  CHECK(std::abs(peak.x_peak - 3.0542369282) < 1e-8);
  CHECK(peak.value == doctest::Approx(0.4864986822690033).epsilon(1e-10));
  const double ceiling = std::pow(peak.value, 4);
  CHECK(ceiling == doctest::Approx(0.056).epsilon(0.01));  // about 5.6 %
  CHECK(std::abs(ceiling - 0.05601788054216498) < 1e-10);
}

TEST_CASE("first peak against the dense-scan oracle") {
  const double scanned = oracles::dense_scan_first_peak(2);
  CHECK(std::abs(find_first_peak(2).x_peak - scanned) < 2e-6);
}

TEST_CASE("first peak for n = 0 sits at the origin") {
  const auto peak = find_first_peak(0);
  CHECK(peak.x_peak == 0.0);
  CHECK(peak.value == 1.0);
}

TEST_CASE("first peaks are critical points of J_n") {
  for (int n : {1, 2, 5, 16}) {
    const auto peak = find_first_peak(n);
    const double deriv = 0.5 * (bessel_j(n - 1, peak.x_peak) - bessel_j(n + 1, peak.x_peak));
    CHECK(std::abs(deriv) < 1e-9);
    CHECK(peak.value > 0.0);
  }
}

TEST_CASE("peak order validation") {
  CHECK_THROWS_AS(find_first_peak(-1), std::invalid_argument);
  CHECK_THROWS_AS(find_first_peak(17), std::invalid_argument);
}
