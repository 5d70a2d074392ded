#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "spinfreeze/bessel.hpp"
#include "spinfreeze/errors.hpp"
#include "spinfreeze/fitting.hpp"
#include "spinfreeze/io.hpp"

using namespace spinfreeze;

namespace {

constexpr double kXPeak2 = 3.0542369282271404;

DecayCurve gaussian_curve(double i0, double tau, double offset, int n, double t_max) {
  DecayCurve c;
  for (int i = 0; i < n; ++i) {
    const double t = t_max * i / (n - 1);
    c.storage_times.push_back(t);
    c.intensities.push_back(i0 * std::exp(-t * t / (tau * tau)) + offset);
  }
  c.label = "synthetic";
  return c;
}

DecayCurve bessel_curve(double c0, double rate, double offset, int n, double d_max) {
  DecayCurve c;
  for (int i = 0; i < n; ++i) {
    const double d = d_max * i / (n - 1);
    const double j0 = bessel_j(0, rate * d);
    c.storage_times.push_back(d);
    c.intensities.push_back(std::max(0.0, c0 * j0 * j0 + offset));
  }
  c.label = "calibration";
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("analytic Jacobians match central finite differences") {
  std::mt19937_64 rng(20240511);
  std::uniform_real_distribution<double> unit(0.2, 2.0);

  auto check_model = [&](auto f, auto jac, int np, const std::vector<double>& scales) {
    for (int draw = 0; draw < 25; ++draw) {
      std::vector<double> p(np);
      for (int a = 0; a < np; ++a) p[a] = unit(rng) * scales[a];
      const double t = unit(rng) * 3e-6;
      std::vector<double> j(np);
      jac(p.data(), t, j.data());
      // Compare in parameter-scaled units against the row magnitude, so
      // entries passing through zero are judged on the row scale.
      double row_norm = 1e-12;
      for (int a = 0; a < np; ++a) row_norm = std::max(row_norm, std::abs(j[a]) * scales[a]);
      for (int a = 0; a < np; ++a) {
        const double h = 6e-6 * scales[a];  // cbrt(eps) step for central differences
        std::vector<double> hi = p, lo = p;
        hi[a] += h;
        lo[a] -= h;
        const double fd = (f(hi.data(), t) - f(lo.data(), t)) / (2.0 * h);
        CHECK(std::abs(fd - j[a]) * scales[a] / row_norm < 1e-6);
      }
    }
  };

  // gaussian_decay: p = (I0, tau, offset)
  check_model(
      [](const double* p, double t) {
        return p[0] * std::exp(-t * t / (p[1] * p[1])) + p[2];
      },
      [](const double* p, double t, double* j) {
        const double e = std::exp(-t * t / (p[1] * p[1]));
        j[0] = e;
        j[1] = p[0] * e * 2.0 * t * t / (p[1] * p[1] * p[1]);
        j[2] = 1.0;
      },
      3, {1.0, 2.4e-6, 0.05});

  // bessel0_sq: p = (c, A, offset)
  check_model(
      [](const double* p, double t) {
        const double j0 = bessel_j(0, p[1] * t);
        return p[0] * j0 * j0 + p[2];
      },
      [](const double* p, double t, double* j) {
        const double j0 = bessel_j(0, p[1] * t);
        const double j1 = bessel_j(1, p[1] * t);
        j[0] = j0 * j0;
        j[1] = -2.0 * p[0] * j0 * j1 * t;
        j[2] = 1.0;
      },
      3, {0.8, 2.0e6, 0.02});
}

TEST_CASE("exact synthetic gaussian data is recovered to 1e-9") {
  const DecayCurve curve = gaussian_curve(1.0, 2.4e-6, 0.0, 20, 6e-6);
  const FitResult fit = fit_gaussian_decay(curve, 0.0, 1.0, false);
  CHECK(fit.converged);
  CHECK(std::abs(fit.value("tau") - 2.4e-6) / 2.4e-6 < 1e-9);
  CHECK(std::abs(fit.value("I0") - 1.0) < 1e-9);
  CHECK(fit.residual_norm < 1e-12);
  CHECK(fit.model == FitModel::gaussian_decay);
}

TEST_CASE("noisy gaussian data still recovers tau within 5 percent") {
  DecayCurve curve = gaussian_curve(1.0, 2.4e-6, 0.0, 20, 6e-6);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& y : curve.intensities) y = std::max(0.0, y + noise(rng));
  const FitResult fit = fit_gaussian_decay(curve, 0.0, 1.0, false);
  CHECK(fit.converged);
  CHECK(std::abs(fit.value("tau") - 2.4e-6) / 2.4e-6 < 0.05);
  CHECK(fit.stderr_of("tau") > 0.0);
}

TEST_CASE("fits are invariant under intensity rescaling") {
  DecayCurve curve = gaussian_curve(1.0, 2.4e-6, 0.0, 18, 5e-6);
  const FitResult a = fit_gaussian_decay(curve, 0.0, 1.0, false);
  for (auto& y : curve.intensities) y *= 137.0;
  const FitResult b = fit_gaussian_decay(curve, 0.0, 1.0, false);
  CHECK(std::abs(a.value("tau") - b.value("tau")) / a.value("tau") < 1e-9);
  CHECK(b.value("I0") == doctest::Approx(137.0 * a.value("I0")).epsilon(1e-9));
}

TEST_CASE("points outside the window cannot influence the fit") {
  DecayCurve curve = gaussian_curve(1.0, 2.4e-6, 0.0, 24, 8e-6);
  const double wmin = 1.0e-6, wmax = 6.0e-6;
  const FitResult before = fit_gaussian_decay(curve, wmin, wmax, false);
  for (std::size_t i = 0; i < curve.storage_times.size(); ++i)
    if (curve.storage_times[i] < wmin || curve.storage_times[i] > wmax)
      curve.intensities[i] = 7.7;  // garbage outside the window
  const FitResult after = fit_gaussian_decay(curve, wmin, wmax, false);
  CHECK(before.value("tau") == after.value("tau"));  // bitwise
  CHECK(before.value("I0") == after.value("I0"));
  CHECK(before.window_min >= wmin);
  CHECK(before.window_max <= wmax);
}

TEST_CASE("window must contain at least four points") {
  const DecayCurve curve = gaussian_curve(1.0, 2.4e-6, 0.0, 20, 6e-6);
  CHECK_THROWS_AS(fit_gaussian_decay(curve, 5.5e-6, 6.0e-6, false), std::invalid_argument);
}

TEST_CASE("offset floor is recovered when enabled") {
  const DecayCurve curve = gaussian_curve(0.9, 2.0e-6, 0.04, 25, 8e-6);
  const FitResult fit = fit_gaussian_decay(curve, 0.0, 1.0, true);
  CHECK(fit.converged);
  CHECK(fit.value("offset") == doctest::Approx(0.04).epsilon(1e-6));
  CHECK(fit.value("tau") == doctest::Approx(2.0e-6).epsilon(1e-7));
}

TEST_CASE("non-convergence is reported with diagnostics, not silently") {
  DecayCurve curve = gaussian_curve(1.0, 2.4e-6, 0.0, 20, 6e-6);
  curve.intensities[3] = 1e306;  // drives the residual out of range
  const FitResult fit = fit_gaussian_decay(curve, 0.0, 1.0, false);
  CHECK(!fit.converged);
  CHECK(!fit.diagnostics.empty());
}

TEST_CASE("bessel calibration inverts its generator") {
  // Rate chosen so the optimal pulse lasts 1.25 us.
  const double rate = kXPeak2 / 1.25e-6;
  const DecayCurve curve = bessel_curve(0.8, rate, 0.0, 25, 3e-6);
  const CalibrationResult cal = fit_bessel0(curve);
  CHECK(cal.fit.converged);
  CHECK(std::abs(cal.rate - rate) / rate < 1e-6);
  CHECK(std::abs(cal.tau_opt - 1.25e-6) / 1.25e-6 < 0.01);
  // The zero-duration point is the full intensity c + offset.
  CHECK(cal.fit.value("c") + cal.fit.value("offset") ==
        doctest::Approx(curve.intensities[0]).epsilon(1e-6));
}

TEST_CASE("degenerate calibration curves are rejected") {
  DecayCurve flat;
  for (int i = 0; i < 10; ++i) {
    flat.storage_times.push_back(i * 1e-7);
    flat.intensities.push_back(0.5);
  }
  CHECK_THROWS_AS(fit_bessel0(flat), std::invalid_argument);

  // A curve that never reaches the first Bessel zero.
  const DecayCurve shallow = bessel_curve(0.8, kXPeak2 / 1.25e-6, 0.0, 10, 0.4e-6);
  CHECK_THROWS_AS(fit_bessel0(shallow), std::invalid_argument);
}

TEST_CASE("experimental csv loader enforces the schema") {
  const auto path = temp_file("spinfreeze_test_exp.csv");

  {
    std::ofstream out(path);
  }
  CHECK_THROWS_AS(load_experimental_csv(path), IoError);

  {
    std::ofstream out(path);
    out << "# comment only\nstorage_time_us,counts_normalized\n";
  }
  try {
    load_experimental_csv(path);
    FAIL("expected rejection of header-only file");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("storage_time_us,counts_normalized") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << "time,counts\n0,1\n";
  }
  CHECK_THROWS_AS(load_experimental_csv(path), IoError);

  {
    std::ofstream out(path);
    out << "storage_time_us,counts_normalized\n0.0,1.0\nbroken,0.5\n";
  }
  try {
    load_experimental_csv(path);
    FAIL("expected parse failure with a line number");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << "storage_time_us,counts_normalized\n2.0,1.0\n1.0,0.5\n";
  }
  CHECK_THROWS_AS(load_experimental_csv(path), IoError);

  {
    std::ofstream out(path);
    out << "storage_time_us,counts_normalized\n1.0,1.0\n2.0,-0.5\n";
  }
  CHECK_THROWS_AS(load_experimental_csv(path), IoError);

  CHECK_THROWS_AS(load_experimental_csv(temp_file("does_not_exist_xyz.csv")), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("experimental csv round trip is the identity") {
  DecayCurve curve;
  curve.source = DecayCurve::Source::experimental;
  for (int i = 0; i < 12; ++i) {
    curve.storage_times.push_back((0.7 + 3.9 * i) * 1e-6);
    curve.intensities.push_back(std::exp(-0.1 * i) * 0.93);
  }
  const auto path = temp_file("spinfreeze_roundtrip.csv");
  write_experimental_csv(curve, path);
  const DecayCurve loaded = load_experimental_csv(path);
  REQUIRE(loaded.storage_times.size() == curve.storage_times.size());
  for (std::size_t i = 0; i < curve.storage_times.size(); ++i) {
    CHECK(loaded.storage_times[i] ==
          doctest::Approx(curve.storage_times[i]).epsilon(1e-15));
    CHECK(loaded.intensities[i] == curve.intensities[i]);  // bitwise
  }
  CHECK(loaded.source == DecayCurve::Source::experimental);
  std::filesystem::remove(path);
}
