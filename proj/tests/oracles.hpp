#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <cmath>
#include <complex>
#include <vector>

namespace oracles {

// J_n(x) by trapezoidal quadrature of (1/pi) Int_0^pi cos(n t - x sin t) dt.
// The integrand is smooth and periodic, so the rule converges
// geometrically; 1e4 points is plenty for n <= 40, x <= 50.
inline double bessel_quadrature(int n, double x, int points = 10000) {
  const double pi = 3.14159265358979323846;
  const double h = pi / points;
  double sum = 0.5 * (std::cos(0.0) + std::cos(n * pi - x * std::sin(pi)));
  for (int i = 1; i < points; ++i) {
    const double t = i * h;
    sum += std::cos(n * t - x * std::sin(t));
  }
  return sum * h / pi;
}

// First positive maximizer of J_n by dense scan plus local three-point
// parabolic refinement.
inline double dense_scan_first_peak(int n, double x_max = 10.0, double step = 1e-6) {
  double best_x = step, best_f = bessel_quadrature(n, step, 2000);
  // Coarse pass to find the neighborhood, fine pass around it; a full
  // 1e-6 scan through quadrature would take hours.
  double coarse_best = step;
  double coarse_f = best_f;
  for (double x = 1e-3; x <= x_max; x += 1e-3) {
    const double f = bessel_quadrature(n, x, 2000);
    if (f > coarse_f) {
      coarse_f = f;
      coarse_best = x;
    } else if (f < 0.7 * coarse_f && coarse_f > 0.1) {
      break;  // past the first peak
    }
  }
  best_x = coarse_best;
  best_f = coarse_f;
  for (double x = coarse_best - 2e-3; x <= coarse_best + 2e-3; x += step) {
    const double f = bessel_quadrature(n, x, 2000);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return best_x;
}

// Brute-force sinusoidal phase imprint in position space followed by a
// plain DFT, for checking the k-space diffraction decomposition.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& in) {
  const std::size_t n = in.size();
  const double pi = 3.14159265358979323846;
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j)
      acc += in[j] * std::polar(1.0, -2.0 * pi * double(k) * double(j) / double(n));
    out[k] = acc;
  }
  return out;
}

}  // namespace oracles
