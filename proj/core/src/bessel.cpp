#include "spinfreeze/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spinfreeze {

namespace {

// Power series around the origin; converges in a handful of terms for
// |x| < 0.5 with no cancellation worth worrying about.
double series_jn(int n, double x) {
  const double half_x = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= half_x / k;  // (x/2)^n / n!
  const double m_sq = -half_x * half_x;
  double sum = term;
  for (int m = 0; m < 40; ++m) {
    term *= m_sq / ((m + 1.0) * (n + m + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// Miller's algorithm: downward recurrence from a start order well above
// max(n, x), normalized with J_0 + 2*sum_{k>=1} J_{2k} = 1. Stable for
// every order at once; the start offset keeps the contamination from the
// growing solution below double precision.
double miller_jn(int n, double x) {
  const double nx = std::max(static_cast<double>(n), x);
  int m = n + 20 + static_cast<int>(std::ceil(12.0 * std::sqrt(nx + 1.0)));
  if (m % 2 != 0) ++m;

  double jp = 0.0;        // J_{k+1}
  double jc = 1e-30;      // J_k (arbitrary seed, normalized away)
  double norm = 2.0 * jc; // accumulates J_0 + 2*sum J_{2k}; m is even
  double result = 0.0;
  for (int k = m; k >= 1; --k) {
    const double jm = (2.0 * k / x) * jc - jp;
    jp = jc;
    jc = jm;
    if (std::abs(jc) > 1e250) {  // rescale to dodge overflow
      jc *= 1e-250;
      jp *= 1e-250;
      norm *= 1e-250;
      result *= 1e-250;
    }
    if (k - 1 == n) result = jc;       // jc now holds J_{k-1}
    if ((k - 1) % 2 == 0) norm += (k - 1 == 0) ? jc : 2.0 * jc;
  }
  return result / norm;
}

}  // namespace

double bessel_j(int n, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("bessel_j: x must be finite");
  if (n > 64 || n < -64) throw std::invalid_argument("bessel_j: |n| must be <= 64");

  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n & 1) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (n & 1) sign = -sign;
  }
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < 0.5) return sign * series_jn(n, x);
  return sign * miller_jn(n, x);
}

namespace {

// d/dx J_n = (J_{n-1} - J_{n+1}) / 2
double bessel_j_prime(int n, double x) {
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

}  // namespace

BesselPeak find_first_peak(int n) {
  if (n < 0 || n > 16) throw std::invalid_argument("find_first_peak: n must be in [0, 16]");
  if (n == 0) return BesselPeak{0, 0.0, 1.0};

  // J_n rises from zero to its first maximum just below the first zero,
  // which sits below n + 2 n^{1/3} + 3. Bracket by coarse scan.
  const double x_hi = n + 2.0 * std::cbrt(static_cast<double>(n)) + 4.0;
  const double step = 0.01;
  double a = 0.0, c = 0.0;
  double prev_x = step, prev_f = bessel_j(n, step);
  bool bracketed = false;
  for (double x = 2.0 * step; x <= x_hi; x += step) {
    const double f = bessel_j(n, x);
    if (f < prev_f) {
      a = prev_x - step;
      c = x;
      bracketed = true;
      break;
    }
    prev_x = x;
    prev_f = f;
  }
  if (!bracketed) throw std::runtime_error("find_first_peak: bracketing failed");

  // Golden-section refinement of the bracket.
  const double inv_phi = 0.6180339887498949;
  double x1 = c - inv_phi * (c - a);
  double x2 = a + inv_phi * (c - a);
  double f1 = bessel_j(n, x1);
  double f2 = bessel_j(n, x2);
  while (c - a > 1e-7) {
    if (f1 > f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - inv_phi * (c - a);
      f1 = bessel_j(n, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (c - a);
      f2 = bessel_j(n, x2);
    }
  }

  // Comparison-based refinement saturates near sqrt(eps); polish with
  // bisection on J_n' (analytic via the recurrence) to reach 1e-9 in x.
  double lo = std::max(a - 1e-6, 0.0), hi = c + 1e-6;
  double flo = bessel_j_prime(n, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = bessel_j_prime(n, mid);
    if ((flo > 0.0) == (fmid > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  const double x_peak = 0.5 * (lo + hi);
  return BesselPeak{n, x_peak, bessel_j(n, x_peak)};
}

}  // namespace spinfreeze
