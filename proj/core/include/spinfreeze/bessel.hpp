#pragma once

namespace spinfreeze {

// Bessel function of the first kind, integer order. Accurate to better
// than 1e-12 absolute for |x| <= 50, |n| <= 64. Satisfies
// J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
double bessel_j(int n, double x);

// First positive maximizer of |J_n| and the value there.
struct BesselPeak {
  int order = 0;
  double x_peak = 0.0;
  double value = 0.0;
};

// For n = 0 the peak is at the origin (J_0(0) = 1). Ranges n in [0, 16];
// x_peak is located to 1e-9.
BesselPeak find_first_peak(int n);

}  // namespace spinfreeze
