#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spinfreeze/protocol.hpp"

namespace spinfreeze {

enum class FitModel { gaussian_decay, bessel0_sq };

std::string to_string(FitModel m);

// Nonlinear least-squares result. `converged` is set only when the
// scaled gradient norm fell below tolerance; failed fits carry the
// reason in `diagnostics` instead of throwing.
struct FitResult {
  FitModel model = FitModel::gaussian_decay;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> stderrs;  // linearized, from the local quadratic model
  double window_min = 0.0;      // seconds
  double window_max = 0.0;
  double residual_norm = 0.0;   // sqrt(sum of squared residuals)
  bool converged = false;
  int iterations = 0;
  std::string diagnostics;
  std::string weighting = "uniform";

  double value(const std::string& name) const;   // throws on unknown name
  double stderr_of(const std::string& name) const;
};

// I(t) = I0 exp(-t^2 / tau^2) [+ offset]. Window in seconds; pass an
// infinite max to fit everything from window_min on. Needs >= 4 points
// inside the window.
FitResult fit_gaussian_decay(const DecayCurve& curve, double window_min, double window_max,
                             bool with_offset);

// Pulse-duration calibration: I(d) = c J_0(A d)^2 + offset against the
// lattice pulse duration d. tau_opt = x_peak(J_2) / A is the duration
// that maximizes the second diffraction order.
struct CalibrationResult {
  double rate = 0.0;     // A, rad/s
  double tau_opt = 0.0;  // s
  FitResult fit;
};

CalibrationResult fit_bessel0(const DecayCurve& curve);

// Experimental data ingestion. Schema: '#' comments, then the exact
// header `storage_time_us,counts_normalized`, then two-column rows.
// Malformed input is rejected with line numbers.
DecayCurve load_experimental_csv(const std::filesystem::path& path);

}  // namespace spinfreeze
