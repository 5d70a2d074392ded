#include "spinfreeze/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "spinfreeze/bessel.hpp"
#include "spinfreeze/errors.hpp"

namespace spinfreeze {

std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::gaussian_decay:
      return "gaussian_decay";
    case FitModel::bessel0_sq:
      return "bessel0_sq";
  }
  return "unknown";
}

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return values[i];
  throw std::invalid_argument("fit result: unknown parameter '" + name + "'");
}

double FitResult::stderr_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return stderrs[i];
  throw std::invalid_argument("fit result: unknown parameter '" + name + "'");
}

namespace {

constexpr int kMaxIterations = 300;
constexpr double kGradientTol = 1e-10;

// model(p, t) and jacobian(p, t, row) for a fixed small parameter count.
struct ModelFns {
  int np;
  std::function<double(const double*, double)> f;
  std::function<void(const double*, double, double*)> jac;
};

// Solve the damped normal equations (H + lambda diag(H)) delta = -g for
// np <= 4 by Gaussian elimination on the Jacobi-scaled system; the
// scaling keeps the solve accurate despite wildly different parameter
// magnitudes (seconds vs. dimensionless amplitudes).
bool solve_damped(int np, const double* hess, const double* grad, double lambda,
                  double* delta) {
  double a[16], b[4], scale[4];
  for (int i = 0; i < np; ++i) {
    const double d = hess[i * np + i];
    scale[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j)
      a[i * np + j] = hess[i * np + j] * scale[i] * scale[j];
    a[i * np + i] += lambda;
    b[i] = -grad[i] * scale[i];
  }
  for (int col = 0; col < np; ++col) {  // partial pivoting
    int pivot = col;
    for (int r = col + 1; r < np; ++r)
      if (std::abs(a[r * np + col]) > std::abs(a[pivot * np + col])) pivot = r;
    if (std::abs(a[pivot * np + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int c = 0; c < np; ++c) std::swap(a[col * np + c], a[pivot * np + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < np; ++r) {
      const double m = a[r * np + col] / a[col * np + col];
      for (int c = col; c < np; ++c) a[r * np + c] -= m * a[col * np + c];
      b[r] -= m * b[col];
    }
  }
  for (int i = np - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < np; ++j) s -= a[i * np + j] * delta[j];
    delta[i] = s / a[i * np + i];
  }
  for (int i = 0; i < np; ++i) delta[i] *= scale[i];
  return true;
}

double sum_squared_residuals(const ModelFns& model, const std::vector<double>& t,
                             const std::vector<double>& y, const double* p) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = model.f(p, t[i]) - y[i];
    ssr += r * r;
  }
  return ssr;
}

// Levenberg-Marquardt style damping: grow lambda on rejected steps,
// shrink on accepted ones. Uniform weights.
FitResult lm_fit(const ModelFns& model, const std::vector<double>& t,
                 const std::vector<double>& y, const std::vector<std::string>& names,
                 std::vector<double> p) {
  const int np = model.np;
  const std::size_t n = t.size();
  FitResult out;
  out.names = names;

  double lambda = 1e-3;
  double ssr = sum_squared_residuals(model, t, y, p.data());
  std::vector<double> jrow(np);
  double hess[16], grad[4], delta[4];

  int iter = 0;
  bool converged = false;
  std::string failure;
  for (; iter < kMaxIterations; ++iter) {
    std::fill(hess, hess + np * np, 0.0);
    std::fill(grad, grad + np, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = model.f(p.data(), t[i]) - y[i];
      model.jac(p.data(), t[i], jrow.data());
      for (int a = 0; a < np; ++a) {
        grad[a] += jrow[a] * r;
        for (int b = a; b < np; ++b) hess[a * np + b] += jrow[a] * jrow[b];
      }
    }
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < a; ++b) hess[a * np + b] = hess[b * np + a];

    if (!std::isfinite(ssr)) {
      failure = "residuals are not finite";
      break;
    }
    // Scaled gradient norm: |g_i| / sqrt(H_ii), relative to the
    // residual scale, is dimensionless in every parameter.
    double gnorm = 0.0;
    bool finite_grad = true;
    for (int a = 0; a < np; ++a) {
      const double h = hess[a * np + a];
      if (!std::isfinite(grad[a]) || !std::isfinite(h)) finite_grad = false;
      if (h > 0.0) gnorm = std::max(gnorm, std::abs(grad[a]) / std::sqrt(h));
    }
    if (!finite_grad) {
      failure = "gradient is not finite";
      break;
    }
    const double resid_scale = std::sqrt(ssr) + 1e-300;
    if (gnorm <= kGradientTol * std::max(resid_scale, 1e-12)) {
      converged = true;
      break;
    }

    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      if (!solve_damped(np, hess, grad, lambda, delta)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial = p;
      for (int a = 0; a < np; ++a) trial[a] += delta[a];
      const double trial_ssr = sum_squared_residuals(model, t, y, trial.data());
      if (std::isfinite(trial_ssr) && trial_ssr <= ssr) {
        const double improvement = ssr - trial_ssr;
        p = std::move(trial);
        ssr = trial_ssr;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
        // A stall at machine-level improvement is a converged fit in
        // everything but the gradient test; let the next pass decide.
        if (improvement <= 1e-30 + 1e-15 * ssr) {
          double step = 0.0;
          for (int a = 0; a < np; ++a)
            step = std::max(step, std::abs(delta[a]) / (std::abs(p[a]) + 1e-300));
          if (step < 1e-14) {
            converged = true;
          }
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (converged) break;
    if (!stepped) {
      failure = "damping exhausted without an acceptable step (lambda > 1e14)";
      break;
    }
  }
  if (!converged && failure.empty() && iter == kMaxIterations)
    failure = "iteration limit reached before the gradient tolerance";

  out.values = p;
  out.residual_norm = std::sqrt(ssr);
  out.converged = converged;
  out.iterations = iter;
  if (!converged) {
    std::ostringstream diag;
    diag << "fit did not converge: " << failure << "; residual_norm=" << out.residual_norm
         << ", iterations=" << iter;
    out.diagnostics = diag.str();
  }

  // Linearized uncertainties: sigma^2 (J^T J)^{-1} via the scaled solve.
  out.stderrs.assign(np, 0.0);
  if (n > static_cast<std::size_t>(np)) {
    std::fill(hess, hess + np * np, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      model.jac(p.data(), t[i], jrow.data());
      for (int a = 0; a < np; ++a)
        for (int b = a; b < np; ++b) hess[a * np + b] += jrow[a] * jrow[b];
    }
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < a; ++b) hess[a * np + b] = hess[b * np + a];
    const double sigma2 = ssr / (n - np);
    for (int a = 0; a < np; ++a) {  // column a of the inverse
      double unit[4] = {0, 0, 0, 0};
      unit[a] = -1.0;  // solve_damped negates
      if (solve_damped(np, hess, unit, 0.0, delta) && delta[a] > 0.0)
        out.stderrs[a] = std::sqrt(sigma2 * delta[a]);
    }
  }
  return out;
}

}  // namespace

FitResult fit_gaussian_decay(const DecayCurve& curve, double window_min, double window_max,
                             bool with_offset) {
  curve.validate();
  std::vector<double> t, y;
  for (std::size_t i = 0; i < curve.storage_times.size(); ++i) {
    if (curve.storage_times[i] >= window_min && curve.storage_times[i] <= window_max) {
      t.push_back(curve.storage_times[i]);
      y.push_back(curve.intensities[i]);
    }
  }
  if (t.size() < 4)
    throw std::invalid_argument("fit_gaussian_decay: need at least 4 points in the window");

  // Seed from the log-linearized model ln(y) = ln(I0) - t^2/tau^2.
  const double y_floor = with_offset ? std::max(0.0, *std::min_element(y.begin(), y.end())) : 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  const double y_top = *std::max_element(y.begin(), y.end());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double yy = y[i] - 0.9 * y_floor;
    if (yy > 1e-3 * (y_top - 0.9 * y_floor) && yy > 0.0) {
      const double x = t[i] * t[i], ly = std::log(yy);
      sx += x;
      sy += ly;
      sxx += x * x;
      sxy += x * ly;
      ++m;
    }
  }
  double tau0 = (t.back() - t.front()) / 2.0 + 1e-300;
  double i0 = y_top;
  if (m >= 2) {
    const double det = m * sxx - sx * sx;
    if (std::abs(det) > 0.0) {
      const double slope = (m * sxy - sx * sy) / det;
      const double intercept = (sy * sxx - sx * sxy) / det;
      if (slope < 0.0) {
        tau0 = std::sqrt(-1.0 / slope);
        i0 = std::exp(intercept);
      }
    }
  }

  ModelFns model;
  model.np = with_offset ? 3 : 2;
  model.f = [with_offset](const double* p, double tt) {
    const double e = std::exp(-tt * tt / (p[1] * p[1]));
    return p[0] * e + (with_offset ? p[2] : 0.0);
  };
  model.jac = [with_offset](const double* p, double tt, double* j) {
    const double e = std::exp(-tt * tt / (p[1] * p[1]));
    j[0] = e;
    j[1] = p[0] * e * 2.0 * tt * tt / (p[1] * p[1] * p[1]);
    if (with_offset) j[2] = 1.0;
  };

  std::vector<std::string> names = {"I0", "tau"};
  std::vector<double> p0 = {i0, tau0};
  if (with_offset) {
    names.push_back("offset");
    p0.push_back(y_floor);
  }

  FitResult out = lm_fit(model, t, y, names, p0);
  out.model = FitModel::gaussian_decay;
  out.window_min = t.front();
  out.window_max = t.back();
  // Sign of tau is not identifiable; report the positive branch.
  for (std::size_t i = 0; i < out.names.size(); ++i)
    if (out.names[i] == "tau") out.values[i] = std::abs(out.values[i]);
  return out;
}

CalibrationResult fit_bessel0(const DecayCurve& curve) {
  curve.validate();
  const std::vector<double>& t = curve.storage_times;
  const std::vector<double>& y = curve.intensities;
  if (t.size() < 6)
    throw std::invalid_argument("fit_bessel0: need at least 6 calibration points");

  const double y_max = *std::max_element(y.begin(), y.end());
  const double y_min = *std::min_element(y.begin(), y.end());
  if (!(y_max - y_min > 1e-12 * std::max(1.0, std::abs(y_max))))
    throw std::invalid_argument("fit_bessel0: degenerate (flat) calibration curve");

  // Seed the rate from the first local minimum, which for a J0^2 shape
  // sits at the first Bessel zero 2.4048.
  constexpr double kJ0FirstZero = 2.4048255576957724;
  double d_min = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] <= y[i - 1] && y[i] <= y[i + 1] && y[i] < 0.5 * y.front()) {
      d_min = t[i];
      break;
    }
  }
  if (d_min == 0.0)
    throw std::invalid_argument(
        "fit_bessel0: calibration curve must span the first zero of J0(A t)");
  const double a0 = kJ0FirstZero / d_min;

  ModelFns model;
  model.np = 3;
  model.f = [](const double* p, double d) {
    const double j0 = bessel_j(0, p[1] * d);
    return p[0] * j0 * j0 + p[2];
  };
  model.jac = [](const double* p, double d, double* j) {
    const double j0 = bessel_j(0, p[1] * d);
    const double j1 = bessel_j(1, p[1] * d);
    j[0] = j0 * j0;
    j[1] = -2.0 * p[0] * j0 * j1 * d;
    j[2] = 1.0;
  };

  FitResult fit = lm_fit(model, t, y, {"c", "A", "offset"}, {y_max - y_min, a0, y_min});
  fit.model = FitModel::bessel0_sq;
  fit.window_min = t.front();
  fit.window_max = t.back();
  for (std::size_t i = 0; i < fit.names.size(); ++i)
    if (fit.names[i] == "A") fit.values[i] = std::abs(fit.values[i]);

  CalibrationResult out;
  out.rate = fit.value("A");
  out.tau_opt = find_first_peak(2).x_peak / out.rate;
  out.fit = std::move(fit);
  if (!(out.tau_opt > 0.0))
    throw std::invalid_argument("fit_bessel0: non-positive fitted rate");
  return out;
}

DecayCurve load_experimental_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  const std::string expected_header = "storage_time_us,counts_normalized";
  DecayCurve curve;
  curve.source = DecayCurve::Source::experimental;
  curve.label = path.stem().string();

  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (!seen_header) {
      if (trimmed != expected_header)
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": expected header '" + expected_header + "', got '" + trimmed + "'");
      seen_header = true;
      continue;
    }
    const auto comma = trimmed.find(',');
    if (comma == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected two comma-separated columns");
    double t_us = 0.0, intensity = 0.0;
    try {
      std::size_t used = 0;
      t_us = std::stod(trimmed.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing characters");
      const std::string rest = trimmed.substr(comma + 1);
      intensity = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": cannot parse row '" + trimmed + "'");
    }
    if (!curve.storage_times.empty() && !(t_us * 1e-6 > curve.storage_times.back()))
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": storage times must be strictly increasing");
    if (!(intensity >= 0.0))
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": intensity must be >= 0");
    curve.storage_times.push_back(t_us * 1e-6);
    curve.intensities.push_back(intensity);
    ++rows;
  }
  if (!seen_header)
    throw IoError(path.string() + ": empty file; expected header '" + expected_header +
                  "' and data rows");
  if (rows == 0)
    throw IoError(path.string() + ": no data rows; expected columns '" + expected_header + "'");
  return curve;
}

}  // namespace spinfreeze
