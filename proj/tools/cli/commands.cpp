#include "cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "spinfreeze/bessel.hpp"
#include "spinfreeze/errors.hpp"
#include "spinfreeze/fitting.hpp"
#include "spinfreeze/io.hpp"
#include "spinfreeze/spectral.hpp"

namespace spinfreeze::cli {

namespace {

using nlohmann::json;

constexpr const char* kToolName = "spinfreeze";
constexpr const char* kToolVersion = "0.1.0";

// All output files of one command, staged in memory and written only
// when the whole computation succeeded.
class OutputStage {
 public:
  OutputStage(const RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)) {}

  void add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }

  void set_extra(json extra) { extra_ = std::move(extra); }

  void write(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");

    json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["command"] = command_;
    manifest["config_hash"] = cfg_.config_hash();
    manifest["files"] = json::array();
    for (const auto& [name, content] : files_) {
      manifest["files"].push_back(
          {{"name", name}, {"bytes", content.size()}, {"fnv1a64", fnv1a64_hex(content)}});
    }
    if (!extra_.is_null()) manifest["details"] = extra_;

    for (const auto& [name, content] : files_) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw IoError("cannot open '" + (dir / name).string() + "' for writing");
      out << content;
      if (!out) throw IoError("write failed for '" + (dir / name).string() + "'");
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot open manifest for writing");
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("write failed for manifest");
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::vector<std::pair<std::string, std::string>> files_;
  json extra_;
};

json scales_json(const Scales& s, const DimensionlessConfig& d) {
  return json{{"k0_rad_per_m", s.k0},
              {"wave_period_um", 2.0 * constants::pi / s.k0 * 1e6},
              {"v_t_m_per_s", s.v_t},
              {"tau_us", s.tau * 1e6},
              {"q_lattice_rad_per_m", s.q_lattice},
              {"q_lattice_over_k0", d.q_lattice},
              {"gamma_per_s", d.gamma / s.tau},
              {"gamma_tau", d.gamma}};
}

json fit_json(const FitResult& fit) {
  json params = json::object();
  json stderrs = json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = fit.values[i];
    stderrs[fit.names[i]] = fit.stderrs[i];
  }
  return json{{"model", to_string(fit.model)},
              {"params", params},
              {"stderr", stderrs},
              {"window_s", {fit.window_min, fit.window_max}},
              {"residual_norm", fit.residual_norm},
              {"converged", fit.converged},
              {"iterations", fit.iterations},
              {"weighting", fit.weighting},
              {"diagnostics", fit.diagnostics}};
}

std::string q_label(double q) { return "modulated_q" + format_double(q); }

void add_noise(DecayCurve& curve, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& y : curve.intensities) y = std::max(0.0, y + noise(rng));
}

}  // namespace

int cmd_scales(const CommandArgs& args) {
  const RunSetup setup = make_setup(args.config);
  std::ostream& out = *args.out;
  const json j = scales_json(setup.scales, setup.dimensionless);
  if (args.config.format == OutputFormat::json) {
    out << j.dump(2) << "\n";
  } else {
    out << "k0          = " << format_double(setup.scales.k0) << " rad/m\n";
    out << "2*pi/k0     = " << format_double(j["wave_period_um"].get<double>()) << " um\n";
    out << "v_t         = " << format_double(setup.scales.v_t) << " m/s\n";
    out << "tau         = " << format_double(setup.scales.tau * 1e6) << " us\n";
    out << "q_lattice   = " << format_double(setup.scales.q_lattice) << " rad/m ("
        << format_double(setup.dimensionless.q_lattice) << " k0)\n";
    out << "gamma       = " << format_double(args.config.physical.gamma) << " 1/s (gamma*tau = "
        << format_double(setup.dimensionless.gamma) << ")\n";
  }
  if (args.out_dir) {
    OutputStage stage(args.config, "scales");
    stage.add("scales.json", j.dump(2) + "\n");
    stage.write(*args.out_dir);
  }
  return kExitOk;
}

int cmd_scan(const CommandArgs& args) {
  const RunConfig& cfg = args.config;
  const RunSetup setup = make_setup(cfg);
  if (cfg.scan_times_s.empty())
    throw std::invalid_argument("scan: empty storage time list");

  std::vector<DecayCurve> curves;

  if (cfg.include_unmodulated) {
    DecayCurve curve = scan_storage(setup.unmodulated_template(), cfg.scan_times_s, cfg.threads);
    curve.label = "unmodulated";
    curves.push_back(std::move(curve));
  }

  const bool modulated = cfg.preset == SequencePreset::extension || !cfg.events.empty();
  if (modulated) {
    std::vector<double> qs = cfg.q_family;
    if (qs.empty()) qs.push_back(cfg.q_over_k0);
    for (double q : qs) {
      DecayCurve curve = scan_storage(setup.modulated_template(q), cfg.scan_times_s, cfg.threads);
      curve.label = q_label(q);
      curves.push_back(std::move(curve));
    }
  }

  if (cfg.noise_sigma > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    for (DecayCurve& curve : curves) add_noise(curve, cfg.noise_sigma, rng);
  }

  DecayCurve limit = theoretical_limit(cfg.scan_times_s, cfg.physical.gamma);

  OutputStage stage(cfg, "scan");
  json labels = json::array();
  for (const DecayCurve& curve : curves) {
    stage.add(curve.label + ".csv", decay_curve_csv(curve));
    labels.push_back(curve.label);
  }
  stage.add("limit.csv", decay_curve_csv(limit));
  labels.push_back("limit");
  if (cfg.format == OutputFormat::json) {
    json all = json::object();
    for (const DecayCurve& curve : curves) {
      all[curve.label] = {{"storage_time_s", curve.storage_times},
                          {"intensity", curve.intensities}};
    }
    all["limit"] = {{"storage_time_s", limit.storage_times},
                    {"intensity", limit.intensities}};
    stage.add("curves.json", all.dump(2) + "\n");
  }
  stage.set_extra(json{{"curves", labels}, {"scales", scales_json(setup.scales, setup.dimensionless)}});

  if (!args.out_dir) throw std::invalid_argument("scan: --out DIR is required");
  stage.write(*args.out_dir);
  *args.out << "scan: wrote " << (curves.size() + 1) << " curves to " << args.out_dir->string()
            << "\n";
  return kExitOk;
}

int cmd_figure2(const CommandArgs& args) {
  const RunConfig& cfg = args.config;
  const RunSetup setup = make_setup(cfg);

  Sequence seq = setup.modulated_template(cfg.q_over_k0);
  for (Event& e : seq.events)
    if (e.kind == Event::Kind::storage_wait) e = Event::wait(cfg.figure2_delay_tau);
  const FourierMap map = build_fourier_map(seq, cfg.figure2_sampling_tau);

  OutputStage stage(cfg, "figure2");
  stage.add("figure2_map.csv", fourier_map_csv(map, cfg.figure2_k_min, cfg.figure2_k_max));
  stage.add("figure2_matrix.txt",
            fourier_map_matrix(map, cfg.figure2_k_min, cfg.figure2_k_max));
  json markers = json::array();
  for (const StageMarker& m : map.markers)
    markers.push_back({{"label", m.label}, {"t_tau", m.t}});
  stage.set_extra(json{{"markers", markers},
                       {"samples", map.times.size()},
                       {"scales", scales_json(setup.scales, setup.dimensionless)}});

  if (!args.out_dir) throw std::invalid_argument("figure2: --out DIR is required");
  stage.write(*args.out_dir);
  *args.out << "figure2: wrote " << map.times.size() << " spectra to "
            << args.out_dir->string() << "\n";
  return kExitOk;
}

int cmd_calibrate(const CommandArgs& args) {
  const RunConfig& cfg = args.config;
  const RunSetup setup = make_setup(cfg);
  const double tau_s = setup.scales.tau;
  const double rate = cfg.calibrate_rate > 0.0
                          ? cfg.calibrate_rate
                          : cfg.pulse_area / (cfg.pulse_duration_tau * tau_s);

  const int n = cfg.calibrate_points;
  std::vector<double> durations(n);
  for (int i = 0; i < n; ++i)
    durations[i] = cfg.calibrate_max_duration_s * i / (n - 1);

  std::vector<double> intensities(n, 0.0);
  auto run_point = [&](int i) {
    const double d_s = durations[i];
    const double d_tau = d_s / tau_s;
    const double wait_tau = std::max(0.0, (cfg.calibrate_storage_s - d_s) / tau_s);
    Sequence seq;
    seq.grid = cfg.grid;
    seq.gamma = setup.dimensionless.gamma;
    seq.eta_acs = cfg.eta_acs;
    seq.tau_seconds = tau_s;
    seq.events = {Event::store(),
                  Event::modulate(cfg.q_over_k0, rate * d_s, d_tau, cfg.substeps),
                  Event::wait(wait_tau), Event::readout()};
    intensities[i] = run_sequence(seq).intensity;
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) run_point(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_point(i);
      });
    for (auto& th : pool) th.join();
  }

  DecayCurve curve;
  curve.storage_times = durations;
  curve.intensities = intensities;
  curve.label = "calibration";
  curve.source = DecayCurve::Source::simulated;

  const CalibrationResult cal = fit_bessel0(curve);
  json report{{"configured_rate_rad_per_s", rate},
              {"fitted_rate_rad_per_s", cal.rate},
              {"rate_relative_error", std::abs(cal.rate - rate) / rate},
              {"tau_opt_us", cal.tau_opt * 1e6},
              {"x_peak_j2", find_first_peak(2).x_peak},
              {"fit", fit_json(cal.fit)}};
  *args.out << report.dump(2) << "\n";

  if (args.out_dir) {
    OutputStage stage(cfg, "calibrate");
    stage.add("calibration.csv", decay_curve_csv(curve));
    stage.add("calibrate.json", report.dump(2) + "\n");
    stage.set_extra(json{{"scales", scales_json(setup.scales, setup.dimensionless)}});
    stage.write(*args.out_dir);
  }
  if (!cal.fit.converged) throw FitConvergenceError(cal.fit.diagnostics);
  return kExitOk;
}

int cmd_fit(const CommandArgs& args, const std::filesystem::path& data_path) {
  const RunConfig& cfg = args.config;

  // Accept either the experimental schema or this tool's scan exports.
  DecayCurve curve;
  {
    std::ifstream probe(data_path);
    if (!probe) throw IoError("cannot open '" + data_path.string() + "'");
    std::string line;
    while (std::getline(probe, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto start = line.find_first_not_of(" \t");
      if (start == std::string::npos || line[start] == '#') continue;
      break;
    }
    if (line.rfind("storage_time_us,", 0) == 0)
      curve = load_experimental_csv(data_path);
    else
      curve = read_decay_curve_csv(data_path);
  }

  const bool with_offset = cfg.fit_with_offset < 0
                               ? curve.source == DecayCurve::Source::experimental
                               : cfg.fit_with_offset == 1;
  const double wmin = cfg.fit_window_min_s;
  const double wmax =
      cfg.fit_window_max_s > 0.0 ? cfg.fit_window_max_s : std::numeric_limits<double>::infinity();

  json report;
  bool converged = false;
  if (cfg.fit_model == "bessel0_sq") {
    const CalibrationResult cal = fit_bessel0(curve);
    report = json{{"input", data_path.string()},
                  {"tau_opt_us", cal.tau_opt * 1e6},
                  {"rate_rad_per_s", cal.rate},
                  {"fit", fit_json(cal.fit)}};
    converged = cal.fit.converged;
    if (!converged) report["fit"]["diagnostics"] = cal.fit.diagnostics;
  } else {
    const FitResult fit = fit_gaussian_decay(curve, wmin, wmax, with_offset);
    report = json{{"input", data_path.string()},
                  {"tau_us", fit.value("tau") * 1e6},
                  {"tau_stderr_us", fit.stderr_of("tau") * 1e6},
                  {"fit", fit_json(fit)}};
    converged = fit.converged;
  }
  *args.out << report.dump(2) << "\n";

  if (args.out_dir) {
    OutputStage stage(cfg, "fit");
    stage.add("fit.json", report.dump(2) + "\n");
    stage.write(*args.out_dir);
  }
  if (!converged) throw FitConvergenceError(report["fit"]["diagnostics"].get<std::string>());
  return kExitOk;
}

int run_guarded(const std::string& command_name, const std::function<int()>& body,
                std::ostream& err) {
  try {
    return body();
  } catch (const FitConvergenceError& e) {
    err << command_name << ": " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const IoError& e) {
    err << command_name << ": " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << command_name << ": " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    err << command_name << ": " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << command_name << ": unexpected error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spinfreeze::cli
