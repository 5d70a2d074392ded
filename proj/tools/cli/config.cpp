#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "spinfreeze/constants.hpp"
#include "spinfreeze/errors.hpp"
#include "spinfreeze/io.hpp"

namespace spinfreeze::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

// Fixed schema keys with their defaults as documentation; event keys are
// matched by pattern. Unknown keys are rejected up front.
const std::vector<std::string>& schema_keys() {
  static const std::vector<std::string> keys = {
      "physical.lambda_probe_nm",
      "physical.lambda_coupling_nm",
      "physical.geometry",
      "physical.temperature_uK",
      "physical.atomic_mass_u",
      "physical.gamma_per_s",
      "physical.lattice_angle_deg",
      "physical.lattice_wavelength_nm",
      "grid.nz",
      "grid.nv",
      "grid.z_half_span",
      "grid.v_half_span",
      "grid.cloud_sigma_k0",
      "sequence.preset",
      "sequence.q_over_k0",
      "sequence.pulse_area_rad",
      "sequence.pulse_duration_tau",
      "sequence.substeps",
      "sequence.eta_acs",
      "sequence.timing_convention",
      "scan.t_start_us",
      "scan.t_stop_us",
      "scan.points",
      "scan.times_us",
      "scan.q_family",
      "scan.include_unmodulated",
      "scan.noise_sigma",
      "figure2.delay_tau",
      "figure2.sampling_tau",
      "figure2.k_min_k0",
      "figure2.k_max_k0",
      "calibrate.storage_time_us",
      "calibrate.max_duration_us",
      "calibrate.points",
      "calibrate.rate_rad_per_s",
      "fit.model",
      "fit.window_min_us",
      "fit.window_max_us",
      "fit.with_offset",
      "outputs.format",
      "seed",
      "threads",
  };
  return keys;
}

const std::regex& event_key_pattern() {
  static const std::regex pattern(
      R"(^sequence\.event\.([1-9][0-9]*)\.(kind|duration_us|duration_tau|q_over_k0|area_rad|pulse_us|pulse_tau|substeps)$)");
  return pattern;
}

bool known_key(const std::string& key) {
  const auto& keys = schema_keys();
  if (std::find(keys.begin(), keys.end(), key) != keys.end()) return true;
  return std::regex_match(key, event_key_pattern());
}

class Reader {
 public:
  explicit Reader(const ConfigMap& map) : map_(map) {}

  double number(const std::string& key, double fallback) const {
    const auto it = map_.values().find(key);
    if (it == map_.values().end()) return fallback;
    return parse_number(key, it->second);
  }

  int integer(const std::string& key, int fallback) const {
    const double v = number(key, fallback);
    if (v != std::floor(v))
      throw std::invalid_argument("config: " + key + ": expected an integer");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto it = map_.values().find(key);
    if (it == map_.values().end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config: " + key + ": expected true or false, got '" +
                                it->second + "'");
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = map_.values().find(key);
    return it == map_.values().end() ? fallback : it->second;
  }

  std::vector<double> number_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = map_.values().find(key);
    if (it == map_.values().end() || trim(it->second).empty()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(parse_number(key, trim(item)));
    return out;
  }

  static double parse_number(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: " + key + ": expected a number, got '" + value +
                                  "'");
    }
  }

 private:
  const ConfigMap& map_;
};

Event parse_event(const Reader& read, const std::string& prefix, const RunConfig& cfg,
                  double tau_s_hint) {
  const std::string kind = read.text(prefix + ".kind", "");
  if (kind.empty())
    throw std::invalid_argument("config: " + prefix + ".kind is required");
  if (kind == "store") return Event::store();
  if (kind == "readout") return Event::readout();
  if (kind == "storage_wait") return Event::storage_wait();
  if (kind == "wait") {
    double dt_tau = read.number(prefix + ".duration_tau", -1.0);
    if (dt_tau < 0.0) {
      const double dt_us = read.number(prefix + ".duration_us", -1.0);
      if (dt_us >= 0.0) dt_tau = dt_us * 1e-6 / tau_s_hint;
    }
    if (dt_tau < 0.0)
      throw std::invalid_argument("config: " + prefix +
                                  " needs duration_tau or duration_us >= 0");
    return Event::wait(dt_tau);
  }
  if (kind == "modulate") {
    const double q = read.number(prefix + ".q_over_k0", cfg.q_over_k0);
    const double area = read.number(prefix + ".area_rad", cfg.pulse_area);
    double duration_tau = read.number(prefix + ".pulse_tau", -1.0);
    if (duration_tau < 0.0) {
      const double pulse_us = read.number(prefix + ".pulse_us", -1.0);
      duration_tau = pulse_us < 0.0 ? cfg.pulse_duration_tau : pulse_us * 1e-6 / tau_s_hint;
    }
    const int substeps = read.integer(prefix + ".substeps", cfg.substeps);
    return Event::modulate(q, area, duration_tau, substeps);
  }
  throw std::invalid_argument("config: " + prefix + ".kind: unknown kind '" + kind +
                              "' (store|wait|storage_wait|modulate|readout)");
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path.string());
}

ConfigMap ConfigMap::parse_text(const std::string& text, const std::string& origin) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": empty key");
    if (map.values_.count(key))
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
    map.values_[key] = value;
  }
  return map;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

RunConfig resolve_config(const ConfigMap& map) {
  for (const auto& [key, value] : map.values()) {
    if (!known_key(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");
    (void)value;
  }

  Reader read(map);
  RunConfig cfg;

  cfg.physical.lambda_probe = read.number("physical.lambda_probe_nm", 780.0) * 1e-9;
  cfg.physical.lambda_coupling = read.number("physical.lambda_coupling_nm", 480.0) * 1e-9;
  cfg.physical.geometry =
      beam_geometry_from_string(read.text("physical.geometry", "counter_propagating"));
  cfg.physical.temperature = read.number("physical.temperature_uK", 78.0) * 1e-6;
  cfg.physical.atomic_mass =
      read.number("physical.atomic_mass_u", constants::rb87_mass_u) *
      constants::atomic_mass_unit;
  cfg.physical.gamma = read.number("physical.gamma_per_s", default_gamma());
  cfg.physical.lattice_angle =
      read.number("physical.lattice_angle_deg", 18.5) * constants::pi / 180.0;
  cfg.physical.lattice_wavelength =
      read.number("physical.lattice_wavelength_nm", 780.0) * 1e-9;
  cfg.physical.validate();

  cfg.grid.nz = read.integer("grid.nz", 2048);
  cfg.grid.nv = read.integer("grid.nv", 400);
  cfg.grid.z_half_span = read.number("grid.z_half_span", 4.0);
  cfg.grid.v_half_span = read.number("grid.v_half_span", 4.0);
  cfg.grid.cloud_sigma = read.number("grid.cloud_sigma_k0", 15.0 * constants::pi);
  cfg.grid.validate();

  const std::string preset = read.text("sequence.preset", "extension");
  if (preset == "extension")
    cfg.preset = SequencePreset::extension;
  else if (preset == "unmodulated")
    cfg.preset = SequencePreset::unmodulated;
  else
    throw std::invalid_argument(
        "config: sequence.preset: expected extension or unmodulated, got '" + preset + "'");

  cfg.q_over_k0 = read.number("sequence.q_over_k0", cfg.q_over_k0);
  cfg.pulse_area = read.number("sequence.pulse_area_rad", cfg.pulse_area);
  cfg.pulse_duration_tau = read.number("sequence.pulse_duration_tau", cfg.pulse_duration_tau);
  cfg.substeps = read.integer("sequence.substeps", cfg.substeps);
  cfg.eta_acs = read.number("sequence.eta_acs", cfg.eta_acs);
  const std::string timing = read.text("sequence.timing_convention", "total_elapsed");
  if (timing == "total_elapsed")
    cfg.timing = TimingConvention::total_elapsed;
  else if (timing == "wait_only")
    cfg.timing = TimingConvention::wait_only;
  else
    throw std::invalid_argument(
        "config: sequence.timing_convention: expected total_elapsed or wait_only");

  // Explicit event list wins over the preset.
  {
    const double tau_s_hint = derive_scales(cfg.physical).tau;
    std::vector<int> indices;
    for (const auto& [key, value] : map.values()) {
      std::smatch m;
      if (std::regex_match(key, m, event_key_pattern())) indices.push_back(std::stoi(m[1]));
      (void)value;
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] != static_cast<int>(i) + 1)
        throw std::invalid_argument("config: sequence.event indices must be 1..N contiguous");
      cfg.events.push_back(
          parse_event(read, "sequence.event." + std::to_string(indices[i]), cfg, tau_s_hint));
    }
  }

  // Scan times: explicit list, else a linspace.
  {
    const auto explicit_times = read.number_list("scan.times_us");
    if (!explicit_times.empty()) {
      for (double t : explicit_times) cfg.scan_times_s.push_back(t * 1e-6);
    } else {
      const double start = read.number("scan.t_start_us", 0.0);
      const double stop = read.number("scan.t_stop_us", 44.0);
      const int points = read.integer("scan.points", 45);
      if (points < 1) throw std::invalid_argument("config: scan.points must be >= 1");
      if (!(stop >= start))
        throw std::invalid_argument("config: scan.t_stop_us must be >= scan.t_start_us");
      for (int i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        cfg.scan_times_s.push_back((start + (stop - start) * f) * 1e-6);
      }
    }
  }
  cfg.q_family = read.number_list("scan.q_family");
  cfg.include_unmodulated = read.boolean("scan.include_unmodulated", true);
  cfg.noise_sigma = read.number("scan.noise_sigma", 0.0);
  if (cfg.noise_sigma < 0.0)
    throw std::invalid_argument("config: scan.noise_sigma must be >= 0");

  cfg.figure2_delay_tau = read.number("figure2.delay_tau", 10.0);
  cfg.figure2_sampling_tau = read.number("figure2.sampling_tau", 0.05);
  cfg.figure2_k_min = read.number("figure2.k_min_k0", -0.5);
  cfg.figure2_k_max = read.number("figure2.k_max_k0", 1.5);

  cfg.calibrate_storage_s = read.number("calibrate.storage_time_us", 3.0) * 1e-6;
  cfg.calibrate_max_duration_s = read.number("calibrate.max_duration_us", 3.0) * 1e-6;
  cfg.calibrate_points = read.integer("calibrate.points", 31);
  cfg.calibrate_rate = read.number("calibrate.rate_rad_per_s", 0.0);
  if (cfg.calibrate_points < 6)
    throw std::invalid_argument("config: calibrate.points must be >= 6");

  cfg.fit_model = read.text("fit.model", "gaussian_decay");
  if (cfg.fit_model != "gaussian_decay" && cfg.fit_model != "bessel0_sq")
    throw std::invalid_argument("config: fit.model: expected gaussian_decay or bessel0_sq");
  cfg.fit_window_min_s = read.number("fit.window_min_us", 0.0) * 1e-6;
  cfg.fit_window_max_s = read.number("fit.window_max_us", 0.0) * 1e-6;
  {
    const std::string offset = read.text("fit.with_offset", "auto");
    if (offset == "auto")
      cfg.fit_with_offset = -1;
    else if (offset == "true" || offset == "1")
      cfg.fit_with_offset = 1;
    else if (offset == "false" || offset == "0")
      cfg.fit_with_offset = 0;
    else
      throw std::invalid_argument("config: fit.with_offset: expected auto, true or false");
  }

  const std::string format = read.text("outputs.format", "csv");
  if (format == "csv")
    cfg.format = OutputFormat::csv;
  else if (format == "json")
    cfg.format = OutputFormat::json;
  else
    throw std::invalid_argument("config: outputs.format: expected csv or json");

  const double seed = read.number("seed", 20240901.0);
  if (seed < 0.0 || seed != std::floor(seed))
    throw std::invalid_argument("config: seed must be a non-negative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.threads = read.integer("threads", 0);
  if (cfg.threads < 0) throw std::invalid_argument("config: threads must be >= 0");

  return cfg;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream out;
  auto put = [&](const std::string& key, const std::string& value) {
    out << key << "=" << value << "\n";
  };
  auto put_num = [&](const std::string& key, double value) {
    put(key, format_double(value));
  };

  put_num("calibrate.max_duration_us", calibrate_max_duration_s * 1e6);
  put_num("calibrate.points", calibrate_points);
  put_num("calibrate.rate_rad_per_s", calibrate_rate);
  put_num("calibrate.storage_time_us", calibrate_storage_s * 1e6);
  put_num("figure2.delay_tau", figure2_delay_tau);
  put_num("figure2.k_max_k0", figure2_k_max);
  put_num("figure2.k_min_k0", figure2_k_min);
  put_num("figure2.sampling_tau", figure2_sampling_tau);
  put("fit.model", fit_model);
  put_num("fit.window_max_us", fit_window_max_s * 1e6);
  put_num("fit.window_min_us", fit_window_min_s * 1e6);
  put("fit.with_offset",
      fit_with_offset < 0 ? "auto" : (fit_with_offset ? "true" : "false"));
  put_num("grid.cloud_sigma_k0", grid.cloud_sigma);
  put_num("grid.nv", grid.nv);
  put_num("grid.nz", grid.nz);
  put_num("grid.v_half_span", grid.v_half_span);
  put_num("grid.z_half_span", grid.z_half_span);
  put("outputs.format", format == OutputFormat::csv ? "csv" : "json");
  put_num("physical.atomic_mass_u", physical.atomic_mass / constants::atomic_mass_unit);
  put_num("physical.gamma_per_s", physical.gamma);
  put("physical.geometry", to_string(physical.geometry));
  put_num("physical.lambda_coupling_nm", physical.lambda_coupling * 1e9);
  put_num("physical.lambda_probe_nm", physical.lambda_probe * 1e9);
  put_num("physical.lattice_angle_deg", physical.lattice_angle * 180.0 / constants::pi);
  put_num("physical.lattice_wavelength_nm", physical.lattice_wavelength * 1e9);
  put_num("physical.temperature_uK", physical.temperature * 1e6);
  put_num("scan.include_unmodulated", include_unmodulated ? 1 : 0);
  put_num("scan.noise_sigma", noise_sigma);
  {
    std::string family;
    for (double q : q_family) {
      if (!family.empty()) family += ",";
      family += format_double(q);
    }
    put("scan.q_family", family);
    std::string times;
    for (double t : scan_times_s) {
      if (!times.empty()) times += ",";
      times += format_double(t * 1e6);
    }
    put("scan.times_us", times);
  }
  put_num("seed", static_cast<double>(seed));
  put("sequence.preset",
      preset == SequencePreset::extension ? "extension" : "unmodulated");
  put_num("sequence.eta_acs", eta_acs);
  put_num("sequence.pulse_area_rad", pulse_area);
  put_num("sequence.pulse_duration_tau", pulse_duration_tau);
  put_num("sequence.q_over_k0", q_over_k0);
  put_num("sequence.substeps", substeps);
  put("sequence.timing_convention",
      timing == TimingConvention::total_elapsed ? "total_elapsed" : "wait_only");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    const std::string prefix = "sequence.event." + std::to_string(i + 1);
    switch (e.kind) {
      case Event::Kind::store:
        put(prefix + ".kind", "store");
        break;
      case Event::Kind::readout:
        put(prefix + ".kind", "readout");
        break;
      case Event::Kind::storage_wait:
        put(prefix + ".kind", "storage_wait");
        break;
      case Event::Kind::wait:
        put(prefix + ".kind", "wait");
        put_num(prefix + ".duration_tau", e.dt);
        break;
      case Event::Kind::modulate:
        put(prefix + ".kind", "modulate");
        put_num(prefix + ".area_rad", e.area);
        put_num(prefix + ".pulse_tau", e.duration);
        put_num(prefix + ".q_over_k0", e.q);
        put_num(prefix + ".substeps", e.substeps);
        break;
    }
  }
  // `threads` is runtime parallelism, not physics: configs differing
  // only in thread count must hash (and output) identically.
  return out.str();
}

std::string RunConfig::config_hash() const { return fnv1a64_hex(canonical_text()); }

Sequence RunSetup::modulated_template(double q) const {
  Sequence seq;
  seq.grid = cfg->grid;
  seq.gamma = dimensionless.gamma;
  seq.eta_acs = cfg->eta_acs;
  seq.timing = cfg->timing;
  seq.tau_seconds = scales.tau;
  if (!cfg->events.empty()) {
    seq.events = cfg->events;
    for (Event& e : seq.events)
      if (e.kind == Event::Kind::modulate) e.q = q;
  } else {
    const Event pulse =
        Event::modulate(q, cfg->pulse_area, cfg->pulse_duration_tau, cfg->substeps);
    seq.events = {Event::store(), pulse, Event::storage_wait(), pulse, Event::readout()};
  }
  return seq;
}

Sequence RunSetup::unmodulated_template() const {
  Sequence seq;
  seq.grid = cfg->grid;
  seq.gamma = dimensionless.gamma;
  seq.eta_acs = 1.0;
  seq.timing = cfg->timing;
  seq.tau_seconds = scales.tau;
  seq.events = {Event::store(), Event::storage_wait(), Event::readout()};
  return seq;
}

RunSetup make_setup(const RunConfig& cfg) {
  RunSetup setup;
  setup.scales = derive_scales(cfg.physical);
  setup.dimensionless = to_dimensionless(cfg.physical, setup.scales);
  setup.cfg = &cfg;
  return setup;
}

}  // namespace spinfreeze::cli
