#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinfreeze/engine.hpp"
#include "spinfreeze/protocol.hpp"
#include "spinfreeze/units.hpp"

namespace spinfreeze::cli {

// Flat key=value tree ('#' comments, dotted keys). Values stay strings
// until the schema resolves them.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::filesystem::path& path);
  static ConfigMap parse_text(const std::string& text, const std::string& origin);

  void set(const std::string& key, const std::string& value);
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class OutputFormat { csv, json };
enum class SequencePreset { unmodulated, extension };

// Everything a run needs, resolved from config with reference defaults
// and schema-validated (unknown keys rejected, malformed values named).
struct RunConfig {
  PhysicalParams physical;
  GridSpec grid;

  SequencePreset preset = SequencePreset::extension;
  std::vector<Event> events;  // non-empty overrides the preset
  double q_over_k0 = 0.485;
  double pulse_area = 3.0542369282271404;  // rad, first maximum of J2
  double pulse_duration_tau = 0.54;
  int substeps = 32;
  double eta_acs = 0.71;
  TimingConvention timing = TimingConvention::total_elapsed;

  std::vector<double> scan_times_s;
  std::vector<double> q_family;
  bool include_unmodulated = true;
  double noise_sigma = 0.0;

  double figure2_delay_tau = 10.0;
  double figure2_sampling_tau = 0.05;
  double figure2_k_min = -0.5;
  double figure2_k_max = 1.5;

  double calibrate_storage_s = 3e-6;
  double calibrate_max_duration_s = 3e-6;
  int calibrate_points = 31;
  double calibrate_rate = 0.0;  // rad/s; 0 derives from pulse area/duration

  std::string fit_model = "gaussian_decay";
  double fit_window_min_s = 0.0;
  double fit_window_max_s = 0.0;  // 0 = open-ended
  int fit_with_offset = -1;       // -1 auto, 0 off, 1 on

  OutputFormat format = OutputFormat::csv;
  std::uint64_t seed = 20240901;
  int threads = 0;  // 0 = hardware concurrency

  // Canonical resolved key=value text (sorted), the input to the config
  // hash that manifests carry.
  std::string canonical_text() const;
  std::string config_hash() const;
};

RunConfig resolve_config(const ConfigMap& map);

// Ready-to-run protocol pieces derived from a resolved config.
struct RunSetup {
  Scales scales;
  DimensionlessConfig dimensionless;
  Sequence modulated_template(double q_over_k0) const;
  Sequence unmodulated_template() const;
  const RunConfig* cfg = nullptr;
};

RunSetup make_setup(const RunConfig& cfg);

}  // namespace spinfreeze::cli
