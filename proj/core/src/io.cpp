#include "spinfreeze/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spinfreeze/errors.hpp"

namespace spinfreeze {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

namespace {

const char* source_name(DecayCurve::Source s) {
  return s == DecayCurve::Source::experimental ? "experimental" : "simulated";
}

DecayCurve::Source source_from_name(const std::string& s, const std::string& where) {
  if (s == "experimental") return DecayCurve::Source::experimental;
  if (s == "simulated") return DecayCurve::Source::simulated;
  throw IoError(where + ": unknown source '" + s + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string decay_curve_csv(const DecayCurve& curve) {
  curve.validate();
  std::string out = "storage_time_s,intensity,label,source\n";
  for (std::size_t i = 0; i < curve.storage_times.size(); ++i) {
    out += format_double(curve.storage_times[i]);
    out += ',';
    out += format_double(curve.intensities[i]);
    out += ',';
    out += curve.label;
    out += ',';
    out += source_name(curve.source);
    out += '\n';
  }
  return out;
}

void write_decay_curve_csv(const DecayCurve& curve, const std::filesystem::path& path) {
  write_text_file(path, decay_curve_csv(curve));
}

DecayCurve read_decay_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string expected_header = "storage_time_s,intensity,label,source";
  DecayCurve curve;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != expected_header)
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected header '" +
                      expected_header + "'");
      seen_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string t_str, i_str, label, source;
    if (!std::getline(row, t_str, ',') || !std::getline(row, i_str, ',') ||
        !std::getline(row, label, ',') || !std::getline(row, source))
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
    try {
      curve.storage_times.push_back(std::stod(t_str));
      curve.intensities.push_back(std::stod(i_str));
    } catch (const std::exception&) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": cannot parse row");
    }
    curve.label = label;
    curve.source = source_from_name(source, path.string() + ":" + std::to_string(line_no));
  }
  if (!seen_header) throw IoError(path.string() + ": empty file");
  if (curve.storage_times.empty()) throw IoError(path.string() + ": no data rows");
  curve.validate();
  return curve;
}

std::string experimental_csv(const DecayCurve& curve) {
  curve.validate();
  std::string out = "storage_time_us,counts_normalized\n";
  for (std::size_t i = 0; i < curve.storage_times.size(); ++i) {
    out += format_double(curve.storage_times[i] * 1e6);
    out += ',';
    out += format_double(curve.intensities[i]);
    out += '\n';
  }
  return out;
}

void write_experimental_csv(const DecayCurve& curve, const std::filesystem::path& path) {
  write_text_file(path, experimental_csv(curve));
}

std::string fourier_map_csv(const FourierMap& map, double k_min, double k_max) {
  std::string out = "t_tau,k_over_k0,amplitude_abs\n";
  for (std::size_t s = 0; s < map.spectra.size(); ++s) {
    const KSpectrum& spec = map.spectra[s];
    for (std::size_t j = 0; j < spec.k.size(); ++j) {
      if (spec.k[j] < k_min || spec.k[j] > k_max) continue;
      out += format_double(map.times[s]);
      out += ',';
      out += format_double(spec.k[j]);
      out += ',';
      out += format_double(std::abs(spec.amplitude[j]));
      out += '\n';
    }
  }
  return out;
}

std::string fourier_map_matrix(const FourierMap& map, double k_min, double k_max) {
  std::string out;
  out += "# fourier map magnitude matrix: rows = time samples, columns = k bins\n";
  out += "# t_tau:";
  for (double t : map.times) {
    out += ' ';
    out += format_double(t);
  }
  out += '\n';
  out += "# k_over_k0:";
  std::vector<std::size_t> cols;
  if (!map.spectra.empty()) {
    const KSpectrum& first = map.spectra.front();
    for (std::size_t j = 0; j < first.k.size(); ++j)
      if (first.k[j] >= k_min && first.k[j] <= k_max) cols.push_back(j);
    for (std::size_t j : cols) {
      out += ' ';
      out += format_double(first.k[j]);
    }
  }
  out += '\n';
  for (const KSpectrum& spec : map.spectra) {
    bool first_col = true;
    for (std::size_t j : cols) {
      if (!first_col) out += ' ';
      out += format_double(std::abs(spec.amplitude[j]));
      first_col = false;
    }
    out += '\n';
  }
  return out;
}

namespace {

constexpr char kSnapshotMagic[4] = {'S', 'F', 'P', 'S'};
constexpr std::uint32_t kSnapshotVersion = 1;

// x86-64 is little-endian; the raw-byte writers below document the
// on-disk layout rather than perform any swapping.
template <class T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T take(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw IoError("snapshot: truncated stream");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_state_snapshot(const PhaseSpaceState& state, std::ostream& out) {
  out.write(kSnapshotMagic, 4);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.nz()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.nv()));
  put<double>(out, state.grid().z_half_span);
  put<double>(out, state.grid().v_half_span);
  put<double>(out, state.grid().cloud_sigma);
  put<double>(out, state.time());
  put<double>(out, state.k0());
  for (int i = 0; i < state.nv(); ++i) {
    const std::complex<double>* r = state.row(i);
    for (int j = 0; j < state.nz(); ++j) {
      put<double>(out, r[j].real());
      put<double>(out, r[j].imag());
    }
  }
  if (!out) throw IoError("snapshot: write failed");
}

void write_state_snapshot(const PhaseSpaceState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_state_snapshot(state, out);
}

PhaseSpaceState read_state_snapshot(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kSnapshotMagic, 4) != 0)
    throw IoError("snapshot: bad magic");
  const auto version = take<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw IoError("snapshot: unsupported version");
  GridSpec grid;
  grid.nz = static_cast<int>(take<std::uint32_t>(in));
  grid.nv = static_cast<int>(take<std::uint32_t>(in));
  grid.z_half_span = take<double>(in);
  grid.v_half_span = take<double>(in);
  grid.cloud_sigma = take<double>(in);
  const double t = take<double>(in);
  const double k0 = take<double>(in);
  PhaseSpaceState state(grid);
  if (k0 != state.k0()) throw IoError("snapshot: unexpected k0");
  for (int i = 0; i < grid.nv; ++i) {
    std::complex<double>* r = state.row(i);
    for (int j = 0; j < grid.nz; ++j) {
      const double re = take<double>(in);
      const double im = take<double>(in);
      r[j] = {re, im};
    }
  }
  state.set_time(t);
  return state;
}

PhaseSpaceState read_state_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_state_snapshot(in);
}

}  // namespace spinfreeze
