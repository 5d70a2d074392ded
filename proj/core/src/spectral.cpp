#include "spinfreeze/spectral.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spinfreeze/bessel.hpp"

namespace spinfreeze {

double KSpectrum::dk() const {
  if (k.size() < 2) throw std::invalid_argument("spectrum: need at least two bins");
  return k[1] - k[0];
}

void KSpectrum::validate() const {
  if (k.size() != amplitude.size())
    throw std::invalid_argument("spectrum: axis and amplitude sizes differ");
  if (k.size() < 2) throw std::invalid_argument("spectrum: need at least two bins");
}

KSpectrum v_averaged_spectrum(const PhaseSpaceState& state) {
  const int nz = state.nz();
  const int half = nz / 2;
  const double dk = state.grid().dk();

  AlignedComplexVector work(nz);
  {
    auto profile = state.v_averaged_profile();
    for (int j = 0; j < nz; ++j) work[j] = profile[j];
  }
  FftPlan::get(nz)->forward(work.data());

  KSpectrum spec;
  spec.t = state.time();
  spec.k.resize(nz);
  spec.amplitude.resize(nz);
  const double inv_n = 1.0 / nz;
  // Reorder to an ascending axis: array index m holds bin m - half. The
  // FFT indexes rows from z = -zmax, so restoring the physical origin
  // costs a phase e^{i k zmax} = (-1)^bin (dk * zmax = pi exactly).
  for (int m = 0; m < nz; ++m) {
    const int signed_bin = m - half;
    spec.k[m] = signed_bin * dk;
    const int fft_index = (signed_bin + nz) % nz;
    const double origin_phase = (signed_bin & 1) ? -1.0 : 1.0;
    spec.amplitude[m] = work[fft_index] * (origin_phase * inv_n);
  }
  return spec;
}

ModulatedSpectrum kspace_modulate(const KSpectrum& spec, double q, double area, int n_max) {
  spec.validate();
  if (n_max < 1) throw std::invalid_argument("kspace_modulate: n_max must be >= 1");
  const double dk = spec.dk();
  const double bins = q / dk;
  const long shift = std::lround(bins);
  if (std::abs(bins - static_cast<double>(shift)) > 1e-6) {
    std::ostringstream msg;
    msg << "kspace_modulate: q = " << q << " is not commensurate with the k grid"
        << " (dk = " << dk << "); nearest commensurate q = " << shift * dk;
    throw std::invalid_argument(msg.str());
  }

  const int nz = static_cast<int>(spec.k.size());
  std::vector<double> coeff(2 * n_max + 1);
  double captured = 0.0;
  for (int n = -n_max; n <= n_max; ++n) {
    coeff[n + n_max] = bessel_j(n, area);
    captured += coeff[n + n_max] * coeff[n + n_max];
  }

  ModulatedSpectrum out;
  out.spectrum.k = spec.k;
  out.spectrum.t = spec.t;
  out.spectrum.amplitude.assign(nz, {0.0, 0.0});
  for (int n = -n_max; n <= n_max; ++n) {
    const double c = coeff[n + n_max];
    if (c == 0.0) continue;
    const long offset = static_cast<long>(n) * shift;
    for (int j = 0; j < nz; ++j) {
      long src = (j - offset) % nz;
      if (src < 0) src += nz;
      out.spectrum.amplitude[j] += c * spec.amplitude[src];
    }
  }
  out.truncation_tail = std::max(0.0, 1.0 - captured);
  return out;
}

std::complex<double> order_amplitude(const KSpectrum& spec, double center, double halfwidth) {
  spec.validate();
  if (!(halfwidth >= 0.0))
    throw std::invalid_argument("order_amplitude: halfwidth must be >= 0");
  std::complex<double> acc{0.0, 0.0};
  std::size_t hits = 0;
  for (std::size_t j = 0; j < spec.k.size(); ++j) {
    if (std::abs(spec.k[j] - center) <= halfwidth) {
      acc += spec.amplitude[j];
      ++hits;
    }
  }
  if (hits == 0)
    throw std::invalid_argument("order_amplitude: window contains no spectrum bins");
  return acc;
}

namespace {

std::string roman_numeral(std::size_t n) {
  static const char* ones[] = {"", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"};
  static const char* tens[] = {"", "X", "XX", "XXX", "XL", "L"};
  if (n == 0 || n > 59) return std::to_string(n);
  return std::string(tens[n / 10]) + ones[n % 10];
}

}  // namespace

FourierMap build_fourier_map(const Sequence& seq, double sampling) {
  seq.validate();
  if (!(sampling > 0.0)) throw std::invalid_argument("fourier map: sampling must be > 0");
  const double total = seq.fixed_duration();
  for (const Event& e : seq.events)
    if (e.kind == Event::Kind::storage_wait)
      throw std::invalid_argument("fourier map: unresolved storage_wait placeholder");
  if (sampling > total)
    throw std::invalid_argument("fourier map: sampling step exceeds the sequence duration");

  FourierMap map;
  double next_tick = 0.0;

  auto snapshot = [&](const PhaseSpaceState& state) {
    map.times.push_back(state.time());
    map.spectra.push_back(v_averaged_spectrum(state));
    next_tick = state.time() + sampling - 1e-12;
  };

  TraceHooks hooks;
  hooks.max_step = sampling;
  hooks.on_step = [&](const PhaseSpaceState& state) {
    if (state.time() + 1e-12 >= next_tick) snapshot(state);
  };
  // Event boundaries are the stage moments; sample them even when the
  // cadence grid misses them (instantaneous events excepted, to keep
  // the time axis strictly increasing).
  hooks.on_boundary = [&](std::size_t event_index, const PhaseSpaceState& state) {
    map.markers.push_back({roman_numeral(event_index + 1), state.time()});
    if (map.times.empty() || state.time() > map.times.back() + 1e-12) snapshot(state);
  };

  run_sequence_traced(seq, hooks);
  return map;
}

}  // namespace spinfreeze
