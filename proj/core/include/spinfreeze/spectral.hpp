#pragma once

#include <complex>
#include <string>
#include <vector>

#include "spinfreeze/engine.hpp"
#include "spinfreeze/protocol.hpp"

namespace spinfreeze {

// Discrete spectrum of the velocity-averaged coherence profile.
// k ascending in units of k0; amplitudes are Fourier coefficients
// (DFT / nz), so summing the bins of one diffraction order reads off
// that order's coefficient at the cloud center: 1 for the fresh k0
// line. Parseval holds as sum |amplitude|^2 = mean_z |profile|^2.
struct KSpectrum {
  std::vector<double> k;
  std::vector<std::complex<double>> amplitude;
  double t = 0.0;  // units of tau

  double dk() const;
  void validate() const;
};

KSpectrum v_averaged_spectrum(const PhaseSpaceState& state);

// Diffraction-order decomposition of a sinusoidal phase imprint applied
// in k space: out(k) = sum_n J_n(area) in(k - n q), |n| <= n_max, with
// periodic wraparound matching the real-space imprint. q must land on a
// k bin. The truncation tail sum_{|n|>n_max} J_n(area)^2 is reported.
struct ModulatedSpectrum {
  KSpectrum spectrum;
  double truncation_tail = 0.0;
};

ModulatedSpectrum kspace_modulate(const KSpectrum& spec, double q, double area, int n_max);

// Complex sum of the bins within |k - center| <= halfwidth. Throws if
// the window contains no bins.
std::complex<double> order_amplitude(const KSpectrum& spec, double center, double halfwidth);

struct StageMarker {
  std::string label;  // Roman numeral: I, II, ...
  double t = 0.0;     // units of tau
};

struct FourierMap {
  std::vector<double> times;  // strictly increasing, units of tau
  std::vector<KSpectrum> spectra;
  std::vector<StageMarker> markers;
};

// Runs the sequence, snapshotting the velocity-averaged spectrum every
// `sampling` time units, with a stage marker at each event boundary.
FourierMap build_fourier_map(const Sequence& seq, double sampling);

}  // namespace spinfreeze
