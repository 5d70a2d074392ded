#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "spinfreeze/constants.hpp"
#include "spinfreeze/fft.hpp"

namespace spinfreeze {

// 1D phase-space simulator for the complex coherence amplitude
// rho(z, v, t) of a stored spin wave.
//
// Internal units throughout: lengths in 1/k0, velocities in v_t, times
// in tau = 1/(k0 v_t), so the stored wavenumber is k0 = 1. The z domain
// [-span*L, span*L) is periodic; free streaming is applied spectrally
// (exact sub-grid shifts, no interpolation).

struct GridSpec {
  int nz = 2048;               // points along z, power of two
  int nv = 400;                // velocity classes
  double z_half_span = 4.0;    // half width in units of L
  double v_half_span = 4.0;    // half width in units of v_t
  double cloud_sigma = 15.0 * constants::pi;  // L, cloud std dev in 1/k0

  double z_extent() const { return 2.0 * z_half_span * cloud_sigma; }
  double dz() const { return z_extent() / nz; }
  double dv() const { return 2.0 * v_half_span / (nv - 1); }
  double dk() const { return 2.0 * constants::pi / z_extent(); }
  // Grid points per 2*pi/k0 oscillation of the stored wave.
  double points_per_wave() const { return constants::pi * nz / (z_half_span * cloud_sigma); }

  void validate() const;  // throws std::invalid_argument
};

struct ReadoutSample {
  std::complex<double> amplitude{0.0, 0.0};
  double intensity = 0.0;  // |amplitude|^2, normalized to the t=0 anchor
};

class PhaseSpaceState {
 public:
  // Stored plane wave e^{i k0 z} under a Gaussian density envelope
  // G(z; L) with Gaussian velocity weights (renormalized to sum 1)
  // folded into the amplitude. readout() of the fresh state is 1.
  explicit PhaseSpaceState(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  double time() const { return t_; }
  double k0() const { return k0_; }

  int nz() const { return grid_.nz; }
  int nv() const { return grid_.nv; }
  const std::vector<double>& z_axis() const { return z_; }
  const std::vector<double>& v_axis() const { return v_; }
  const std::vector<double>& velocity_weights() const { return w_; }
  double readout_norm() const { return norm_anchor_; }

  std::complex<double>& at(int iz, int iv) { return data_[std::size_t(iv) * grid_.nz + iz]; }
  const std::complex<double>& at(int iz, int iv) const {
    return data_[std::size_t(iv) * grid_.nz + iz];
  }
  std::complex<double>* row(int iv) { return data_.data() + std::size_t(iv) * grid_.nz; }
  const std::complex<double>* row(int iv) const {
    return data_.data() + std::size_t(iv) * grid_.nz;
  }

  // Free streaming for dt >= 0: every velocity class is displaced by
  // v*dt along z via a spectral phase. Advances the clock.
  void free_evolve(double dt);

  // Sinusoidal phase imprint exp(i * area * sin(q z)) accumulated over
  // `duration` in `substeps` Trotter slices, each one free_evolve
  // followed by the slice's phase factor. duration == 0, substeps == 1
  // is the instantaneous imprint. Advances the clock by `duration`.
  void apply_lattice(double q, double area, double duration, int substeps);

  // Scales the amplitude by exp(-gamma*dt/2) so intensity decays at
  // rate gamma. Does not advance the clock (callers account for time
  // once, through free_evolve / apply_lattice).
  void apply_decay(double dt, double gamma);

  // Position and velocity average against the counter-rotating phase
  // e^{-i k0 z}, normalized so the unmodulated t=0 readout is 1.
  ReadoutSample readout() const;

  // Velocity-averaged position profile sum_v rho[z, v] (weights are
  // already folded into rho).
  std::vector<std::complex<double>> v_averaged_profile() const;

  double norm2() const;  // sum |rho|^2

  // Snapshot support: overwrite the clock (amplitudes go through row()).
  void set_time(double t) { t_ = t; }

 private:
  GridSpec grid_;
  double t_ = 0.0;
  double k0_ = 1.0;
  std::vector<double> z_, v_, w_;
  std::vector<std::complex<double>> readout_phase_;  // e^{-i k0 z}
  double norm_anchor_ = 1.0;
  AlignedComplexVector data_;
  std::shared_ptr<const FftPlan> plan_;
};

inline PhaseSpaceState init_state(const GridSpec& grid) { return PhaseSpaceState(grid); }

}  // namespace spinfreeze
