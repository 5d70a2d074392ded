#pragma once

#include <string>

namespace spinfreeze {

enum class BeamGeometry { counter_propagating };

// Laboratory inputs. Defaults reproduce the reference rubidium-87
// Rydberg-memory setup; every field can be overridden from config.
struct PhysicalParams {
  double lambda_probe = 780e-9;     // m
  double lambda_coupling = 480e-9;  // m
  BeamGeometry geometry = BeamGeometry::counter_propagating;
  double temperature = 78e-6;       // K
  double atomic_mass = 0.0;         // kg; 0 selects the Rb-87 default
  double gamma = 0.0;               // 1/s, intensity decay rate; <0 selects default
  double lattice_angle = 0.0;       // rad, full angle between the lattice beams
  double lattice_wavelength = 780e-9;  // m

  PhysicalParams();
  void validate() const;  // throws std::invalid_argument
};

// Derived scales. tau = 1/(k0*v_t) exactly as computed.
struct Scales {
  double k0 = 0.0;         // spin-wave wavenumber, rad/m
  double v_t = 0.0;        // thermal velocity, m/s
  double tau = 0.0;        // dephasing time, s
  double q_lattice = 0.0;  // lattice wavenumber from beam geometry, rad/m
};

Scales derive_scales(const PhysicalParams& p);

// Everything downstream of this struct works in units where
// k0 = v_t = tau = 1 (lengths in 1/k0, velocities in v_t, times in tau).
struct DimensionlessConfig {
  double gamma = 0.0;      // gamma * tau
  double q_lattice = 0.0;  // q_lattice / k0
  Scales scales;

  double time_from_seconds(double t_s) const { return t_s / scales.tau; }
  double seconds_from_time(double t) const { return t * scales.tau; }
  double length_from_meters(double z_m) const { return z_m * scales.k0; }
  double meters_from_length(double z) const { return z / scales.k0; }
  double velocity_from_si(double v_si) const { return v_si / scales.v_t; }
  double si_from_velocity(double v) const { return v * scales.v_t; }
  double wavenumber_from_si(double k_si) const { return k_si / scales.k0; }
  double si_from_wavenumber(double k) const { return k * scales.k0; }
};

DimensionlessConfig to_dimensionless(const PhysicalParams& p, const Scales& s);

// Default intensity decay rate: a 24.1 us radiative lifetime read as
// 1/(2*pi*Gamma), i.e. Gamma = 1/(2*pi * 24.1 us). The alternative
// reading 1/(24.1 us) is obtained by configuring gamma directly.
double default_gamma();

std::string to_string(BeamGeometry g);
BeamGeometry beam_geometry_from_string(const std::string& s);  // throws on unknown

}  // namespace spinfreeze
