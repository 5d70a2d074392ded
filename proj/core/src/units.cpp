#include "spinfreeze/units.hpp"

#include <cmath>
#include <stdexcept>

#include "spinfreeze/constants.hpp"

namespace spinfreeze {

namespace {
constexpr double kDefaultLatticeAngleDeg = 18.5;
}

double default_gamma() { return 1.0 / (2.0 * constants::pi * 24.1e-6); }

PhysicalParams::PhysicalParams() {
  atomic_mass = constants::rb87_mass_u * constants::atomic_mass_unit;
  gamma = default_gamma();
  lattice_angle = kDefaultLatticeAngleDeg * constants::pi / 180.0;
}

void PhysicalParams::validate() const {
  if (!(lambda_probe > 0.0))
    throw std::invalid_argument("physical params: lambda_probe must be > 0");
  if (!(lambda_coupling > 0.0))
    throw std::invalid_argument("physical params: lambda_coupling must be > 0");
  if (!(lattice_wavelength > 0.0))
    throw std::invalid_argument("physical params: lattice_wavelength must be > 0");
  if (!(temperature > 0.0))
    throw std::invalid_argument("physical params: temperature must be > 0");
  if (!(atomic_mass > 0.0))
    throw std::invalid_argument("physical params: atomic_mass must be > 0");
  if (!(gamma >= 0.0))
    throw std::invalid_argument("physical params: gamma must be >= 0");
  if (!(lattice_angle > 0.0 && lattice_angle < constants::pi))
    throw std::invalid_argument("physical params: lattice_angle must be in (0, pi)");
  if (geometry != BeamGeometry::counter_propagating)
    throw std::invalid_argument("physical params: unsupported beam geometry");
}

Scales derive_scales(const PhysicalParams& p) {
  p.validate();
  Scales s;
  // Counter-propagating probe and coupling beams: the spin-wave
  // wavenumber is the magnitude of the two-photon wavevector mismatch.
  s.k0 = 2.0 * constants::pi * std::abs(1.0 / p.lambda_probe - 1.0 / p.lambda_coupling);
  s.v_t = std::sqrt(constants::k_boltzmann * p.temperature / p.atomic_mass);
  s.tau = 1.0 / (s.k0 * s.v_t);
  s.q_lattice = (4.0 * constants::pi / p.lattice_wavelength) * std::sin(p.lattice_angle / 2.0);
  return s;
}

DimensionlessConfig to_dimensionless(const PhysicalParams& p, const Scales& s) {
  p.validate();
  if (!(s.k0 > 0.0 && s.v_t > 0.0 && s.tau > 0.0))
    throw std::invalid_argument("to_dimensionless: scales must be derived first");
  DimensionlessConfig d;
  d.gamma = p.gamma * s.tau;
  d.q_lattice = s.q_lattice / s.k0;
  d.scales = s;
  return d;
}

std::string to_string(BeamGeometry g) {
  switch (g) {
    case BeamGeometry::counter_propagating:
      return "counter_propagating";
  }
  return "unknown";
}

BeamGeometry beam_geometry_from_string(const std::string& s) {
  if (s == "counter_propagating") return BeamGeometry::counter_propagating;
  throw std::invalid_argument("unknown beam geometry '" + s +
                              "' (supported: counter_propagating)");
}

}  // namespace spinfreeze
