#pragma once

// Physical constants used for unit conversions, CODATA-2018 values.
// Kept in one place so every conversion in the project agrees to the
// last digit.

namespace spinfreeze::constants {

// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
inline constexpr double k_boltzmann = 1.380649e-23;

// Atomic mass unit, kg (10 significant digits).
inline constexpr double atomic_mass_unit = 1.660539067e-27;

// Rubidium-87 atomic mass in u (AME2020).
inline constexpr double rb87_mass_u = 86.90918053;

inline constexpr double pi = 3.14159265358979323846;

}  // namespace spinfreeze::constants
