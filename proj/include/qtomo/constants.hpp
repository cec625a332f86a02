#pragma once

// Physical constants (SI, CODATA 2018) and the unit conversions used
// throughout. Internal conventions:
//   - rotational constants are stored in cm^-1,
//   - times in seconds, lengths in Angstrom where noted, otherwise SI,
//   - momentum transfer in inverse Angstrom,
//   - vibrational coordinates are dimensionless (mass-scaled).

namespace qtomo::constants {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double planck_h = 6.62607015e-34;     // J s
inline constexpr double c_light = 2.99792458e8;        // m/s
inline constexpr double c_light_cm = 2.99792458e10;    // cm/s
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m
inline constexpr double amu = 1.66053906660e-27;       // kg

// E(cm^-1) -> angular frequency (rad/s)
inline constexpr double omega_per_cm = 2.0 * 3.14159265358979323846 * c_light_cm;

// photon wavelength lambda [A] = keV_to_angstrom / E[keV]
inline constexpr double kev_to_angstrom = 12.398419843320026;

} // namespace qtomo::constants
