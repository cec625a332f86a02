#pragma once

#include "qtomo/density_matrix.hpp"
#include "qtomo/rotor_basis.hpp"

namespace qtomo {

// Linearly polarized (lab z) alignment pulse with a Gaussian intensity
// envelope centered on t = 0.
struct LaserPulse {
  double peak_intensity_w_cm2 = 1e13;
  double fwhm_s = 50e-15;
  double dalpha_volume_m3 = 0.93e-30; // polarizability anisotropy, volume convention
  double window_fwhms = 3.0;          // propagation window is [-w, w], w = window_fwhms * fwhm

  double intensity_w_m2(double t) const; // Gaussian envelope
  // (1/4) * (4 pi eps0 dalpha) * E0^2(t) / hbar = 2 pi dalpha I(t) / (c hbar), rad/s
  double coupling_rad_s(double t) const;
};

// Degeneracy factor of nuclear-spin statistics for 14N2: 6 (even J), 3 (odd J).
double nuclear_spin_weight(int j, double g_even = 6.0, double g_odd = 3.0);

// Diagonal Boltzmann ensemble with nuclear-spin weights, unit trace.
// Every |J0 m0> at fixed J0 carries the same weight.
DensityMatrix thermal_state(double temperature_k, int j_max, const RotorBasis& basis,
                            double g_even = 6.0, double g_odd = 3.0);

// Propagates rho through the pulse with H = H0 - (1/4) dalpha E^2(t) cos^2(theta)
// using a unitary second-order split step (free half step, kick, free half step).
// The returned state keeps the input time_tag: the pulse window is propagated
// and then the accumulated free phases are referenced back to the pulse
// center, which is the usual impulsive-kick convention. A zero-intensity
// pulse therefore returns the input exactly.
DensityMatrix kick_propagate(const DensityMatrix& rho, const LaserPulse& pulse, double dt,
                             const RotorBasis& basis);

// Multiplies each element by exp(-i (E_J1 - E_J2) t / hbar) and advances time_tag.
DensityMatrix free_evolve(const DensityMatrix& rho, double t, const RotorBasis& basis);

// Tr(rho cos^2 theta), real, in [0, 1].
double expectation_cos2(const DensityMatrix& rho);

} // namespace qtomo
