#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/rotor_basis.hpp"

namespace qtomo {

struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int n_t = 0;
  double at(int n) const { return t0 + n * dt; }
  double span() const { return n_t * dt; }
};

// Pr(theta, phi, t) sampled on the product grid; frames[t](i_theta, i_phi).
struct AngularMovie {
  AngularGrid grid;
  TimeGrid time;
  std::vector<Eigen::MatrixXd> frames;

  double frame_integral(int t) const;
  // weighted L2 norm over sin(theta) dtheta dphi dt
  double weighted_l2() const;
};

// One reduced density Pr_{m1,m2}(theta, t). The azimuthal factor
// exp(i (m1-m2) phi) / 2 pi is not included here; it belongs to the k-sector
// assembly, so that summing blocks with m1 - m2 = k reproduces k_sector().
struct BlockDensity {
  int m1 = 0, m2 = 0;
  Eigen::MatrixXcd values; // n_theta x n_t
  std::vector<double> theta;
  std::vector<double> theta_weight;
  TimeGrid time;
};

// Eq-style forward map: Pr = sum rho_{J1m1,J2m2} Y_{J1m1} Y*_{J2m2} e^{-i dw (t - tag)}.
// Output is real and per-frame normalized to the trace of rho.
AngularMovie density_to_probability(const DensityMatrix& rho, const RotorBasis& basis,
                                    const AngularGrid& grid, const TimeGrid& time);

BlockDensity block_probability(const DensityMatrix& rho, int m1, int m2,
                               const RotorBasis& basis, const AngularGrid& grid,
                               const TimeGrid& time);

// k-th azimuthal Fourier sector: integral Pr e^{-i k phi} dphi, equal to the
// sum of Pr_{m1,m2} over m1 - m2 = k. Exact for band-limited movies.
Eigen::MatrixXcd k_sector(const AngularMovie& movie, int k);

// Inverse of block_probability: a DFT over the time axis separates beat
// frequencies, then a weighted least-squares solve on the theta profiles
// separates pairs (J1,J2) sharing one frequency. Returned elements are
// phase-referenced at t = 0 of the block's time coordinate.
// Throws AliasingError if the time grid cannot resolve the retained
// frequencies and DegenerateBasisError if a frequency class loses rank.
Eigen::MatrixXcd invert_block(const BlockDensity& block, int j_max, const RotorBasis& basis);

// J(J+1) - J'(J'+1) classes for one block; exact integer arithmetic.
struct FrequencyClass {
  int nu; // J1(J1+1) - J2(J2+1)
  std::vector<std::pair<int, int>> pairs;
};
std::vector<FrequencyClass> frequency_classes(int m1, int m2, int j_max);

} // namespace qtomo
