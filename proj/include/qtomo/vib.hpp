#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "qtomo/reconstruct.hpp"

namespace qtomo {

// N commensurate harmonic modes with frequencies w_i = r_i w0. Coordinates are
// dimensionless (mass-scaled); times are in units of the fundamental period
// T = 2 pi / w0.
struct VibBasis {
  std::vector<int> r;
  std::vector<int> n_max;

  VibBasis(std::vector<int> r_in, std::vector<int> n_max_in);

  int n_modes() const { return static_cast<int>(r.size()); }
  int dim() const;
  int flat(const std::vector<int>& n) const;
  std::vector<int> multi(int flat_index) const;
  int k_of(const std::vector<int>& delta) const; // sum delta_i r_i
  int k_range() const;                           // sum n_max_i r_i
};

struct VibDensityMatrix {
  VibBasis basis;
  Eigen::MatrixXcd mat;
  explicit VibDensityMatrix(VibBasis b)
      : basis(std::move(b)), mat(Eigen::MatrixXcd::Zero(basis.dim(), basis.dim())) {}
};

struct VibGrid {
  std::vector<double> x; // uniform, ascending
  double dx = 0.0;
  static VibGrid uniform(double x_max, int n);
};

// Pr(x1..xN, t) on the flattened joint grid (row-major over modes), sampled at
// n_t uniform times over one fundamental period.
struct VibMovie {
  std::vector<VibGrid> grids;
  int n_t = 0;
  std::vector<Eigen::VectorXd> frames;
  long joint_size() const;
};

// Unit-normalized Hermite function phi_n at the nodes.
std::vector<double> ho_eigenfunction(int n, const std::vector<double>& x_nodes);

// Pattern (sampling) function f_mn(x) = d/dx [ phi_m(x) psi_n(x) ], with psi_n
// the irregular solution at E_n normalized so that W[phi_n, psi_n] = 2. The
// irregular solution is integrated outward with periodic rescaling; throws
// std::domain_error if the grid does not extend 5 oscillator lengths past the
// larger classical turning point.
std::vector<double> sampling_function(int m, int n, const std::vector<double>& x_nodes);

VibMovie vib_density_to_probability(const VibDensityMatrix& rho,
                                    const std::vector<VibGrid>& grids, int n_t);

// Temporal Fourier sector (1/T) integral e^{-i k w0 t} Pr dt on the uniform
// time grid; throws AliasingError when n_t cannot hold the retained k range.
Eigen::VectorXcd vib_k_sector(const VibMovie& movie, int k);

// Delta multi-indices contributing to sector k.
std::vector<std::vector<int>> vib_sector_deltas(const VibBasis& basis, int k);

// Inverts one temporal sector. A unique Delta class goes through the
// sampling-function integrals; colliding classes are separated by least
// squares over the x profiles (k = 0 solves the Hermitian-reduced system; the
// imaginary parts of zero-frequency coherences are not observable in Pr and
// come back as zero). Returns a full-size matrix with only this sector's
// elements filled.
Eigen::MatrixXcd vib_invert_block(const Eigen::VectorXcd& sector, int k, const VibBasis& basis,
                                  const std::vector<VibGrid>& grids);

struct VibReconstructOptions {
  int n_iter = 100;
  double tol = 1e-10;
  std::optional<Eigen::MatrixXcd> ground_truth;
};

std::pair<VibDensityMatrix, ReconstructionTrace> vib_reconstruct(
    const VibMovie& movie, const VibBasis& basis, const VibReconstructOptions& opt);

struct VibResolution {
  double delta_x;         // dimensionless
  double delta_t_over_t;  // fraction of the fundamental period
};

// Bounds to determine the density matrix up to order n: dx <= pi/(2 sqrt(2n+1))
// and dt <= T / (2 (n+1) sum_i r_i). The order argument is the highest
// retained quantum number.
VibResolution vib_resolution_requirements(int n_order, const std::vector<int>& r);

// Same bounds in SI units for a mode of reduced mass mu and fundamental
// angular frequency w0 (oscillator length sqrt(hbar/(mu w0))).
std::pair<double, double> vib_resolution_si(int n_order, const std::vector<int>& r,
                                            double mu_kg, double omega0_rad_s);

} // namespace qtomo
