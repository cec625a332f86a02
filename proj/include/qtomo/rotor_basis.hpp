#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qtomo {

// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Product quadrature grid for the sphere: Gauss-Legendre in cos(theta),
// uniform periodic nodes in phi. Sum of combined weights is 4*pi.
struct AngularGrid {
  std::vector<double> theta;        // ascending in theta
  std::vector<double> theta_weight; // Gauss-Legendre weights in x = cos(theta)
  std::vector<double> phi;          // uniform on [0, 2*pi)
  double phi_weight = 0.0;          // 2*pi / n_phi

  AngularGrid() = default;
  AngularGrid(int n_theta, int n_phi);

  int n_theta() const { return static_cast<int>(theta.size()); }
  int n_phi() const { return static_cast<int>(phi.size()); }

  // Throws std::invalid_argument naming the violated bound if the grid cannot
  // integrate products of harmonics retained at j_max exactly.
  void require_supports(int j_max) const;
};

// Linear-rotor eigenbasis |J,m>, 0 <= J <= j_max, -J <= m <= J.
// The rotational constant is stored in cm^-1; energies are exposed both in
// cm^-1 and as angular frequencies.
class RotorBasis {
 public:
  RotorBasis(int j_max, double rotational_constant_cm);

  int j_max() const { return j_max_; }
  double rotational_constant_cm() const { return b_cm_; }

  // dimension of the full basis, (j_max+1)^2
  int size() const { return (j_max_ + 1) * (j_max_ + 1); }

  // composite index of |J,m> in the canonical enumeration
  int index(int j, int m) const;

  double energy_cm(int j) const;            // B*J(J+1) in cm^-1
  double angular_frequency(int j) const;    // E_J / hbar in rad/s
  double omega_b() const { return omega_b_; } // 2*pi*c*B, rad/s per unit J(J+1)
  double moment_of_inertia() const;         // hbar / (4*pi*c*B), kg m^2

  // Time after which every retained coherence phase returns to 1: pi/omega_b.
  double revival_time() const;

 private:
  int j_max_;
  double b_cm_;
  double omega_b_;
};

// Theta-normalized associated Legendre functions with the Condon-Shortley phase:
//   integral_0^pi Ptilde_J^m Ptilde_J'^m sin(theta) dtheta = delta_JJ'
// and Ptilde_J^{-m} = (-1)^m Ptilde_J^m. Throws std::invalid_argument for |m| > J.
double normalized_legendre_at(int j, int m, double x);
std::vector<double> normalized_legendre(int j, int m, const std::vector<double>& theta_nodes);

// Values of Ptilde_J^m(x) for all J = |m| .. j_max (upward recurrence).
void normalized_legendre_column(int m, int j_max, double x, std::vector<double>& out);

// Y_Jm(theta, phi) = Ptilde_J^m(cos theta) * exp(i m phi) / sqrt(2 pi).
std::complex<double> spherical_harmonic(int j, int m, double theta, double phi);

// <J' m | cos^2(theta) | J m> within one m-block; indices run J = |m| .. j_max.
// Nonzero only for J' in {J, J+-2}; real symmetric.
Eigen::MatrixXd cos2_block(int j_max, int m);

// Full <J'm'|cos^2|Jm> over the composite basis (zero unless m'=m).
Eigen::MatrixXd cos2_matrix_elements(int j_max);

struct ResolutionRequirement {
  double delta_t_max;     // seconds
  double delta_theta_max; // radians
  int max_beta_alpha;     // max over pairs of |DeltaJ| * (J1+J2+1)
};

// Sampling bounds needed to recover a density matrix up to j_max:
//   delta_t  <= I / (hbar * max |DeltaJ|(J1+J2+1)),
//   delta_th <= pi / (2 j_max).
ResolutionRequirement resolution_requirements(int j_max, const RotorBasis& basis);

} // namespace qtomo
