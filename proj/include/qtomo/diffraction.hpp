#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qtomo/wavepacket_map.hpp"

namespace qtomo {

// 4-Gaussian Cromer-Mann atomic form factor, f(q) with q in A^-1.
struct CromerMann {
  std::string element;
  double a[4] = {0, 0, 0, 0};
  double b[4] = {0, 0, 0, 0};
  double c = 0;
  double f(double q) const;
  // limit of (Z - f(q)) / q^2 used by the electron (Mott-Bethe) branch
  double mott_bethe_small_q(double z) const;
};

// Text table: one line per element, "El a1 b1 a2 b2 a3 b3 a4 b4 c".
CromerMann load_form_factor(const std::string& path, const std::string& element);

enum class BeamMode { XRay, Electron };

// Flat detector downstream of a beam along laboratory +y; pixels are indexed
// by |Q| and the azimuth around the beam axis.
struct DetectorGrid {
  double energy_kev = 20.0;
  std::vector<double> q;  // A^-1, strictly increasing
  std::vector<double> az; // radians, strictly increasing
  BeamMode mode = BeamMode::XRay;

  int n_q() const { return static_cast<int>(q.size()); }
  int n_az() const { return static_cast<int>(az.size()); }
  double k_in() const; // beam wavenumber in A^-1
  Eigen::Vector3d q_vector(int iq, int iaz) const;
  void validate() const;

  static DetectorGrid uniform(double energy_kev, double q_min, double q_max, int n_q,
                              int n_az, BeamMode mode = BeamMode::XRay);
};

struct DiffractionDataset {
  DetectorGrid detector;
  TimeGrid time;
  std::vector<Eigen::MatrixXd> frames; // n_q x n_az
  std::string species = "N2";
  double bond_length_a = 1.0977;
  double z = 7.0;
};

// |F(Q)|^2 of a homonuclear diatomic with bond direction u(theta,phi) in the
// independent-atom model. X-ray: 2 f(q)^2 (1 + cos(Q.u d)); electron mode uses
// the Mott-Bethe conversion with a series guard at small q.
double molecular_form_factor_sq(const Eigen::Vector3d& q_vec, double theta, double phi,
                                const CromerMann& ff, double bond_length_a, BeamMode mode,
                                double z);

DiffractionDataset simulate_patterns(const AngularMovie& movie, const DetectorGrid& detector,
                                     const CromerMann& ff, double bond_length_a, double z);

struct InvertStats {
  double clipped_mass = 0.0;  // integral of removed negative density
  int n_coefficients = 0;
  double lambda_used = 0.0;
};

// Tikhonov-regularized frame-by-frame expansion of Pr in real spherical
// harmonics up to l_max (even l only if even_only). lambda is relative to the
// mean squared singular value of the design matrix. When renormalize is set
// the frames are clipped at zero and rescaled to unit integral, which is the
// spec'd behavior; raw mode keeps the linear solution for linearity checks.
AngularMovie invert_patterns(const DiffractionDataset& data, const CromerMann& ff,
                             const AngularGrid& out_grid, double lambda, int l_max,
                             bool even_only = true, InvertStats* stats = nullptr,
                             bool renormalize = true);

// L-curve corner scan over a log grid of lambdas (used for lambda = "auto").
double choose_lambda_lcurve(const DiffractionDataset& data, const CromerMann& ff,
                            const AngularGrid& out_grid, int l_max, bool even_only = true);

} // namespace qtomo
