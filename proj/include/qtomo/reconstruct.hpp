#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/rotor_basis.hpp"
#include "qtomo/state_prep.hpp"
#include "qtomo/wavepacket_map.hpp"

namespace qtomo {

// Physical-state constraints applied in density-matrix space. Every toggle is
// an idempotent projection on its own domain; the application order is fixed
// in project_density.
struct ConstraintSet {
  bool hermitize = true;
  bool zero_forbidden_blocks = true; // m1 != m2 blocks
  bool zero_odd_delta_j = true;      // odd J1-J2 coherences inside blocks
  bool psd = true;                   // clip negative eigenvalues
  bool pin_partial_traces = true;    // per-m (and per-parity) populations
  bool pin_parity = true;            // pin even/odd J classes separately
  bool mirror_m_blocks = true;       // enforce block(m,m) == block(-m,-m)
  bool unit_trace = true;

  // target population per (m, J parity); parity key is 0 or 1
  std::map<std::pair<int, int>, double> trace_targets;

  // Fills trace_targets from a reference state (normally the thermal guess).
  void set_targets_from(const DensityMatrix& reference);
};

struct ReconstructionTrace {
  std::vector<double> eps_rho;        // empty when no ground truth given
  std::vector<double> eps_pr;
  std::vector<double> iterate_change; // Frobenius distance between iterates
  std::vector<double> herm_violation; // pre-projection diagnostics
  std::vector<double> psd_floor;
  std::vector<double> trace_deviation;
  std::vector<double> forbidden_mass;
  std::vector<double> wall_time_s;
  int iterations = 0;
  bool converged = false;
};

struct ReconstructOptions {
  int j_max = 5;
  int n_iter = 50;
  double tol = 1e-8;
  double temperature_k = 30.0;
  double g_even = 6.0;
  double g_odd = 3.0;
  ConstraintSet constraints;
  // ground truth at time_tag 0 enables the eps_rho column
  std::optional<DensityMatrix> ground_truth;
};

// Thermal-equilibrium initial guess (delegates to thermal_state).
DensityMatrix initial_guess(double temperature_k, int j_max, const RotorBasis& basis,
                            double g_even = 6.0, double g_odd = 3.0);

// Probability-space constraint: model blocks of rho_iter are rescaled
// pointwise by measured_k / model_k of their azimuthal sector (guarded below
// |model| <= 1e-12, where the ratio is taken as 1).
std::vector<BlockDensity> project_probability(const DensityMatrix& rho_iter,
                                              const AngularMovie& measured,
                                              const RotorBasis& basis);

// Density-space constraint projection. Fixed order: hermitize, zero forbidden
// blocks, PSD clip, partial-trace pinning, m <-> -m averaging, global trace.
// Throws DegenerateStateError if clipping annihilates the state.
DensityMatrix project_density(const DensityMatrix& rho, const ConstraintSet& constraints);

// Full iterative reconstruction from a measured movie.
std::pair<DensityMatrix, ReconstructionTrace> reconstruct(const AngularMovie& measured,
                                                          const RotorBasis& basis,
                                                          const ReconstructOptions& opt);

struct ErrorMetrics {
  double eps_rho;
  double eps_pr;
};

// eps_rho = ||rho_hat - rho_true||_F / ||rho_true||_F;
// eps_pr = relative L2(sin(theta) dtheta dphi dt) distance between movies.
double eps_rho_metric(const DensityMatrix& rho_hat, const DensityMatrix& rho_true);
double eps_pr_metric(const AngularMovie& movie_hat, const AngularMovie& movie_true);
ErrorMetrics error_metrics(const DensityMatrix& rho_hat, const DensityMatrix& rho_true,
                           const AngularMovie& movie_hat, const AngularMovie& movie_true);

} // namespace qtomo
