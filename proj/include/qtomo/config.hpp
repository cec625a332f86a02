#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qtomo {

// Run configuration for the rotational pipeline plus the vibrational variant.
// Defaults reproduce the reference scenario: N2 at 30 K kicked by a 50 fs,
// 1e13 W/cm^2 Gaussian pulse and probed with 20 keV photons.
struct RunConfig {
  struct Species {
    std::string name = "N2";
    std::string element = "N";
    double rotational_constant_cm = 1.98958;
    double bond_length_a = 1.0977;
    double dalpha_a3 = 0.93;
    double z = 7.0;
    double g_even = 6.0;
    double g_odd = 3.0;
    std::string form_factor_table = "data/form_factors.txt";
  } species;

  double temperature_k = 30.0;

  struct Pulse {
    double peak_intensity_w_cm2 = 1e13;
    double fwhm_fs = 50.0;
    double window_fwhms = 3.0;
    int steps_per_fwhm = 25;
  } pulse;

  struct Grids {
    int n_theta = 48;
    int n_phi = 44;
    int n_t = 192;       // frames over one fundamental period
    double t0_fs = 200.0; // movie start after the pulse
  } grids;

  struct Detector {
    double energy_kev = 20.0;
    double q_min = 0.5;
    double q_max = 8.0;
    int n_q = 24;
    int n_az = 64;
    std::string mode = "xray"; // or "electron"
  } detector;

  struct Reconstruction {
    int j_max = 5;
    int j_max_truth = 0; // 0 -> 2 * j_max
    int n_iter = 50;
    double tol = 1e-8;
    double lambda = 1e-6;
    bool lambda_auto = false;
    int l_max = 0; // 0 -> 2 * j_max
    bool even_l_only = true;
    bool use_inverted_movie = true; // false -> reconstruct from the stored movie
    bool pin_parity = true;
    bool mirror_m_blocks = true;
  } reconstruction;

  struct Noise {
    bool enabled = false;
    double scale = 1.0; // expected counts at the strongest pixel
    uint64_t seed = 12345;
  } noise;

  struct Vib {
    std::vector<int> r = {1, 2};
    std::vector<int> n_max = {3, 3};
    double x_max = 8.5;
    int n_x = 141;
    int n_t = 64;
    std::string state = "random-rank2"; // or "ground", "thermal-like"
    uint64_t seed = 7;
    int n_iter = 100;
    double tol = 1e-10;
  } vib;

  int effective_j_max_truth() const;
  int effective_l_max() const;

  // canonical key-sorted JSON of the full configuration
  std::string canonical_json() const;
  uint64_t hash() const; // FNV-1a over canonical_json()

  // Throws ConfigError (with the violated inequality) when the grids cannot
  // support reconstruction at j_max.
  void validate() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

uint64_t fnv1a64(const std::string& bytes);

} // namespace qtomo
