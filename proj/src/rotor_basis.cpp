#include "qtomo/rotor_basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qtomo/constants.hpp"

namespace qtomo {

using std::numbers::pi;

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on P_n; roots are symmetric about 0.
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

AngularGrid::AngularGrid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1)
    throw std::invalid_argument("AngularGrid: node counts must be positive");
  std::vector<double> x, w;
  gauss_legendre(n_theta, x, w);
  theta.resize(n_theta);
  theta_weight.resize(n_theta);
  // ascending theta = descending x
  for (int i = 0; i < n_theta; ++i) {
    theta[i] = std::acos(x[n_theta - 1 - i]);
    theta_weight[i] = w[n_theta - 1 - i];
  }
  phi.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) phi[j] = 2.0 * pi * j / n_phi;
  phi_weight = 2.0 * pi / n_phi;
}

void AngularGrid::require_supports(int j_max) const {
  int need_theta = 2 * j_max + 1;
  int need_phi = 4 * j_max + 1;
  if (n_theta() < need_theta)
    throw std::invalid_argument("AngularGrid: n_theta=" + std::to_string(n_theta()) +
                                " violates n_theta >= 2*j_max+1 = " + std::to_string(need_theta));
  if (n_phi() < need_phi)
    throw std::invalid_argument("AngularGrid: n_phi=" + std::to_string(n_phi()) +
                                " violates n_phi >= 4*j_max+1 = " + std::to_string(need_phi));
}

RotorBasis::RotorBasis(int j_max, double rotational_constant_cm)
    : j_max_(j_max), b_cm_(rotational_constant_cm) {
  if (j_max < 0) throw std::invalid_argument("RotorBasis: j_max must be >= 0");
  if (b_cm_ <= 0.0) throw std::invalid_argument("RotorBasis: rotational constant must be > 0");
  omega_b_ = constants::omega_per_cm * b_cm_;
}

int RotorBasis::index(int j, int m) const {
  if (j < 0 || j > j_max_ || std::abs(m) > j)
    throw std::invalid_argument("RotorBasis::index: invalid (J,m)");
  return j * j + (j + m);
}

double RotorBasis::energy_cm(int j) const {
  if (j < 0 || j > j_max_) throw std::invalid_argument("rotor_energy: J out of range");
  return b_cm_ * j * (j + 1);
}

double RotorBasis::angular_frequency(int j) const { return omega_b_ * j * (j + 1); }

double RotorBasis::moment_of_inertia() const {
  return constants::hbar / (4.0 * pi * constants::c_light_cm * b_cm_);
}

double RotorBasis::revival_time() const { return pi / omega_b_; }

namespace {

// Ptilde_m^m(x) = (-1)^m sqrt((2m+1)/2 * (2m-1)!!/(2m)!!) * (1-x^2)^{m/2}, m >= 0
double seed_mm(int m, double x) {
  double c = 1.0 / std::sqrt(2.0);
  for (int i = 1; i <= m; ++i) c *= std::sqrt((2.0 * i + 1.0) / (2.0 * i));
  double s = std::pow(std::max(0.0, 1.0 - x * x), 0.5 * m);
  return ((m & 1) ? -1.0 : 1.0) * c * s;
}

} // namespace

void normalized_legendre_column(int m, int j_max, double x, std::vector<double>& out) {
  int ma = std::abs(m);
  if (ma > j_max) throw std::invalid_argument("normalized_legendre: |m| > j_max");
  out.assign(j_max - ma + 1, 0.0);
  double pmm = seed_mm(ma, x);
  out[0] = pmm;
  if (j_max > ma) {
    double pm1 = x * std::sqrt(2.0 * ma + 3.0) * pmm;
    out[1] = pm1;
    double pjm2 = pmm, pjm1 = pm1;
    for (int j = ma + 2; j <= j_max; ++j) {
      double a = std::sqrt((4.0 * j * j - 1.0) / (static_cast<double>(j) * j - static_cast<double>(ma) * ma));
      double b = std::sqrt(((j - 1.0) * (j - 1.0) - static_cast<double>(ma) * ma) / (4.0 * (j - 1.0) * (j - 1.0) - 1.0));
      double pj = a * (x * pjm1 - b * pjm2);
      out[j - ma] = pj;
      pjm2 = pjm1;
      pjm1 = pj;
    }
  }
  if (m < 0 && (ma & 1)) {
    for (auto& v : out) v = -v;
  }
}

double normalized_legendre_at(int j, int m, double x) {
  if (std::abs(m) > j) throw std::invalid_argument("normalized_legendre: requires |m| <= J");
  std::vector<double> col;
  normalized_legendre_column(m, j, x, col);
  return col.back();
}

std::vector<double> normalized_legendre(int j, int m, const std::vector<double>& theta_nodes) {
  if (std::abs(m) > j) throw std::invalid_argument("normalized_legendre: requires |m| <= J");
  std::vector<double> vals(theta_nodes.size());
  for (size_t i = 0; i < theta_nodes.size(); ++i)
    vals[i] = normalized_legendre_at(j, m, std::cos(theta_nodes[i]));
  return vals;
}

std::complex<double> spherical_harmonic(int j, int m, double theta, double phi) {
  double p = normalized_legendre_at(j, m, std::cos(theta));
  double norm = 1.0 / std::sqrt(2.0 * pi);
  return std::polar(p * norm, m * phi);
}

Eigen::MatrixXd cos2_block(int j_max, int m) {
  int ma = std::abs(m);
  if (ma > j_max) throw std::invalid_argument("cos2_block: |m| > j_max");
  int dim = j_max - ma + 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = ma; j <= j_max; ++j) {
    int r = j - ma;
    double denom = (2.0 * j + 3.0) * (2.0 * j - 1.0);
    c(r, r) = 1.0 / 3.0 + (2.0 / 3.0) * (static_cast<double>(j) * (j + 1) - 3.0 * m * m) / denom;
    if (j + 2 <= j_max) {
      double num = (static_cast<double>(j + 1) * (j + 1) - static_cast<double>(m) * m) *
                   (static_cast<double>(j + 2) * (j + 2) - static_cast<double>(m) * m);
      double v = std::sqrt(num) / ((2.0 * j + 3.0) * std::sqrt((2.0 * j + 1.0) * (2.0 * j + 5.0)));
      c(r + 2, r) = v;
      c(r, r + 2) = v;
    }
  }
  return c;
}

Eigen::MatrixXd cos2_matrix_elements(int j_max) {
  if (j_max < 0) throw std::invalid_argument("cos2_matrix_elements: j_max must be >= 0");
  int n = (j_max + 1) * (j_max + 1);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, n);
  RotorBasis idx(j_max, 1.0);
  for (int m = -j_max; m <= j_max; ++m) {
    Eigen::MatrixXd blk = cos2_block(j_max, m);
    int ma = std::abs(m);
    for (int j1 = ma; j1 <= j_max; ++j1)
      for (int j2 = ma; j2 <= j_max; ++j2)
        full(idx.index(j1, m), idx.index(j2, m)) = blk(j1 - ma, j2 - ma);
  }
  return full;
}

ResolutionRequirement resolution_requirements(int j_max, const RotorBasis& basis) {
  if (j_max < 1) throw std::invalid_argument("resolution_requirements: j_max must be >= 1");
  int best = 0;
  for (int j1 = 0; j1 <= j_max; ++j1)
    for (int j2 = 0; j2 <= j_max; ++j2) {
      int v = std::abs((j1 - j2) * (j1 + j2 + 1));
      if (v > best) best = v;
    }
  ResolutionRequirement r;
  r.max_beta_alpha = best;
  r.delta_t_max = basis.moment_of_inertia() / (constants::hbar * best);
  r.delta_theta_max = pi / (2.0 * j_max);
  return r;
}

} // namespace qtomo
