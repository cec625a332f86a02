#include "qtomo/diffraction.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qtomo/constants.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

using std::numbers::pi;

double CromerMann::f(double q) const {
  double s2 = q / (4.0 * pi);
  s2 *= s2;
  double v = c;
  for (int i = 0; i < 4; ++i) v += a[i] * std::exp(-b[i] * s2);
  return v;
}

double CromerMann::mott_bethe_small_q(double /*z*/) const {
  // (Z - f(q))/q^2 -> sum a_i b_i / (4 pi)^2 as q -> 0; the residual Z - f(0)
  // of the fit is dropped so the electron branch stays finite.
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += a[i] * b[i];
  return s / (16.0 * pi * pi);
}

CromerMann load_form_factor(const std::string& path, const std::string& element) {
  std::ifstream in(path);
  if (!in) throw DataError("form factor table not found: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    CromerMann cm;
    ss >> cm.element;
    for (int i = 0; i < 4; ++i) ss >> cm.a[i] >> cm.b[i];
    ss >> cm.c;
    if (!ss) throw DataError("malformed form factor line: " + line);
    if (cm.element == element) return cm;
  }
  throw DataError("element " + element + " not in form factor table " + path);
}

double DetectorGrid::k_in() const {
  if (mode == BeamMode::XRay) {
    double lambda_a = constants::kev_to_angstrom / energy_kev;
    return 2.0 * pi / lambda_a;
  }
  // relativistic electron wavelength
  double e_j = energy_kev * 1e3 * 1.602176634e-19;
  double me_c2 = 9.1093837015e-31 * constants::c_light * constants::c_light;
  double p = std::sqrt(e_j * (e_j + 2.0 * me_c2)) / constants::c_light;
  double lambda_m = constants::planck_h / p;
  return 2.0 * pi / (lambda_m * 1e10);
}

void DetectorGrid::validate() const {
  if (q.empty() || az.empty()) throw std::invalid_argument("DetectorGrid: empty axes");
  for (size_t i = 1; i < q.size(); ++i)
    if (q[i] <= q[i - 1]) throw std::invalid_argument("DetectorGrid: q not strictly increasing");
  for (size_t i = 1; i < az.size(); ++i)
    if (az[i] <= az[i - 1]) throw std::invalid_argument("DetectorGrid: az not strictly increasing");
  double kin = k_in();
  if (q.back() > 2.0 * kin)
    throw std::invalid_argument("DetectorGrid: |Q| exceeds 2 k_in");
}

Eigen::Vector3d DetectorGrid::q_vector(int iq, int iaz) const {
  // scattering angle from |Q| = 2 k sin(theta_s / 2); beam along +y
  double kin = k_in();
  double ts = 2.0 * std::asin(std::min(1.0, q[iq] / (2.0 * kin)));
  double psi = az[iaz];
  Eigen::Vector3d kf(kin * std::sin(ts) * std::cos(psi), kin * std::cos(ts),
                     kin * std::sin(ts) * std::sin(psi));
  return kf - Eigen::Vector3d(0.0, kin, 0.0);
}

DetectorGrid DetectorGrid::uniform(double energy_kev, double q_min, double q_max, int n_q,
                                   int n_az, BeamMode mode) {
  DetectorGrid d;
  d.energy_kev = energy_kev;
  d.mode = mode;
  d.q.resize(n_q);
  for (int i = 0; i < n_q; ++i)
    d.q[i] = q_min + (q_max - q_min) * (n_q == 1 ? 0.0 : static_cast<double>(i) / (n_q - 1));
  d.az.resize(n_az);
  for (int i = 0; i < n_az; ++i) d.az[i] = 2.0 * pi * i / n_az;
  d.validate();
  return d;
}

double molecular_form_factor_sq(const Eigen::Vector3d& q_vec, double theta, double phi,
                                const CromerMann& ff, double bond_length_a, BeamMode mode,
                                double z) {
  Eigen::Vector3d u(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                    std::cos(theta));
  double qn = q_vec.norm();
  double interference = 2.0 * (1.0 + std::cos(q_vec.dot(u) * bond_length_a));
  if (mode == BeamMode::XRay) {
    double f = ff.f(qn);
    return f * f * interference;
  }
  double amp;
  if (qn < 1e-3) {
    amp = ff.mott_bethe_small_q(z);
  } else {
    amp = (z - ff.f(qn)) / (qn * qn);
  }
  return amp * amp * interference;
}

DiffractionDataset simulate_patterns(const AngularMovie& movie, const DetectorGrid& detector,
                                     const CromerMann& ff, double bond_length_a, double z) {
  detector.validate();
  int n_q = detector.n_q(), n_az = detector.n_az();
  int n_theta = movie.grid.n_theta(), n_phi = movie.grid.n_phi();
  int n_pix = n_q * n_az, n_ang = n_theta * n_phi;

  // kernel K(pixel, angle) = w(angle) |F(Q, theta, phi)|^2
  Eigen::MatrixXd kernel(n_pix, n_ang);
  parallel_for(n_pix, [&](int pix) {
    int iq = pix / n_az, iaz = pix % n_az;
    Eigen::Vector3d qv = detector.q_vector(iq, iaz);
    for (int it = 0; it < n_theta; ++it) {
      double w = movie.grid.theta_weight[it] * movie.grid.phi_weight;
      for (int ip = 0; ip < n_phi; ++ip) {
        kernel(pix, it * n_phi + ip) =
            w * molecular_form_factor_sq(qv, movie.grid.theta[it], movie.grid.phi[ip], ff,
                                         bond_length_a, detector.mode, z);
      }
    }
  });

  DiffractionDataset out;
  out.detector = detector;
  out.time = movie.time;
  out.bond_length_a = bond_length_a;
  out.z = z;
  out.frames.assign(movie.time.n_t, Eigen::MatrixXd::Zero(n_q, n_az));
  parallel_for(movie.time.n_t, [&](int t) {
    Eigen::VectorXd pr(n_ang);
    for (int it = 0; it < n_theta; ++it)
      for (int ip = 0; ip < n_phi; ++ip) pr(it * n_phi + ip) = movie.frames[t](it, ip);
    Eigen::VectorXd i_vec = kernel * pr;
    for (int pix = 0; pix < n_pix; ++pix) out.frames[t](pix / n_az, pix % n_az) = i_vec(pix);
  });
  return out;
}

namespace {

struct HarmonicIndex {
  int l, mu;
};

// real spherical harmonics S_{l,mu}: mu=0 -> Y_l0; mu>0 -> sqrt(2) Re Y_l,mu;
// mu<0 -> sqrt(2) Im Y_l,|mu|
double real_sph(int l, int mu, double theta, double phi) {
  if (mu == 0) return normalized_legendre_at(l, 0, std::cos(theta)) / std::sqrt(2.0 * pi);
  int am = std::abs(mu);
  double p = normalized_legendre_at(l, am, std::cos(theta)) / std::sqrt(pi);
  return (mu > 0) ? p * std::cos(am * phi) : p * std::sin(am * phi);
}

std::vector<HarmonicIndex> harmonic_set(int l_max, bool even_only, int mu_nyquist) {
  std::vector<HarmonicIndex> set;
  for (int l = 0; l <= l_max; l += (even_only ? 2 : 1))
    for (int mu = -l; mu <= l; ++mu)
      if (std::abs(mu) <= mu_nyquist) set.push_back({l, mu});
  return set;
}

struct InversionOperator {
  std::vector<HarmonicIndex> set;
  Eigen::MatrixXd basis_on_grid; // n_ang x n_coeff, S values
  Eigen::BDCSVD<Eigen::MatrixXd> svd;
  double sigma2_mean = 0.0;
};

InversionOperator build_operator(const DiffractionDataset& data, const CromerMann& ff,
                                 const AngularGrid& grid, int l_max, bool even_only) {
  const DetectorGrid& det = data.detector;
  int n_pix = det.n_q() * det.n_az();
  int mu_nyq = (det.n_az() - 1) / 2;
  InversionOperator op;
  op.set = harmonic_set(l_max, even_only, mu_nyq);
  int n_coeff = static_cast<int>(op.set.size());
  if (n_pix < n_coeff)
    throw DataError("invert_patterns: detector coverage " + std::to_string(n_pix) +
                    " pixels underdetermines " + std::to_string(n_coeff) + " coefficients");

  int n_theta = grid.n_theta(), n_phi = grid.n_phi();
  int n_ang = n_theta * n_phi;
  op.basis_on_grid.resize(n_ang, n_coeff);
  for (int c = 0; c < n_coeff; ++c)
    for (int it = 0; it < n_theta; ++it)
      for (int ip = 0; ip < n_phi; ++ip)
        op.basis_on_grid(it * n_phi + ip, c) =
            real_sph(op.set[c].l, op.set[c].mu, grid.theta[it], grid.phi[ip]);

  // design matrix G(pixel, coeff) = integral S_lmu |F|^2 dOmega
  Eigen::MatrixXd g(n_pix, n_coeff);
  parallel_for(n_pix, [&](int pix) {
    int iq = pix / det.n_az(), iaz = pix % det.n_az();
    Eigen::Vector3d qv = det.q_vector(iq, iaz);
    Eigen::VectorXd kern(n_ang);
    for (int it = 0; it < n_theta; ++it) {
      double w = grid.theta_weight[it] * grid.phi_weight;
      for (int ip = 0; ip < n_phi; ++ip)
        kern(it * n_phi + ip) = w * molecular_form_factor_sq(qv, grid.theta[it], grid.phi[ip],
                                                             ff, data.bond_length_a,
                                                             det.mode, data.z);
    }
    g.row(pix) = kern.transpose() * op.basis_on_grid;
  });

  op.svd.compute(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  op.sigma2_mean = op.svd.singularValues().squaredNorm() / n_coeff;
  return op;
}

Eigen::VectorXd tikhonov_solve(const InversionOperator& op, const Eigen::VectorXd& rhs,
                               double lambda_abs) {
  const auto& sv = op.svd.singularValues();
  Eigen::VectorXd ut = op.svd.matrixU().transpose() * rhs;
  Eigen::VectorXd filt(sv.size());
  for (int i = 0; i < sv.size(); ++i) filt(i) = sv(i) * ut(i) / (sv(i) * sv(i) + lambda_abs);
  return op.svd.matrixV() * filt;
}

} // namespace

AngularMovie invert_patterns(const DiffractionDataset& data, const CromerMann& ff,
                             const AngularGrid& out_grid, double lambda, int l_max,
                             bool even_only, InvertStats* stats, bool renormalize) {
  if (lambda <= 0.0) throw std::invalid_argument("invert_patterns: lambda must be > 0");
  InversionOperator op = build_operator(data, ff, out_grid, l_max, even_only);
  double lambda_abs = lambda * op.sigma2_mean;

  AngularMovie movie;
  movie.grid = out_grid;
  movie.time = data.time;
  movie.frames.assign(data.time.n_t,
                      Eigen::MatrixXd::Zero(out_grid.n_theta(), out_grid.n_phi()));

  double clipped = 0.0;
  int n_theta = out_grid.n_theta(), n_phi = out_grid.n_phi();
  for (int t = 0; t < data.time.n_t; ++t) {
    Eigen::VectorXd rhs(data.detector.n_q() * data.detector.n_az());
    for (int iq = 0; iq < data.detector.n_q(); ++iq)
      for (int iaz = 0; iaz < data.detector.n_az(); ++iaz)
        rhs(iq * data.detector.n_az() + iaz) = data.frames[t](iq, iaz);
    Eigen::VectorXd coeff = tikhonov_solve(op, rhs, lambda_abs);
    Eigen::VectorXd vals = op.basis_on_grid * coeff;
    Eigen::MatrixXd frame(n_theta, n_phi);
    for (int it = 0; it < n_theta; ++it)
      for (int ip = 0; ip < n_phi; ++ip) frame(it, ip) = vals(it * n_phi + ip);

    if (renormalize) {
      for (int it = 0; it < n_theta; ++it)
        for (int ip = 0; ip < n_phi; ++ip)
          if (frame(it, ip) < 0.0) {
            clipped += -frame(it, ip) * out_grid.theta_weight[it] * out_grid.phi_weight;
            frame(it, ip) = 0.0;
          }
      double integral = 0.0;
      for (int it = 0; it < n_theta; ++it)
        integral += out_grid.theta_weight[it] * frame.row(it).sum() * out_grid.phi_weight;
      if (integral > 0.0) frame /= integral;
    }
    movie.frames[t] = frame;
  }
  if (stats) {
    stats->clipped_mass = clipped;
    stats->n_coefficients = static_cast<int>(op.set.size());
    stats->lambda_used = lambda;
  }
  return movie;
}

double choose_lambda_lcurve(const DiffractionDataset& data, const CromerMann& ff,
                            const AngularGrid& out_grid, int l_max, bool even_only) {
  InversionOperator op = build_operator(data, ff, out_grid, l_max, even_only);
  // aggregate rhs over frames to keep the scan cheap and deterministic
  int n_pix = data.detector.n_q() * data.detector.n_az();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_pix);
  for (int t = 0; t < data.time.n_t; ++t)
    for (int iq = 0; iq < data.detector.n_q(); ++iq)
      for (int iaz = 0; iaz < data.detector.n_az(); ++iaz)
        rhs(iq * data.detector.n_az() + iaz) += data.frames[t](iq, iaz) / data.time.n_t;

  const int n_scan = 25;
  std::vector<double> lg_res(n_scan), lg_sol(n_scan), lambdas(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    double lam = std::pow(10.0, -12.0 + i * 0.5);
    lambdas[i] = lam;
    Eigen::VectorXd c = tikhonov_solve(op, rhs, lam * op.sigma2_mean);
    double res = (op.svd.matrixU() * (op.svd.singularValues().asDiagonal() *
                                      (op.svd.matrixV().transpose() * c)) -
                  rhs)
                     .norm();
    lg_res[i] = std::log10(std::max(res, 1e-300));
    lg_sol[i] = std::log10(std::max(c.norm(), 1e-300));
  }
  // maximum-curvature corner by finite differences on the log-log curve
  int best = 1;
  double best_curv = -1e300;
  for (int i = 1; i + 1 < n_scan; ++i) {
    double d1x = lg_res[i + 1] - lg_res[i - 1];
    double d1y = lg_sol[i + 1] - lg_sol[i - 1];
    double d2x = lg_res[i + 1] - 2 * lg_res[i] + lg_res[i - 1];
    double d2y = lg_sol[i + 1] - 2 * lg_sol[i] + lg_sol[i - 1];
    double denom = std::pow(d1x * d1x + d1y * d1y, 1.5);
    if (denom < 1e-12) continue;
    double curv = std::abs(d1x * d2y - d1y * d2x) / denom;
    if (curv > best_curv) {
      best_curv = curv;
      best = i;
    }
  }
  return lambdas[best];
}

} // namespace qtomo
