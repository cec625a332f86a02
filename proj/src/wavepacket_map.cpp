#include "qtomo/wavepacket_map.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qtomo/errors.hpp"

namespace qtomo {

using std::complex;
using std::numbers::pi;

double AngularMovie::frame_integral(int t) const {
  double s = 0.0;
  const Eigen::MatrixXd& f = frames[t];
  for (int i = 0; i < grid.n_theta(); ++i) {
    double row = f.row(i).sum();
    s += grid.theta_weight[i] * row;
  }
  return s * grid.phi_weight;
}

double AngularMovie::weighted_l2() const {
  double s = 0.0;
  for (int t = 0; t < time.n_t; ++t) {
    const Eigen::MatrixXd& f = frames[t];
    for (int i = 0; i < grid.n_theta(); ++i)
      s += grid.theta_weight[i] * f.row(i).cwiseAbs2().sum();
  }
  return std::sqrt(s * grid.phi_weight * time.dt);
}

std::vector<FrequencyClass> frequency_classes(int m1, int m2, int j_max) {
  std::map<int, std::vector<std::pair<int, int>>> by_nu;
  for (int j1 = std::abs(m1); j1 <= j_max; ++j1)
    for (int j2 = std::abs(m2); j2 <= j_max; ++j2)
      by_nu[j1 * (j1 + 1) - j2 * (j2 + 1)].emplace_back(j1, j2);
  std::vector<FrequencyClass> out;
  out.reserve(by_nu.size());
  for (auto& [nu, pairs] : by_nu) out.push_back({nu, std::move(pairs)});
  return out;
}

namespace {

// Ptilde_J^m at the grid's theta nodes, rows J = |m| .. j_max.
Eigen::MatrixXd legendre_table(int m, int j_max, const std::vector<double>& theta) {
  Eigen::MatrixXd tab(j_max - std::abs(m) + 1, theta.size());
  std::vector<double> col;
  for (size_t i = 0; i < theta.size(); ++i) {
    normalized_legendre_column(m, j_max, std::cos(theta[i]), col);
    for (size_t r = 0; r < col.size(); ++r) tab(static_cast<int>(r), static_cast<int>(i)) = col[r];
  }
  return tab;
}

// Beat-frequency profiles of one block: A_nu(theta) with the phase reference
// shifted so that Pr(theta,t) = sum_nu A_nu e^{-i nu w_b t} at absolute time t.
std::map<int, Eigen::VectorXcd> block_profiles(const DensityMatrix& rho, int m1, int m2,
                                               const RotorBasis& basis,
                                               const std::vector<double>& theta) {
  std::map<int, Eigen::VectorXcd> prof;
  const Eigen::MatrixXcd* blk = rho.find_block(m1, m2);
  if (!blk) return prof;
  int j_max = rho.j_max();
  Eigen::MatrixXd p1 = legendre_table(m1, j_max, theta);
  Eigen::MatrixXd p2 = legendre_table(m2, j_max, theta);
  int a1 = std::abs(m1), a2 = std::abs(m2);
  for (int r = 0; r < blk->rows(); ++r) {
    for (int c = 0; c < blk->cols(); ++c) {
      complex<double> v = (*blk)(r, c);
      if (v == complex<double>(0.0, 0.0)) continue;
      int j1 = a1 + r, j2 = a2 + c;
      int nu = j1 * (j1 + 1) - j2 * (j2 + 1);
      // element at absolute t=0 given the state's tag
      complex<double> v0 = v * std::polar(1.0, nu * basis.omega_b() * rho.time_tag());
      auto it = prof.find(nu);
      if (it == prof.end())
        it = prof.emplace(nu, Eigen::VectorXcd::Zero(theta.size())).first;
      it->second += v0 * (p1.row(r).transpose().cwiseProduct(p2.row(c).transpose())).cast<complex<double>>();
    }
  }
  return prof;
}

} // namespace

BlockDensity block_probability(const DensityMatrix& rho, int m1, int m2,
                               const RotorBasis& basis, const AngularGrid& grid,
                               const TimeGrid& time) {
  if (std::abs(m1) > rho.j_max() || std::abs(m2) > rho.j_max())
    throw std::invalid_argument("block_probability: |m| > j_max");
  BlockDensity bd;
  bd.m1 = m1;
  bd.m2 = m2;
  bd.theta = grid.theta;
  bd.theta_weight = grid.theta_weight;
  bd.time = time;
  bd.values = Eigen::MatrixXcd::Zero(grid.n_theta(), time.n_t);
  auto prof = block_profiles(rho, m1, m2, basis, grid.theta);
  for (const auto& [nu, a] : prof) {
    for (int n = 0; n < time.n_t; ++n) {
      complex<double> ph = std::polar(1.0, -nu * basis.omega_b() * time.at(n));
      bd.values.col(n) += a * ph;
    }
  }
  return bd;
}

AngularMovie density_to_probability(const DensityMatrix& rho, const RotorBasis& basis,
                                    const AngularGrid& grid, const TimeGrid& time) {
  grid.require_supports(rho.j_max());
  AngularMovie movie;
  movie.grid = grid;
  movie.time = time;
  movie.frames.assign(time.n_t, Eigen::MatrixXd::Zero(grid.n_theta(), grid.n_phi()));

  // gather sector fields S_k(theta, t) = sum_{m1-m2=k} Pr_{m1,m2}
  std::map<int, Eigen::MatrixXcd> sectors;
  for (const auto& [m1, m2] : rho.block_keys()) {
    BlockDensity bd = block_probability(rho, m1, m2, basis, grid, time);
    int k = m1 - m2;
    auto it = sectors.find(k);
    if (it == sectors.end())
      sectors.emplace(k, std::move(bd.values));
    else
      it->second += bd.values;
  }

  // Pr(theta, phi, t) = (1/2pi) sum_k S_k(theta,t) e^{i k phi}
  int n_phi = grid.n_phi();
  for (const auto& [k, s] : sectors) {
    Eigen::VectorXd ck(n_phi), sk(n_phi);
    for (int j = 0; j < n_phi; ++j) {
      ck(j) = std::cos(k * grid.phi[j]);
      sk(j) = std::sin(k * grid.phi[j]);
    }
    for (int t = 0; t < time.n_t; ++t) {
      movie.frames[t].noalias() += (s.col(t).real() * ck.transpose() - s.col(t).imag() * sk.transpose()) / (2.0 * pi);
    }
  }
  return movie;
}

Eigen::MatrixXcd k_sector(const AngularMovie& movie, int k) {
  int n_theta = movie.grid.n_theta();
  int n_phi = movie.grid.n_phi();
  Eigen::VectorXcd ph(n_phi);
  for (int j = 0; j < n_phi; ++j) ph(j) = std::polar(1.0, -k * movie.grid.phi[j]);
  Eigen::MatrixXcd s(n_theta, movie.time.n_t);
  for (int t = 0; t < movie.time.n_t; ++t)
    s.col(t) = movie.frames[t].cast<complex<double>>() * ph * movie.grid.phi_weight;
  return s;
}

Eigen::MatrixXcd invert_block(const BlockDensity& block, int j_max, const RotorBasis& basis) {
  int n_t = block.time.n_t;
  int n_theta = static_cast<int>(block.theta.size());
  if (n_t < 1 || block.values.cols() != n_t || block.values.rows() != n_theta)
    throw std::invalid_argument("invert_block: inconsistent block shape");

  double t_rev = basis.revival_time();
  if (std::abs(block.time.span() - t_rev) > 1e-6 * t_rev) {
    std::ostringstream os;
    os << "invert_block: time grid must span one fundamental period " << t_rev
       << " s (got " << block.time.span() << " s)";
    throw AliasingError(os.str());
  }

  auto classes = frequency_classes(block.m1, block.m2, j_max);
  int mu_max = 0;
  for (const auto& c : classes) mu_max = std::max(mu_max, std::abs(c.nu) / 2);
  if (n_t < 2 * mu_max + 1) {
    std::ostringstream os;
    os << "invert_block: n_t=" << n_t << " aliases retained frequencies; need n_t >= "
       << 2 * mu_max + 1;
    throw AliasingError(os.str());
  }

  Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(j_max - std::abs(block.m1) + 1, n_theta);
  Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(j_max - std::abs(block.m2) + 1, n_theta);
  {
    std::vector<double> col;
    for (int i = 0; i < n_theta; ++i) {
      normalized_legendre_column(block.m1, j_max, std::cos(block.theta[i]), col);
      for (size_t r = 0; r < col.size(); ++r) p1(static_cast<int>(r), i) = col[r];
      normalized_legendre_column(block.m2, j_max, std::cos(block.theta[i]), col);
      for (size_t r = 0; r < col.size(); ++r) p2(static_cast<int>(r), i) = col[r];
    }
  }

  Eigen::VectorXd sqrt_w(n_theta);
  for (int i = 0; i < n_theta; ++i) sqrt_w(i) = std::sqrt(block.theta_weight[i]);

  Eigen::MatrixXcd result = Eigen::MatrixXcd::Zero(j_max - std::abs(block.m1) + 1,
                                                   j_max - std::abs(block.m2) + 1);

  for (const auto& cls : classes) {
    // DFT bin of this class (nu is even; mu = nu/2)
    int mu = cls.nu / 2;
    int bin = ((mu % n_t) + n_t) % n_t;
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n_theta);
    for (int n = 0; n < n_t; ++n) {
      complex<double> ph = std::polar(1.0 / n_t, 2.0 * pi * bin * n / n_t);
      amp += block.values.col(n) * ph;
    }

    int np = static_cast<int>(cls.pairs.size());
    Eigen::MatrixXd design(n_theta, np);
    for (int p = 0; p < np; ++p) {
      auto [j1, j2] = cls.pairs[p];
      design.col(p) = p1.row(j1 - std::abs(block.m1)).transpose().cwiseProduct(
                          p2.row(j2 - std::abs(block.m2)).transpose());
    }
    Eigen::MatrixXd wd = sqrt_w.asDiagonal() * design;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(wd, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    if (svd.singularValues().minCoeff() < 1e-10 * smax) {
      std::ostringstream os;
      os << "invert_block: degenerate basis in frequency class nu=" << cls.nu << " for pairs";
      for (auto [j1, j2] : cls.pairs) os << " (" << j1 << "," << j2 << ")";
      throw DegenerateBasisError(os.str());
    }
    Eigen::VectorXcd rhs = sqrt_w.asDiagonal() * amp;
    Eigen::VectorXcd coeff = svd.solve(rhs);

    // undo the t0 phase so elements are referenced at t = 0
    complex<double> back = std::polar(1.0, cls.nu * basis.omega_b() * block.time.t0);
    for (int p = 0; p < np; ++p) {
      auto [j1, j2] = cls.pairs[p];
      result(j1 - std::abs(block.m1), j2 - std::abs(block.m2)) = coeff(p) * back;
    }
  }
  return result;
}

} // namespace qtomo
