#include "qtomo/state_prep.hpp"

#include <cmath>
#include <complex>
#include <iostream>
#include <map>
#include <numbers>
#include <stdexcept>

#include "qtomo/constants.hpp"

namespace qtomo {

using std::numbers::pi;
namespace con = qtomo::constants;

double LaserPulse::intensity_w_m2(double t) const {
  double i0 = peak_intensity_w_cm2 * 1e4; // W/cm^2 -> W/m^2
  double arg = 4.0 * std::numbers::ln2 * t * t / (fwhm_s * fwhm_s);
  return i0 * std::exp(-arg);
}

double LaserPulse::coupling_rad_s(double t) const {
  return 2.0 * pi * dalpha_volume_m3 * intensity_w_m2(t) / (con::c_light * con::hbar);
}

double nuclear_spin_weight(int j, double g_even, double g_odd) {
  return (j % 2 == 0) ? g_even : g_odd;
}

DensityMatrix thermal_state(double temperature_k, int j_max, const RotorBasis& basis,
                            double g_even, double g_odd) {
  if (temperature_k < 0.0) throw std::invalid_argument("thermal_state: T must be >= 0");
  if (j_max > basis.j_max()) throw std::invalid_argument("thermal_state: j_max exceeds basis");

  std::vector<double> w(j_max + 1, 0.0);
  if (temperature_k == 0.0) {
    w[0] = 1.0;
  } else {
    double kt = con::k_boltzmann * temperature_k;
    double z = 0.0;
    for (int j = 0; j <= j_max; ++j) {
      double e = con::hbar * basis.angular_frequency(j);
      w[j] = nuclear_spin_weight(j, g_even, g_odd) * std::exp(-e / kt);
      z += (2.0 * j + 1.0) * w[j];
    }
    for (auto& v : w) v /= z;
  }

  DensityMatrix rho(j_max);
  for (int m = -j_max; m <= j_max; ++m) {
    Eigen::MatrixXcd& blk = rho.block(m, m);
    for (int j = std::abs(m); j <= j_max; ++j) blk(j - std::abs(m), j - std::abs(m)) = w[j];
  }
  return rho;
}

DensityMatrix free_evolve(const DensityMatrix& rho, double t, const RotorBasis& basis) {
  DensityMatrix out(rho.j_max());
  out.set_time_tag(rho.time_tag() + t);
  for (const auto& [m1, m2] : rho.block_keys()) {
    const Eigen::MatrixXcd& src = *rho.find_block(m1, m2);
    Eigen::MatrixXcd& dst = out.block(m1, m2);
    int a1 = std::abs(m1), a2 = std::abs(m2);
    for (int r = 0; r < src.rows(); ++r) {
      for (int c = 0; c < src.cols(); ++c) {
        int j1 = a1 + r, j2 = a2 + c;
        double dw = basis.angular_frequency(j1) - basis.angular_frequency(j2);
        dst(r, c) = src(r, c) * std::polar(1.0, -dw * t);
      }
    }
  }
  return out;
}

DensityMatrix kick_propagate(const DensityMatrix& rho, const LaserPulse& pulse, double dt,
                             const RotorBasis& basis) {
  if (dt <= 0.0) throw std::invalid_argument("kick_propagate: dt must be positive");
  if (dt > pulse.fwhm_s / 20.0)
    throw std::invalid_argument("kick_propagate: dt must resolve the envelope (>= 20 steps per FWHM)");
  if (pulse.fwhm_s > 0.1 * basis.revival_time())
    std::cerr << "[qtomo] warning: pulse duration " << pulse.fwhm_s
              << " s is not impulsive against the rotational period "
              << basis.revival_time() << " s\n";

  int j_max = rho.j_max();
  double w = pulse.window_fwhms * pulse.fwhm_s;
  int n_steps = std::max(1, static_cast<int>(std::ceil(2.0 * w / dt)));
  double h = 2.0 * w / n_steps;

  // eigendecomposition of the cos^2 coupling per |m|; reused for -m
  std::map<int, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eig;
  for (int m = 0; m <= j_max; ++m) eig.emplace(m, cos2_block(j_max, m));

  auto half_phases = [&](int m) {
    int a = std::abs(m);
    Eigen::VectorXcd f(j_max - a + 1);
    for (int j = a; j <= j_max; ++j)
      f(j - a) = std::polar(1.0, -basis.angular_frequency(j) * 0.5 * h);
    return f;
  };

  DensityMatrix cur = rho;
  for (int s = 0; s < n_steps; ++s) {
    double t_mid = -w + (s + 0.5) * h;
    double a_kick = pulse.coupling_rad_s(t_mid) * h;

    // U_m = F_half * exp(+i a_kick C_m) * F_half
    std::map<int, Eigen::MatrixXcd> u;
    for (const auto& [m1, m2] : cur.block_keys()) {
      for (int m : {m1, m2}) {
        if (u.count(m)) continue;
        const auto& es = eig.at(std::abs(m));
        Eigen::VectorXcd ph(es.eigenvalues().size());
        for (int i = 0; i < ph.size(); ++i)
          ph(i) = std::polar(1.0, a_kick * es.eigenvalues()(i));
        Eigen::MatrixXcd k =
            es.eigenvectors().cast<std::complex<double>>() * ph.asDiagonal() *
            es.eigenvectors().transpose().cast<std::complex<double>>();
        Eigen::VectorXcd f = half_phases(m);
        u[m] = f.asDiagonal() * k * f.asDiagonal();
      }
    }

    DensityMatrix next(j_max);
    next.set_time_tag(cur.time_tag());
    for (const auto& [m1, m2] : cur.block_keys()) {
      next.block(m1, m2) = u.at(m1) * (*cur.find_block(m1, m2)) * u.at(m2).adjoint();
    }
    cur = std::move(next);
  }

  // reference phases back to the pulse center
  DensityMatrix out = free_evolve(cur, -2.0 * w, basis);
  out.set_time_tag(rho.time_tag());
  return out;
}

double expectation_cos2(const DensityMatrix& rho) {
  double v = 0.0;
  for (const auto& [m1, m2] : rho.block_keys()) {
    if (m1 != m2) continue;
    Eigen::MatrixXd c = cos2_block(rho.j_max(), m1);
    v += (c.cast<std::complex<double>>() * (*rho.find_block(m1, m2))).trace().real();
  }
  return v;
}

} // namespace qtomo
