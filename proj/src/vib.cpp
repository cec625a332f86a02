#include "qtomo/vib.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "qtomo/constants.hpp"
#include "qtomo/errors.hpp"

namespace qtomo {

using std::complex;
using std::numbers::pi;

VibBasis::VibBasis(std::vector<int> r_in, std::vector<int> n_max_in)
    : r(std::move(r_in)), n_max(std::move(n_max_in)) {
  if (r.empty() || r.size() != n_max.size())
    throw std::invalid_argument("VibBasis: r and n_max must be non-empty and equal length");
  for (int v : r)
    if (v < 1) throw std::invalid_argument("VibBasis: frequency ratios must be >= 1");
  for (int v : n_max)
    if (v < 0) throw std::invalid_argument("VibBasis: n_max must be >= 0");
  int g = 0;
  for (int v : r) g = std::gcd(g, v);
  if (g != 1)
    throw std::invalid_argument("VibBasis: frequency ratios must be gcd-reduced (gcd=" +
                                std::to_string(g) + ")");
}

int VibBasis::dim() const {
  int d = 1;
  for (int v : n_max) d *= v + 1;
  return d;
}

int VibBasis::flat(const std::vector<int>& n) const {
  int idx = 0;
  for (size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || n[i] > n_max[i]) throw std::invalid_argument("VibBasis::flat: out of range");
    idx = idx * (n_max[i] + 1) + n[i];
  }
  return idx;
}

std::vector<int> VibBasis::multi(int flat_index) const {
  std::vector<int> n(n_modes());
  for (int i = n_modes() - 1; i >= 0; --i) {
    n[i] = flat_index % (n_max[i] + 1);
    flat_index /= n_max[i] + 1;
  }
  return n;
}

int VibBasis::k_of(const std::vector<int>& delta) const {
  int k = 0;
  for (size_t i = 0; i < delta.size(); ++i) k += delta[i] * r[i];
  return k;
}

int VibBasis::k_range() const {
  int k = 0;
  for (size_t i = 0; i < r.size(); ++i) k += n_max[i] * r[i];
  return k;
}

VibGrid VibGrid::uniform(double x_max, int n) {
  if (n < 2 || x_max <= 0) throw std::invalid_argument("VibGrid: invalid parameters");
  VibGrid g;
  g.x.resize(n);
  g.dx = 2.0 * x_max / (n - 1);
  for (int i = 0; i < n; ++i) g.x[i] = -x_max + i * g.dx;
  return g;
}

long VibMovie::joint_size() const {
  long s = 1;
  for (const auto& g : grids) s *= static_cast<long>(g.x.size());
  return s;
}

std::vector<double> ho_eigenfunction(int n, const std::vector<double>& x_nodes) {
  if (n < 0) throw std::invalid_argument("ho_eigenfunction: n must be >= 0");
  std::vector<double> out(x_nodes.size());
  const double norm0 = std::pow(pi, -0.25);
  for (size_t i = 0; i < x_nodes.size(); ++i) {
    double x = x_nodes[i];
    double p0 = norm0 * std::exp(-0.5 * x * x);
    if (n == 0) {
      out[i] = p0;
      continue;
    }
    double p1 = std::sqrt(2.0) * x * p0;
    for (int k = 2; k <= n; ++k) {
      double p2 = std::sqrt(2.0 / k) * x * p1 - std::sqrt((k - 1.0) / k) * p0;
      p0 = p1;
      p1 = p2;
    }
    out[i] = p1;
  }
  return out;
}

namespace {

double ho_value(int n, double x) {
  std::vector<double> v = ho_eigenfunction(n, {x});
  return v[0];
}

// phi_n'(x) = sqrt(2n) phi_{n-1}(x) - x phi_n(x)
double ho_derivative(int n, double x) {
  double lower = (n > 0) ? ho_value(n - 1, x) : 0.0;
  return std::sqrt(2.0 * n) * lower - x * ho_value(n, x);
}

// Irregular solution of u'' = (x^2 - 2E) u at E = n + 1/2, normalized so that
// the Wronskian with phi_n equals 2. Integrated outward from x = 0 with RK4;
// the solution grows like exp(x^2/2), so the integrator renormalizes every 50
// steps and carries the accumulated log scale.
struct IrregularSolution {
  std::vector<double> value;      // scaled value at nodes
  std::vector<double> derivative; // scaled derivative at nodes
  std::vector<double> log_scale;  // actual = scaled * exp(log_scale)
};

IrregularSolution irregular_solution(int n, const std::vector<double>& x_nodes) {
  double e = n + 0.5;
  auto rhs = [e](double x, double u, double up, double& du, double& dup) {
    du = up;
    dup = (x * x - 2.0 * e) * u;
  };

  size_t n_nodes = x_nodes.size();
  IrregularSolution sol;
  sol.value.assign(n_nodes, 0.0);
  sol.derivative.assign(n_nodes, 0.0);
  sol.log_scale.assign(n_nodes, 0.0);

  double u0, up0;
  if (n % 2 == 0) {
    u0 = 0.0;
    up0 = 2.0 / ho_value(n, 0.0);
  } else {
    u0 = -2.0 / ho_derivative(n, 0.0);
    up0 = 0.0;
  }

  // integrate from 0 toward positive (dir=+1) and negative (dir=-1) nodes
  for (int dir : {+1, -1}) {
    double x = 0.0, u = u0, up = up0, lg = 0.0;
    int steps_since_rescale = 0;
    // nodes on this side, ordered by |x|
    std::vector<size_t> order;
    for (size_t i = 0; i < n_nodes; ++i)
      if ((dir > 0 && x_nodes[i] >= 0.0) || (dir < 0 && x_nodes[i] < 0.0)) order.push_back(i);
    if (dir > 0)
      std::sort(order.begin(), order.end(),
                [&](size_t a, size_t b) { return x_nodes[a] < x_nodes[b]; });
    else
      std::sort(order.begin(), order.end(),
                [&](size_t a, size_t b) { return x_nodes[a] > x_nodes[b]; });

    const double h_max = 5e-4;
    for (size_t idx : order) {
      double target = x_nodes[idx];
      double remaining = std::abs(target - x);
      int n_sub = std::max(1, static_cast<int>(std::ceil(remaining / h_max)));
      double h = (target - x) / n_sub;
      for (int s = 0; s < n_sub; ++s) {
        double k1u, k1p, k2u, k2p, k3u, k3p, k4u, k4p;
        rhs(x, u, up, k1u, k1p);
        rhs(x + 0.5 * h, u + 0.5 * h * k1u, up + 0.5 * h * k1p, k2u, k2p);
        rhs(x + 0.5 * h, u + 0.5 * h * k2u, up + 0.5 * h * k2p, k3u, k3p);
        rhs(x + h, u + h * k3u, up + h * k3p, k4u, k4p);
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        up += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        x += h;
        if (++steps_since_rescale >= 50) {
          steps_since_rescale = 0;
          double mag = std::max(std::abs(u), std::abs(up));
          if (mag > 1e50) {
            u /= mag;
            up /= mag;
            lg += std::log(mag);
          }
        }
      }
      sol.value[idx] = u;
      sol.derivative[idx] = up;
      sol.log_scale[idx] = lg;
    }
  }
  return sol;
}

} // namespace

std::vector<double> sampling_function(int m, int n, const std::vector<double>& x_nodes) {
  if (m < 0 || n < 0) throw std::invalid_argument("sampling_function: indices must be >= 0");
  if (x_nodes.size() < 2) throw std::invalid_argument("sampling_function: empty grid");
  double turning = std::sqrt(2.0 * std::max(m, n) + 1.0);
  double x_hi = *std::max_element(x_nodes.begin(), x_nodes.end());
  double x_lo = *std::min_element(x_nodes.begin(), x_nodes.end());
  if (x_hi < turning + 5.0 || -x_lo < turning + 5.0) {
    std::ostringstream os;
    os << "sampling_function: grid must extend past the turning point + 5 (need |x| >= "
       << turning + 5.0 << ")";
    throw std::domain_error(os.str());
  }

  IrregularSolution psi = irregular_solution(n, x_nodes);
  std::vector<double> f(x_nodes.size());
  for (size_t i = 0; i < x_nodes.size(); ++i) {
    double x = x_nodes[i];
    double pm = ho_value(m, x);
    double pmd = ho_derivative(m, x);
    // f = (phi_m' psi + phi_m psi'), psi carried as scaled * exp(log_scale)
    double t = pmd * psi.value[i] + pm * psi.derivative[i];
    if (t == 0.0) {
      f[i] = 0.0;
    } else {
      double lg = std::log(std::abs(t)) + psi.log_scale[i];
      f[i] = (t > 0 ? 1.0 : -1.0) * std::exp(lg);
    }
  }
  return f;
}

namespace {

// per-mode tables phi_n(x) for n = 0..n_max
std::vector<Eigen::MatrixXd> eigenfunction_tables(const VibBasis& basis,
                                                  const std::vector<VibGrid>& grids) {
  std::vector<Eigen::MatrixXd> tabs;
  for (int i = 0; i < basis.n_modes(); ++i) {
    Eigen::MatrixXd t(basis.n_max[i] + 1, grids[i].x.size());
    for (int n = 0; n <= basis.n_max[i]; ++n) {
      std::vector<double> v = ho_eigenfunction(n, grids[i].x);
      for (size_t j = 0; j < v.size(); ++j) t(n, static_cast<int>(j)) = v[j];
    }
    tabs.push_back(std::move(t));
  }
  return tabs;
}

// joint profile Prod_i phi_{a_i}(x_i) phi_{b_i}(x_i) flattened row-major
Eigen::VectorXd joint_profile(const std::vector<Eigen::MatrixXd>& tabs,
                              const std::vector<int>& a, const std::vector<int>& b) {
  Eigen::VectorXd acc = Eigen::VectorXd::Ones(1);
  for (size_t i = 0; i < a.size(); ++i) {
    Eigen::VectorXd mode =
        tabs[i].row(a[i]).cwiseProduct(tabs[i].row(b[i])).transpose();
    Eigen::VectorXd next(acc.size() * mode.size());
    for (int p = 0; p < acc.size(); ++p)
      next.segment(p * mode.size(), mode.size()) = acc(p) * mode;
    acc = std::move(next);
  }
  return acc;
}

// temporal-frequency profiles C_k(x) = sum over elements with k_of(w - v) = k
std::map<int, Eigen::VectorXcd> sector_profiles(const VibDensityMatrix& rho,
                                                const std::vector<VibGrid>& grids) {
  const VibBasis& basis = rho.basis;
  auto tabs = eigenfunction_tables(basis, grids);
  std::map<int, Eigen::VectorXcd> prof;
  int d = basis.dim();
  for (int vi = 0; vi < d; ++vi) {
    std::vector<int> v = basis.multi(vi);
    for (int wi = 0; wi < d; ++wi) {
      complex<double> val = rho.mat(vi, wi);
      if (val == complex<double>(0.0, 0.0)) continue;
      std::vector<int> w = basis.multi(wi);
      std::vector<int> delta(v.size());
      for (size_t i = 0; i < v.size(); ++i) delta[i] = w[i] - v[i];
      int k = basis.k_of(delta);
      Eigen::VectorXd b = joint_profile(tabs, v, w);
      auto it = prof.find(k);
      if (it == prof.end())
        it = prof.emplace(k, Eigen::VectorXcd::Zero(b.size())).first;
      it->second += val * b.cast<complex<double>>();
    }
  }
  return prof;
}

VibMovie frames_from_profiles(const std::map<int, Eigen::VectorXcd>& prof,
                              const std::vector<VibGrid>& grids, int n_t, long joint) {
  VibMovie movie;
  movie.grids = grids;
  movie.n_t = n_t;
  movie.frames.assign(n_t, Eigen::VectorXd::Zero(joint));
  for (const auto& [k, c] : prof) {
    for (int j = 0; j < n_t; ++j) {
      double ang = 2.0 * pi * k * j / n_t;
      movie.frames[j] += c.real() * std::cos(ang) - c.imag() * std::sin(ang);
    }
  }
  return movie;
}

} // namespace

VibMovie vib_density_to_probability(const VibDensityMatrix& rho,
                                    const std::vector<VibGrid>& grids, int n_t) {
  if (static_cast<int>(grids.size()) != rho.basis.n_modes())
    throw std::invalid_argument("vib_density_to_probability: grid/mode count mismatch");
  for (int i = 0; i < rho.basis.n_modes(); ++i) {
    double turning = std::sqrt(2.0 * rho.basis.n_max[i] + 1.0);
    if (grids[i].x.back() < turning)
      throw std::invalid_argument("vib_density_to_probability: grid misses turning points");
  }
  if (n_t < 2 * rho.basis.k_range() + 1)
    throw AliasingError("vib_density_to_probability: n_t must exceed twice the k range");
  long joint = 1;
  for (const auto& g : grids) joint *= static_cast<long>(g.x.size());
  auto prof = sector_profiles(rho, grids);
  return frames_from_profiles(prof, grids, n_t, joint);
}

Eigen::VectorXcd vib_k_sector(const VibMovie& movie, int k) {
  if (movie.n_t < 1 || movie.frames.empty())
    throw AliasingError("vib_k_sector: empty or non-uniform time grid");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(movie.frames[0].size());
  for (int j = 0; j < movie.n_t; ++j) {
    complex<double> ph = std::polar(1.0 / movie.n_t, -2.0 * pi * k * j / movie.n_t);
    out += movie.frames[j].cast<complex<double>>() * ph;
  }
  return out;
}

std::vector<std::vector<int>> vib_sector_deltas(const VibBasis& basis, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> delta(basis.n_modes(), 0);
  std::function<void(int)> rec = [&](int mode) {
    if (mode == basis.n_modes()) {
      if (basis.k_of(delta) == k) out.push_back(delta);
      return;
    }
    for (int d = -basis.n_max[mode]; d <= basis.n_max[mode]; ++d) {
      delta[mode] = d;
      rec(mode + 1);
    }
    delta[mode] = 0;
  };
  rec(0);
  return out;
}

namespace {

// valid lower multi-indices v for a given delta
std::vector<std::vector<int>> valid_lower(const VibBasis& basis, const std::vector<int>& delta) {
  std::vector<std::vector<int>> out;
  std::vector<int> v(basis.n_modes(), 0);
  std::function<void(int)> rec = [&](int mode) {
    if (mode == basis.n_modes()) {
      out.push_back(v);
      return;
    }
    int lo = std::max(0, -delta[mode]);
    int hi = std::min(basis.n_max[mode], basis.n_max[mode] - delta[mode]);
    for (int n = lo; n <= hi; ++n) {
      v[mode] = n;
      rec(mode + 1);
    }
  };
  rec(0);
  return out;
}

bool delta_positive(const std::vector<int>& d) {
  for (int v : d) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;
}

std::string delta_str(const std::vector<int>& d) {
  std::string s = "(";
  for (size_t i = 0; i < d.size(); ++i) s += std::to_string(d[i]) + (i + 1 < d.size() ? "," : "");
  return s + ")";
}

} // namespace

Eigen::MatrixXcd vib_invert_block(const Eigen::VectorXcd& sector, int k, const VibBasis& basis,
                                  const std::vector<VibGrid>& grids) {
  auto deltas = vib_sector_deltas(basis, k);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
  if (deltas.empty()) return out;

  double wprod = 1.0;
  for (const auto& g : grids) wprod *= g.dx;

  if (deltas.size() == 1 && k != 0) {
    // unique class: the sampling-function integrals give each element directly
    const std::vector<int>& delta = deltas[0];
    for (const auto& v : valid_lower(basis, delta)) {
      complex<double> acc;
      Eigen::VectorXd f_joint = Eigen::VectorXd::Ones(1);
      for (int i = 0; i < basis.n_modes(); ++i) {
        std::vector<double> f = sampling_function(v[i] + delta[i], v[i], grids[i].x);
        Eigen::VectorXd fv = Eigen::Map<Eigen::VectorXd>(f.data(), f.size());
        Eigen::VectorXd next(f_joint.size() * fv.size());
        for (int p = 0; p < f_joint.size(); ++p)
          next.segment(p * fv.size(), fv.size()) = f_joint(p) * fv;
        f_joint = std::move(next);
      }
      acc = (f_joint.cast<complex<double>>().cwiseProduct(sector)).sum() * wprod;
      std::vector<int> w(v.size());
      for (size_t i = 0; i < v.size(); ++i) w[i] = v[i] + delta[i];
      out(basis.flat(v), basis.flat(w)) = acc;
    }
    return out;
  }

  // colliding classes: least squares over the x profiles
  auto tabs = eigenfunction_tables(basis, grids);
  struct Unknown {
    std::vector<int> v, w;
    bool herm_pair; // k == 0 real Re-combination with factor-2 column
  };
  std::vector<Unknown> unknowns;
  std::vector<Eigen::VectorXd> columns;
  for (const auto& delta : deltas) {
    bool zero_delta = std::all_of(delta.begin(), delta.end(), [](int d) { return d == 0; });
    if (k == 0 && !zero_delta && !delta_positive(delta)) continue; // canonical halves only
    for (const auto& v : valid_lower(basis, delta)) {
      std::vector<int> w(v.size());
      for (size_t i = 0; i < v.size(); ++i) w[i] = v[i] + delta[i];
      Eigen::VectorXd col = joint_profile(tabs, v, w);
      bool herm = (k == 0 && !zero_delta);
      if (herm) col *= 2.0;
      unknowns.push_back({v, w, herm});
      columns.push_back(std::move(col));
    }
  }
  if (unknowns.empty()) return out;

  Eigen::MatrixXd design(sector.size(), unknowns.size());
  for (size_t c = 0; c < columns.size(); ++c) design.col(static_cast<int>(c)) = columns[c];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  if (smax <= 0.0 || svd.singularValues().minCoeff() < 1e-10 * smax) {
    std::ostringstream os;
    os << "vib_invert_block: inseparable degeneracy in sector k=" << k << " among Delta sets";
    for (const auto& d : deltas) os << " " << delta_str(d);
    throw DegenerateBasisError(os.str());
  }
  Eigen::VectorXd sol_re = svd.solve(sector.real());
  Eigen::VectorXd sol_im = svd.solve(sector.imag());

  for (size_t u = 0; u < unknowns.size(); ++u) {
    complex<double> val(sol_re(static_cast<int>(u)), sol_im(static_cast<int>(u)));
    int vi = basis.flat(unknowns[u].v), wi = basis.flat(unknowns[u].w);
    if (unknowns[u].herm_pair) {
      // only Re of zero-frequency coherences is observable
      double re = val.real();
      out(vi, wi) = re;
      out(wi, vi) = re;
    } else {
      out(vi, wi) = val;
    }
  }
  return out;
}

std::pair<VibDensityMatrix, ReconstructionTrace> vib_reconstruct(
    const VibMovie& movie, const VibBasis& basis, const VibReconstructOptions& opt) {
  if (movie.n_t < 2 * basis.k_range() + 1)
    throw AliasingError("vib_reconstruct: time grid aliases the retained k range");

  // measured sectors
  std::map<int, Eigen::VectorXcd> measured;
  for (int k = -basis.k_range(); k <= basis.k_range(); ++k)
    measured.emplace(k, vib_k_sector(movie, k));

  auto project = [&](const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    double tr = p.trace().real();
    if (tr < 1e-300) throw DegenerateStateError("vib_reconstruct: state annihilated");
    return Eigen::MatrixXcd(p / tr);
  };

  // initial guess: diagonal part of the static sector, clipped and normalized
  VibDensityMatrix rho(basis);
  {
    Eigen::MatrixXcd m0 = vib_invert_block(measured.at(0), 0, basis, movie.grids);
    Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
    diag.diagonal() = m0.diagonal();
    rho.mat = project(diag);
  }

  ReconstructionTrace trace;
  constexpr double eps_div = 1e-12;

  for (int it = 0; it < opt.n_iter; ++it) {
    auto tic = std::chrono::steady_clock::now();

    auto model = sector_profiles(rho, movie.grids);
    Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
    for (int k = -basis.k_range(); k <= basis.k_range(); ++k) {
      Eigen::VectorXcd scaled;
      auto itm = model.find(k);
      if (itm != model.end()) {
        scaled = itm->second;
        const Eigen::VectorXcd& meas = measured.at(k);
        for (int i = 0; i < scaled.size(); ++i)
          if (std::abs(scaled(i)) > eps_div) scaled(i) = meas(i); // model * meas/model
      } else {
        scaled = measured.at(k);
      }
      raw += vib_invert_block(scaled, k, basis, movie.grids);
    }

    Eigen::MatrixXcd herm = 0.5 * (raw + raw.adjoint());
    trace.herm_violation.push_back((raw - herm).norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    trace.psd_floor.push_back(std::min(0.0, es.eigenvalues().minCoeff()));
    trace.trace_deviation.push_back(std::abs(herm.trace().real() - 1.0));
    trace.forbidden_mass.push_back(0.0);

    Eigen::MatrixXcd next = project(raw);
    double change = (next - rho.mat).norm();
    rho.mat = next;

    VibMovie model_movie = vib_density_to_probability(rho, movie.grids, movie.n_t);
    double num = 0.0, den = 0.0;
    for (int t = 0; t < movie.n_t; ++t) {
      num += (model_movie.frames[t] - movie.frames[t]).squaredNorm();
      den += movie.frames[t].squaredNorm();
    }
    trace.eps_pr.push_back(std::sqrt(num / std::max(den, 1e-300)));
    if (opt.ground_truth)
      trace.eps_rho.push_back((rho.mat - *opt.ground_truth).norm() / opt.ground_truth->norm());
    trace.iterate_change.push_back(change);
    trace.wall_time_s.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count());
    trace.iterations = it + 1;
    if (change < opt.tol) {
      trace.converged = true;
      break;
    }
  }
  return {rho, trace};
}

VibResolution vib_resolution_requirements(int n_order, const std::vector<int>& r) {
  if (n_order < 1) throw std::invalid_argument("vib_resolution_requirements: order must be >= 1");
  int rsum = 0;
  for (int v : r) rsum += v;
  if (rsum < 1) throw std::invalid_argument("vib_resolution_requirements: invalid ratios");
  VibResolution res;
  res.delta_x = pi / (2.0 * std::sqrt(2.0 * n_order + 1.0));
  res.delta_t_over_t = 1.0 / (2.0 * (n_order + 1.0) * rsum);
  return res;
}

std::pair<double, double> vib_resolution_si(int n_order, const std::vector<int>& r,
                                            double mu_kg, double omega0_rad_s) {
  VibResolution res = vib_resolution_requirements(n_order, r);
  double ell = std::sqrt(constants::hbar / (mu_kg * omega0_rad_s));
  double period = 2.0 * pi / omega0_rad_s;
  return {res.delta_x * ell, res.delta_t_over_t * period};
}

} // namespace qtomo
