#include "qtomo/reconstruct.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "qtomo/errors.hpp"

namespace qtomo {

using std::complex;

void ConstraintSet::set_targets_from(const DensityMatrix& reference) {
  trace_targets.clear();
  int j_max = reference.j_max();
  for (int m = -j_max; m <= j_max; ++m) {
    const Eigen::MatrixXcd* blk = reference.find_block(m, m);
    double even = 0.0, odd = 0.0;
    if (blk) {
      for (int j = std::abs(m); j <= j_max; ++j) {
        double v = (*blk)(j - std::abs(m), j - std::abs(m)).real();
        (j % 2 == 0 ? even : odd) += v;
      }
    }
    trace_targets[{m, 0}] = even;
    trace_targets[{m, 1}] = odd;
  }
}

DensityMatrix initial_guess(double temperature_k, int j_max, const RotorBasis& basis,
                            double g_even, double g_odd) {
  return thermal_state(temperature_k, j_max, basis, g_even, g_odd);
}

std::vector<BlockDensity> project_probability(const DensityMatrix& rho_iter,
                                              const AngularMovie& measured,
                                              const RotorBasis& basis) {
  constexpr double eps_div = 1e-12;

  // model blocks and their sector aggregates
  std::vector<BlockDensity> blocks;
  for (const auto& [m1, m2] : rho_iter.block_keys())
    blocks.push_back(block_probability(rho_iter, m1, m2, basis, measured.grid, measured.time));

  std::map<int, Eigen::MatrixXcd> model_sector;
  for (const auto& b : blocks) {
    int k = b.m1 - b.m2;
    auto it = model_sector.find(k);
    if (it == model_sector.end())
      model_sector.emplace(k, b.values);
    else
      it->second += b.values;
  }

  std::map<int, Eigen::MatrixXcd> ratio;
  for (const auto& [k, model] : model_sector) {
    Eigen::MatrixXcd meas = k_sector(measured, k);
    Eigen::MatrixXcd r(model.rows(), model.cols());
    for (int i = 0; i < model.rows(); ++i)
      for (int j = 0; j < model.cols(); ++j)
        r(i, j) = (std::abs(model(i, j)) > eps_div) ? meas(i, j) / model(i, j)
                                                    : complex<double>(1.0, 0.0);
    ratio.emplace(k, std::move(r));
  }

  for (auto& b : blocks) b.values = b.values.cwiseProduct(ratio.at(b.m1 - b.m2));
  return blocks;
}

namespace {

void hermitize_in_place(DensityMatrix& rho) {
  auto keys = rho.block_keys();
  std::set<std::pair<int, int>> done;
  for (const auto& [m1, m2] : keys) {
    if (done.count({m1, m2})) continue;
    Eigen::MatrixXcd a = *rho.find_block(m1, m2);
    const Eigen::MatrixXcd* pb = rho.find_block(m2, m1);
    Eigen::MatrixXcd b = pb ? *pb : Eigen::MatrixXcd::Zero(a.cols(), a.rows());
    Eigen::MatrixXcd sym = 0.5 * (a + b.adjoint());
    rho.block(m1, m2) = sym;
    rho.block(m2, m1) = sym.adjoint();
    done.insert({m1, m2});
    done.insert({m2, m1});
  }
}

} // namespace

DensityMatrix project_density(const DensityMatrix& rho_in, const ConstraintSet& c) {
  DensityMatrix rho = rho_in;
  int j_max = rho.j_max();

  if (c.hermitize) hermitize_in_place(rho);

  if (c.zero_forbidden_blocks) {
    for (const auto& [m1, m2] : rho.block_keys())
      if (m1 != m2) rho.block(m1, m2).setZero();
    rho.prune(0.0);
  }
  if (c.zero_odd_delta_j) {
    for (const auto& [m1, m2] : rho.block_keys()) {
      Eigen::MatrixXcd& blk = rho.block(m1, m2);
      int a1 = std::abs(m1), a2 = std::abs(m2);
      for (int r = 0; r < blk.rows(); ++r)
        for (int col = 0; col < blk.cols(); ++col)
          if (((a1 + r) - (a2 + col)) % 2 != 0) blk(r, col) = 0.0;
    }
  }

  if (c.psd) {
    if (c.zero_forbidden_blocks) {
      // block-diagonal in m: clip per block so forbidden zeros stay exact
      for (const auto& [m1, m2] : rho.block_keys()) {
        if (m1 != m2) continue;
        Eigen::MatrixXcd& blk = rho.block(m1, m2);
        Eigen::MatrixXcd sym = 0.5 * (blk + blk.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        blk = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
      }
    } else {
      Eigen::MatrixXcd full = rho.to_composite();
      full = 0.5 * (full + full.adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(full);
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      full = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
      double tag = rho.time_tag();
      rho = DensityMatrix::from_composite(j_max, full);
      rho.set_time_tag(tag);
    }
    if (rho.trace() < 1e-300)
      throw DegenerateStateError("project_density: state annihilated by PSD clipping");
  }

  if (c.pin_partial_traces && !c.trace_targets.empty()) {
    for (int m = -j_max; m <= j_max; ++m) {
      Eigen::MatrixXcd& blk = rho.block(m, m);
      int a = std::abs(m);
      if (c.pin_parity) {
        // uniform scaling of each parity sub-block (congruence, keeps PSD)
        double cur[2] = {0.0, 0.0};
        for (int j = a; j <= j_max; ++j) cur[j % 2] += blk(j - a, j - a).real();
        double s[2];
        for (int p = 0; p < 2; ++p) {
          double target = c.trace_targets.count({m, p}) ? c.trace_targets.at({m, p}) : 0.0;
          if (cur[p] > 1e-300) {
            s[p] = target / cur[p];
          } else {
            s[p] = 0.0;
            int cnt = 0;
            for (int j = a; j <= j_max; ++j)
              if (j % 2 == p) ++cnt;
            if (target > 0.0 && cnt > 0) {
              // reseed an emptied parity class uniformly on its diagonal
              for (int j = a; j <= j_max; ++j)
                if (j % 2 == p) blk(j - a, j - a) = target / cnt;
            }
          }
        }
        // apply scalings: same-parity entries scale by s_p, cross terms by sqrt
        for (int j1 = a; j1 <= j_max; ++j1)
          for (int j2 = a; j2 <= j_max; ++j2) {
            int p1 = j1 % 2, p2 = j2 % 2;
            if (cur[p1] <= 1e-300 || cur[p2] <= 1e-300) continue;
            double f = (p1 == p2) ? s[p1] : std::sqrt(s[p1] * s[p2]);
            blk(j1 - a, j2 - a) *= f;
          }
      } else {
        double cur = 0.0;
        for (int j = a; j <= j_max; ++j) cur += blk(j - a, j - a).real();
        double target = 0.0;
        for (int p = 0; p < 2; ++p)
          if (c.trace_targets.count({m, p})) target += c.trace_targets.at({m, p});
        if (cur > 1e-300) {
          blk *= target / cur;
        } else if (target > 0.0) {
          for (int j = a; j <= j_max; ++j) blk(j - a, j - a) = target / (j_max - a + 1);
        }
      }
    }
  }

  if (c.mirror_m_blocks) {
    for (const auto& [m1, m2] : rho.block_keys()) {
      if (m1 < 0 || (m1 == 0 && m2 < 0)) continue;
      if (m1 == 0 && m2 == 0) continue;
      const Eigen::MatrixXcd a = *rho.find_block(m1, m2);
      const Eigen::MatrixXcd* pb = rho.find_block(-m1, -m2);
      Eigen::MatrixXcd b = pb ? *pb : Eigen::MatrixXcd::Zero(a.rows(), a.cols());
      Eigen::MatrixXcd avg = 0.5 * (a + b);
      rho.block(m1, m2) = avg;
      rho.block(-m1, -m2) = avg;
    }
  }

  if (c.unit_trace) {
    double t = rho.trace();
    if (t < 1e-300) throw DegenerateStateError("project_density: zero trace");
    rho.scale(1.0 / t);
  }
  return rho;
}

double eps_rho_metric(const DensityMatrix& rho_hat, const DensityMatrix& rho_true) {
  double denom = rho_true.frobenius_norm();
  if (denom == 0.0) throw std::invalid_argument("eps_rho_metric: zero reference");
  return DensityMatrix::distance(rho_hat, rho_true) / denom;
}

double eps_pr_metric(const AngularMovie& movie_hat, const AngularMovie& movie_true) {
  if (movie_hat.time.n_t != movie_true.time.n_t ||
      movie_hat.grid.n_theta() != movie_true.grid.n_theta() ||
      movie_hat.grid.n_phi() != movie_true.grid.n_phi())
    throw std::invalid_argument("eps_pr_metric: shape mismatch");
  double num = 0.0, den = 0.0;
  for (int t = 0; t < movie_true.time.n_t; ++t) {
    for (int i = 0; i < movie_true.grid.n_theta(); ++i) {
      double w = movie_true.grid.theta_weight[i];
      num += w * (movie_hat.frames[t].row(i) - movie_true.frames[t].row(i)).cwiseAbs2().sum();
      den += w * movie_true.frames[t].row(i).cwiseAbs2().sum();
    }
  }
  if (den == 0.0) throw std::invalid_argument("eps_pr_metric: zero reference");
  return std::sqrt(num / den);
}

ErrorMetrics error_metrics(const DensityMatrix& rho_hat, const DensityMatrix& rho_true,
                           const AngularMovie& movie_hat, const AngularMovie& movie_true) {
  return {eps_rho_metric(rho_hat, rho_true), eps_pr_metric(movie_hat, movie_true)};
}

namespace {

struct Violations {
  double herm, psd_floor, trace_dev, forbidden;
};

Violations measure_violations(const DensityMatrix& rho) {
  Violations v{};
  Eigen::MatrixXcd full = rho.to_composite();
  v.herm = (full - full.adjoint()).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (full + full.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  v.psd_floor = std::min(0.0, es.eigenvalues().minCoeff());
  v.trace_dev = std::abs(rho.trace() - 1.0);
  double fb = 0.0;
  for (const auto& [m1, m2] : rho.block_keys())
    if (m1 != m2) fb += rho.find_block(m1, m2)->squaredNorm();
  v.forbidden = std::sqrt(fb);
  return v;
}

} // namespace

std::pair<DensityMatrix, ReconstructionTrace> reconstruct(const AngularMovie& measured,
                                                          const RotorBasis& basis,
                                                          const ReconstructOptions& opt) {
  measured.grid.require_supports(opt.j_max);
  ResolutionRequirement rr = resolution_requirements(opt.j_max, basis);
  if (measured.time.dt > rr.delta_t_max * (1.0 + 1e-9))
    throw std::invalid_argument("reconstruct: movie dt violates the temporal resolution bound");

  ConstraintSet constraints = opt.constraints;
  DensityMatrix guess = initial_guess(opt.temperature_k, opt.j_max, basis, opt.g_even, opt.g_odd);
  if (constraints.pin_partial_traces && constraints.trace_targets.empty())
    constraints.set_targets_from(guess);

  ReconstructionTrace trace;
  DensityMatrix rho = guess;

  for (int it = 0; it < opt.n_iter; ++it) {
    auto tic = std::chrono::steady_clock::now();

    std::vector<BlockDensity> scaled = project_probability(rho, measured, basis);

    DensityMatrix raw(opt.j_max);
    for (const auto& b : scaled)
      raw.block(b.m1, b.m2) = invert_block(b, opt.j_max, basis);

    Violations v = measure_violations(raw);
    DensityMatrix next = project_density(raw, constraints);

    double change = DensityMatrix::distance(next, rho);
    rho = std::move(next);

    AngularMovie model = density_to_probability(rho, basis, measured.grid, measured.time);
    trace.eps_pr.push_back(eps_pr_metric(model, measured));
    if (opt.ground_truth) trace.eps_rho.push_back(eps_rho_metric(rho, *opt.ground_truth));
    trace.iterate_change.push_back(change);
    trace.herm_violation.push_back(v.herm);
    trace.psd_floor.push_back(v.psd_floor);
    trace.trace_deviation.push_back(v.trace_dev);
    trace.forbidden_mass.push_back(v.forbidden);
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

} // namespace qtomo
