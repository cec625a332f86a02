#include "qtomo/density_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace qtomo {

Eigen::MatrixXcd& DensityMatrix::block(int m1, int m2) {
  if (std::abs(m1) > j_max_ || std::abs(m2) > j_max_)
    throw std::invalid_argument("DensityMatrix::block: |m| > j_max");
  auto key = std::make_pair(m1, m2);
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    it = blocks_.emplace(key, Eigen::MatrixXcd::Zero(block_rows(m1), block_rows(m2))).first;
  }
  return it->second;
}

const Eigen::MatrixXcd* DensityMatrix::find_block(int m1, int m2) const {
  auto it = blocks_.find(std::make_pair(m1, m2));
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<std::pair<int, int>> DensityMatrix::block_keys() const {
  std::vector<std::pair<int, int>> keys;
  keys.reserve(blocks_.size());
  for (const auto& kv : blocks_) keys.push_back(kv.first);
  return keys;
}

std::complex<double> DensityMatrix::element(int j1, int m1, int j2, int m2) const {
  const Eigen::MatrixXcd* b = find_block(m1, m2);
  if (!b) return {0.0, 0.0};
  return (*b)(j1 - std::abs(m1), j2 - std::abs(m2));
}

void DensityMatrix::set_element(int j1, int m1, int j2, int m2, std::complex<double> v) {
  if (j1 < std::abs(m1) || j2 < std::abs(m2) || j1 > j_max_ || j2 > j_max_)
    throw std::invalid_argument("DensityMatrix::set_element: invalid (J,m)");
  block(m1, m2)(j1 - std::abs(m1), j2 - std::abs(m2)) = v;
}

double DensityMatrix::trace() const {
  double t = 0.0;
  for (const auto& kv : blocks_) {
    if (kv.first.first != kv.first.second) continue;
    t += kv.second.trace().real();
  }
  return t;
}

void DensityMatrix::scale(double s) {
  for (auto& kv : blocks_) kv.second *= s;
}

double DensityMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& kv : blocks_) s += kv.second.squaredNorm();
  return std::sqrt(s);
}

Eigen::MatrixXcd DensityMatrix::to_composite() const {
  int n = (j_max_ + 1) * (j_max_ + 1);
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n, n);
  auto idx = [](int j, int m) { return j * j + (j + m); };
  for (const auto& kv : blocks_) {
    int m1 = kv.first.first, m2 = kv.first.second;
    int a1 = std::abs(m1), a2 = std::abs(m2);
    for (int r = 0; r < kv.second.rows(); ++r)
      for (int c = 0; c < kv.second.cols(); ++c)
        full(idx(a1 + r, m1), idx(a2 + c, m2)) = kv.second(r, c);
  }
  return full;
}

DensityMatrix DensityMatrix::from_composite(int j_max, const Eigen::MatrixXcd& full,
                                            double drop_tol) {
  int n = (j_max + 1) * (j_max + 1);
  if (full.rows() != n || full.cols() != n)
    throw std::invalid_argument("from_composite: dimension mismatch");
  DensityMatrix rho(j_max);
  auto idx = [](int j, int m) { return j * j + (j + m); };
  for (int m1 = -j_max; m1 <= j_max; ++m1)
    for (int m2 = -j_max; m2 <= j_max; ++m2) {
      int a1 = std::abs(m1), a2 = std::abs(m2);
      Eigen::MatrixXcd blk(j_max - a1 + 1, j_max - a2 + 1);
      double mx = 0.0;
      for (int j1 = a1; j1 <= j_max; ++j1)
        for (int j2 = a2; j2 <= j_max; ++j2) {
          std::complex<double> v = full(idx(j1, m1), idx(j2, m2));
          blk(j1 - a1, j2 - a2) = v;
          mx = std::max(mx, std::abs(v));
        }
      if (mx > drop_tol) rho.block(m1, m2) = blk;
    }
  return rho;
}

void DensityMatrix::prune(double tol) {
  for (auto it = blocks_.begin(); it != blocks_.end();) {
    if (it->second.cwiseAbs().maxCoeff() <= tol)
      it = blocks_.erase(it);
    else
      ++it;
  }
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_composite(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.j_max() != b.j_max())
    throw std::invalid_argument("DensityMatrix::distance: j_max mismatch");
  return (a.to_composite() - b.to_composite()).norm();
}

} // namespace qtomo
