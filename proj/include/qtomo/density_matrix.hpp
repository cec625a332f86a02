#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <utility>
#include <vector>

namespace qtomo {

// Block-sparse rotational density matrix. Blocks are keyed by the projection
// pair (m1, m2); block(m1,m2)(r, c) holds <J1 m1|rho|J2 m2> with
// J1 = |m1| + r, J2 = |m2| + c. Only blocks that were touched are stored;
// absent blocks read as zero.
//
// time_tag is the phase reference: element values are Schroedinger-picture
// matrix elements at t = time_tag on the shared clock of a run.
class DensityMatrix {
 public:
  explicit DensityMatrix(int j_max) : j_max_(j_max) {}

  int j_max() const { return j_max_; }
  double time_tag() const { return time_tag_; }
  void set_time_tag(double t) { time_tag_ = t; }

  int block_rows(int m) const { return j_max_ - std::abs(m) + 1; }

  Eigen::MatrixXcd& block(int m1, int m2);
  const Eigen::MatrixXcd* find_block(int m1, int m2) const;

  std::vector<std::pair<int, int>> block_keys() const;

  std::complex<double> element(int j1, int m1, int j2, int m2) const;
  void set_element(int j1, int m1, int j2, int m2, std::complex<double> v);

  double trace() const;
  void scale(double s);
  double frobenius_norm() const;

  // Dense matrix over the composite |J,m> enumeration, index = J^2 + (J+m).
  Eigen::MatrixXcd to_composite() const;
  static DensityMatrix from_composite(int j_max, const Eigen::MatrixXcd& full,
                                      double drop_tol = 0.0);

  // Removes stored blocks with no entry above tol.
  void prune(double tol = 0.0);

  double min_eigenvalue() const;

  // || a - b ||_F over the composite representation.
  static double distance(const DensityMatrix& a, const DensityMatrix& b);

 private:
  int j_max_;
  double time_tag_ = 0.0;
  std::map<std::pair<int, int>, Eigen::MatrixXcd> blocks_;
};

} // namespace qtomo
