#pragma once

// Toeplitz-in-time operators stored by their symbols: for every time
// frequency l (|l|_1 <= L) a 2J x 2J block T(l) acting on the space modes
// j in {-J..-1, 1..J}. The operator maps h_{l0,k} to sum_k T(l - l0)_{j,k} h_{l0,k}.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <vector>

#include "vpatch/spectral.hpp"

namespace vpatch {

class ToeplitzOperator {
 public:
  ToeplitzOperator() = default;
  ToeplitzOperator(int d, int L, int J);

  static ToeplitzOperator identity(int d, int L, int J);
  // diag(a(j)) at l = 0.
  static ToeplitzOperator diagonal(int d, int L, int J, const std::function<cplx(int)>& a);

  int d() const { return d_; }
  int L() const { return L_; }
  int J() const { return J_; }
  int dim() const { return 2 * J_; }

  // Row/column of space mode j (j != 0, |j| <= J).
  int index(int j) const { return j < 0 ? j + J_ : j + J_ - 1; }
  int mode(int idx) const { return idx < J_ ? idx - J_ : idx - J_ + 1; }

  const std::map<std::vector<int>, Eigen::MatrixXcd>& symbols() const { return sym_; }
  const Eigen::MatrixXcd& block(const std::vector<int>& l) const;
  Eigen::MatrixXcd& block(const std::vector<int>& l);
  cplx entry(const std::vector<int>& l, int j, int k) const;
  cplx& entry(const std::vector<int>& l, int j, int k);

  ToeplitzOperator operator+(const ToeplitzOperator& o) const;
  ToeplitzOperator operator-(const ToeplitzOperator& o) const;
  ToeplitzOperator operator*(cplx s) const;
  // Composition (this after o); symbols with |l|_1 > L are dropped.
  ToeplitzOperator compose(const ToeplitzOperator& o) const;

  double offdiag_norm(double s) const;
  double max_abs() const;

  // Characterizations through T(-l)_{-j,-k} versus T(l)_{j,k}.
  double realness_defect() const;
  double reversibility_defect() const;
  double reversibility_preserving_defect() const;

  // l = 0 diagonal part.
  ToeplitzOperator diagonal_part() const;
  // Keep entries with <l, j - k> <= N.
  ToeplitzOperator project(int N) const;

  // Dense matrix on the lattice |l|_1 <= nl, 0 < |j| <= J.
  LinearOperatorMatrix to_matrix(int nl) const;

 private:
  int d_ = 0, L_ = 0, J_ = 0;
  std::map<std::vector<int>, Eigen::MatrixXcd> sym_;

  void check_compatible(const ToeplitzOperator& o) const;
  double mirror_defect(int kind) const;
};

}  // namespace vpatch
