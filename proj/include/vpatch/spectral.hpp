#pragma once

// Periodic fields on T^{d+1} = (phi_1..phi_d, theta), Fourier projectors,
// Sobolev norms and finite Fourier-truncated linear operators.
//
// Integrals over the torus are normalized (plain grid averages), so the
// Fourier coefficient of e^{i(l.phi + j theta)} is the grid mean of the
// field times e^{-i(l.phi + j theta)}.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <vector>

namespace vpatch {

using cplx = std::complex<double>;

// <l,j> = max(1, |l|_1, |j|).
int bracket(const std::vector<int>& l, int j);
int l1_norm(const std::vector<int>& l);

class PeriodicField {
 public:
  PeriodicField() = default;

  // grid = {n_phi_1, ..., n_phi_d, M}; every size must be a power of two.
  static PeriodicField from_values(std::vector<int> grid, std::vector<double> values);
  // Coefficients in FFT slot layout; the real part of the synthesis is kept.
  static PeriodicField from_coeffs(std::vector<int> grid, const std::vector<cplx>& coeffs);
  static PeriodicField zeros(std::vector<int> grid);
  static PeriodicField sample(int M, const std::function<double(double)>& f);
  static PeriodicField sample(std::vector<int> grid,
                              const std::function<double(const std::vector<double>&, double)>& f);
  // cos(l.phi + j theta) (or sin when sine = true).
  static PeriodicField mode(std::vector<int> grid, const std::vector<int>& l, int j,
                            bool sine = false);

  int dims() const { return static_cast<int>(grid_.size()); }
  int angle_dims() const { return dims() - 1; }
  const std::vector<int>& grid() const { return grid_; }
  int M() const { return grid_.empty() ? 0 : grid_.back(); }
  std::size_t size() const { return values_.size(); }

  const std::vector<double>& values() const { return values_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  double value(std::size_t i) const { return values_[i]; }

  // Coefficient of e^{i(l.phi + j theta)}; zero outside |l_i|, |j| < n/2.
  cplx coeff(const std::vector<int>& l, int j) const;
  cplx coeff(int j) const;
  std::size_t coeff_slot(const std::vector<int>& l, int j) const;
  bool in_truncation(const std::vector<int>& l, int j) const;

  double mean() const { return coeffs_.empty() ? 0.0 : coeffs_[0].real(); }
  bool zero_mean_flag() const { return zero_mean_; }
  PeriodicField with_zero_mean() const;
  double sup_norm() const;

  // Grid coordinates of flat index i: phi components then theta.
  std::vector<double> phi_of(std::size_t i) const;
  double theta_of(std::size_t i) const;

  PeriodicField operator+(const PeriodicField& o) const;
  PeriodicField operator-(const PeriodicField& o) const;
  PeriodicField operator*(double s) const;
  PeriodicField operator-() const { return (*this) * -1.0; }
  // Pointwise product.
  PeriodicField times(const PeriodicField& o) const;

 private:
  std::vector<int> grid_;
  std::vector<double> values_;
  std::vector<cplx> coeffs_;
  bool zero_mean_ = false;

  void check_compatible(const PeriodicField& o) const;
};

bool is_power_of_two(int n);

// Pi_N: keep coefficients with <l,j> <= N.
PeriodicField project(const PeriodicField& f, int N);
// Pi_N^perp = Id - Pi_N.
PeriodicField project_complement(const PeriodicField& f, int N);

// (sum <l,j>^{2s} |f_{l,j}|^2)^{1/2}
double sobolev_norm(const PeriodicField& f, double s);

PeriodicField derivative_theta(const PeriodicField& f);
PeriodicField derivative_phi(const PeriodicField& f, int axis);
// Inverse of d/dtheta on fields with vanishing j = 0 column.
PeriodicField antiderivative(const PeriodicField& f);

// W(r,h) = int (d_theta^{-1} r) h dtheta on theta-only zero-mean fields.
double symplectic_pairing(const PeriodicField& r, const PeriodicField& h);

// L^2 inner product with the normalized measure.
double inner(const PeriodicField& a, const PeriodicField& b);

// Reflection (S rho)(phi,theta) = rho(-phi,-theta).
PeriodicField reflect(const PeriodicField& f);

// Evaluate the trigonometric interpolant of a theta-only field at x.
double evaluate_at(const PeriodicField& f, double theta);

// ---------------------------------------------------------------------------
// Truncated lattice of Fourier sites (l, j): |l|_1 <= nl, |j| <= nj.
struct Site {
  std::vector<int> l;
  int j = 0;
};

class FourierLattice {
 public:
  FourierLattice() = default;
  FourierLattice(int d, int nl, int nj, bool skip_zero_j);

  int d() const { return d_; }
  int nl() const { return nl_; }
  int nj() const { return nj_; }
  bool skip_zero_j() const { return skip_zero_j_; }
  int size() const { return static_cast<int>(sites_.size()); }
  const Site& site(int i) const { return sites_[static_cast<std::size_t>(i)]; }
  int index_of(const std::vector<int>& l, int j) const;
  bool operator==(const FourierLattice& o) const {
    return d_ == o.d_ && nl_ == o.nl_ && nj_ == o.nj_ && skip_zero_j_ == o.skip_zero_j_;
  }

 private:
  int d_ = 0, nl_ = 0, nj_ = 0;
  bool skip_zero_j_ = true;
  std::vector<Site> sites_;
  std::map<std::pair<std::vector<int>, int>, int> index_;
};

// Enumerate l in Z^d with |l|_1 <= n, in lexicographic order.
std::vector<std::vector<int>> enumerate_l(int d, int n);

// Dense matrix of an operator on the lattice: entry (row, col) is
// T^{l,j}_{l0,j0}, the (l,j) coefficient of T e_{l0,j0}.
class LinearOperatorMatrix {
 public:
  LinearOperatorMatrix() = default;
  LinearOperatorMatrix(FourierLattice lattice, Eigen::MatrixXcd entries, bool toeplitz_in_time);

  static LinearOperatorMatrix identity(const FourierLattice& lattice);
  static LinearOperatorMatrix multiplier(const FourierLattice& lattice,
                                         const std::function<cplx(int)>& a);

  const FourierLattice& lattice() const { return lattice_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  bool toeplitz_in_time() const { return toeplitz_; }
  int N() const { return lattice_.nj(); }

  cplx entry(const std::vector<int>& l, int j, const std::vector<int>& l0, int j0) const;

  // Fourier-coefficient characterizations; tol is absolute.
  bool is_real(double tol = 1e-12) const;
  bool is_reversible(double tol = 1e-12) const;
  bool is_reversibility_preserving(double tol = 1e-12) const;
  // Entries depend on l - l0 only (wherever both sites are in the lattice).
  bool check_toeplitz(double tol = 1e-12) const;
  double max_offdiagonal() const;

 private:
  FourierLattice lattice_;
  Eigen::MatrixXcd entries_;
  bool toeplitz_ = true;

  double symmetry_defect(int kind) const;
};

// (sum_{(l,m)} <l,m>^{2s} sup_{j-k=m} |T_j^k(l)|^2)^{1/2}
double offdiag_norm(const LinearOperatorMatrix& op, double s);

// Matrix-vector product in coefficient space. Modes outside the lattice are
// dropped from the input and absent from the output.
PeriodicField apply_operator(const LinearOperatorMatrix& op, const PeriodicField& f);

}  // namespace vpatch
