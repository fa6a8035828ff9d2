#pragma once

// Equilibrium frequencies Omega_j(b) = (j - 1 + b^{2j}) / 2 (odd in j),
// exact b-derivatives, non-degeneracy and transversality scans.

#include <array>
#include <map>
#include <string>
#include <vector>

namespace vpatch {

double omega(double b, int j);
// d^q/db^q Omega_j(b) by the monomial rule.
double omega_derivative(double b, int j, int q);

// Falling factorial n (n-1) ... (n-q+1) as a double.
double falling_factorial(int n, int q);

// Sparse polynomial c0 + sum c_n b^n with exact monomial derivatives.
class SparsePoly {
 public:
  SparsePoly() = default;
  explicit SparsePoly(double constant) : c0_(constant) {}

  void add_term(int exponent, double coeff);
  void add_constant(double c) { c0_ += c; }
  SparsePoly& operator+=(const SparsePoly& o);
  SparsePoly operator*(double s) const;

  double constant() const { return c0_; }
  const std::map<int, double>& terms() const { return terms_; }
  int degree() const;

  // q-th derivative at b.
  double eval(double b, int q = 0) const;
  // Upper bound of sup_{[lo,hi]} |f^{(q)}| from absolute monomials (0 <= lo).
  double sup_bound(double lo, double hi, int q) const;
  // Lower bound of inf_{[lo,hi]} |f| from monotone monomial ranges.
  double inf_abs_bound(double lo, double hi) const;

 private:
  double c0_ = 0.0;
  std::map<int, double> terms_;
};

SparsePoly omega_poly(int j);

struct FrequencySystem {
  std::vector<int> sites;  // tangential set, strictly increasing positive integers
  double b0 = 0.1, b1 = 0.9;

  void validate() const;
  int d() const { return static_cast<int>(sites.size()); }
  int q0() const { return 2 * sites.back() + 2; }
  bool is_site(int j) const;
  std::vector<double> omega_eq(double b) const;
  // omega_eq . l as a polynomial.
  SparsePoly omega_dot(const std::vector<int>& l) const;
  // Bound on sup |omega_eq . l| per unit |l|_1 over [b0, b1].
  double omega_sup() const;
};

struct MonotonicityReport {
  double min_gap = 0.0;  // min over j of Omega_{j+1}/(j+1) - Omega_j/j
  int argmin_j = 0;
  bool increasing = false;
};
MonotonicityReport check_monotonicity(double b, int Jmax);

// min over the grid and 1 <= j <= Jmax of |Omega_j(b)| / ((b0^2/2) j).
double lower_bound_ratio(double b0, double b1, int Jmax, int grid);
// min over grid, 1 <= j, j' <= Jmax (j != j' for the difference) of
// |Omega_j +- Omega_j'| / ((b0^2/6) |j +- j'|).
double sum_difference_ratio(double b0, double b1, int Jmax, int grid);

// Full column rank of the coefficient matrix of {Omega_{j_1}, ..., Omega_{j_d}, 1}
// in the monomial basis, in exact rational arithmetic on 2 Omega_j.
bool nondegeneracy_test(const FrequencySystem& sys);
// Linear independence of integer-coefficient polynomials (coefficient lists by degree).
bool nondegeneracy_test(const std::vector<std::vector<long long>>& polys);

struct Witness {
  double b = 0.0;
  std::vector<int> l;
  int j = 0;
  int j0 = 0;
  int q = 0;
  int sign = 0;  // +-1 for the j' term of case (iv) and the j term of (ii)/(iii)
};

struct CaseReport {
  std::string name;
  double rho0_hat = 0.0;
  Witness witness;
  std::map<int, double> per_l;  // <l> -> min over that shell
  long functions = 0;           // functions examined (after index cutoffs)
};

struct TransversalityReport {
  std::array<CaseReport, 4> cases;
  double rho0_hat = 0.0;  // min over the four cases
  double perturbation = 0.0;
  int grid = 0;
  int Lmax = 0;
};

struct ScanOptions {
  int Lmax = 20;
  int grid = 10000;
  double perturbation = 0.0;  // worst-case reduction of each |f^(q)|
  int jobs = 1;
  // Replaces omega_eq by a synthetic vector (negative controls); empty = none.
  std::vector<SparsePoly> synthetic_omega;
};

TransversalityReport transversality_scan(const FrequencySystem& sys, const ScanOptions& opt);
TransversalityReport perturbed_transversality(const FrequencySystem& sys, ScanOptions opt,
                                              double eps_hat);

}  // namespace vpatch
