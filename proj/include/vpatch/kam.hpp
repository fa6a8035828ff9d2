#pragma once

// Finite-truncation reduction schemes:
//  - straightening of omega.d_phi + V(phi,theta) d_theta by changes of
//    variables theta -> theta + beta(phi,theta);
//  - KAM elimination of a Toeplitz remainder around a reversible diagonal.

#include <cstdint>
#include <vector>

#include "vpatch/spectral.hpp"
#include "vpatch/toeplitz.hpp"

namespace vpatch {

// Even, C^infinity, 0 on |x| <= 1/3, 1 on |x| >= 1/2.
double smooth_cutoff(double x);

// f(phi, theta_new(phi, theta)) by trigonometric interpolation in theta.
PeriodicField evaluate_shifted(const PeriodicField& f, const PeriodicField& theta_new);

struct ChangeOfVariables {
  PeriodicField beta;
  PeriodicField beta_hat;  // theta = y + beta_hat(phi, y) inverts y = theta + beta(phi, theta)

  // Computes beta_hat by Newton iteration per phi row; throws invariant_violation
  // when sup |d_theta beta| >= 1.
  static ChangeOfVariables from_beta(PeriodicField beta);
  static ChangeOfVariables identity(std::vector<int> grid);

  double lipschitz() const;          // sup |d_theta beta|
  double inversion_defect() const;   // sup |beta_hat(theta + beta) + beta|
  double oddness_defect() const;     // sup |beta(-phi,-theta) + beta(phi,theta)|
};

// weighted = false: rho(phi, theta + beta); weighted = true: (1 + beta_theta) rho(phi, theta + beta).
PeriodicField compose_with(const ChangeOfVariables& c, const PeriodicField& rho, bool weighted);
// The inverse maps, built from beta_hat.
PeriodicField compose_inverse(const ChangeOfVariables& c, const PeriodicField& rho, bool weighted);
// Change of variables of "first then second": beta = beta1 + beta2 o (id + beta1).
ChangeOfVariables accumulate(const ChangeOfVariables& first, const ChangeOfVariables& second);

// ---------------------------------------------------------------------------

struct TransportProblem {
  std::vector<double> omega;  // size d
  double V0 = 0.5;
  PeriodicField f0;           // grid {n_phi..., M}
  double gamma = 1e-3;        // threshold gamma^upsilon <j> / <l>^tau1
  double upsilon = 1.0;
  double tau1 = 2.0;
  int N0 = 4;
  double smallness = 0.25;  // sup |f0| / V0 allowed

  void validate() const;
  // N_m = N0^{(3/2)^m}, capped at a third of the smallest grid size.
  int truncation(int m) const;
};

struct CutMode {
  int step = 0;
  std::vector<int> l;
  int j = 0;
  int j0 = 0;
  double divisor = 0.0;
  double chi = 0.0;
};

struct TransportStep {
  int m = 0;
  int N = 0;
  double V = 0.0;          // V_m
  double delta_sup = 0.0;  // sup |f_m|
  double delta_s = 0.0;    // H^1 norm of f_m
  double cut_fraction = 0.0;
};

struct TransportResult {
  double V_inf = 0.0;
  ChangeOfVariables change;
  std::vector<TransportStep> history;
  std::vector<CutMode> cuts;
  bool reducible = true;     // no step cut more than half of its modes
  bool in_cantor_set = true;  // no cut modes at all
  // Least-squares slope of log delta_{m+1} against log delta_m over the
  // pairs with both above 1e-13 (below that the norms are roundoff).
  double superlinear_slope = 0.0;
};

TransportResult straighten_transport(const TransportProblem& p, int steps);

// ---------------------------------------------------------------------------

struct RemainderSpec {
  std::vector<double> omega;
  double gamma = 1e-4;
  double tau2 = 2.0;
  double s0 = 1.0;
  double sh = 3.0;
  int N0 = 4;
  double neumann_tol = 1e-14;

  void validate(int d) const;
  int truncation(int m) const;
};

// Operator omega.d_phi + diag(mu_j) + R on |l|_1 <= L, 0 < |j| <= J.
struct ReductionState {
  int m = 0;
  std::vector<cplx> mu;  // by ToeplitzOperator::index(j); pure imaginary, odd in j
  ToeplitzOperator R;

  // mu_j = i Omega_j(b).
  static ReductionState around(double b, ToeplitzOperator R0);
  cplx mu_of(int j) const { return mu[static_cast<std::size_t>(R.index(j))]; }
  double frequency(int j) const { return mu_of(j).imag(); }
  // Max violation of: mu pure imaginary, mu_{-j} = -mu_j, R real and reversible.
  double structure_defect() const;
};

struct CutEntry {
  std::vector<int> l;
  int j = 0, k = 0;
  double divisor = 0.0;
  double chi = 0.0;
};

// Psi(l)_{jk} = -R(l)_{jk} chi(x) / (i d), d = omega.l - i (mu_j - mu_k),
// x = d <l>^tau2 / (gamma <j-k>), for <l, j-k> <= N and (l, j) != (0, k).
ToeplitzOperator solve_remainder_homological(const ReductionState& s, const RemainderSpec& spec, int N,
                                             std::vector<CutEntry>* cuts = nullptr);

struct KamStep {
  ReductionState next;
  ToeplitzOperator Psi;
  std::vector<CutEntry> cuts;
  int neumann_terms = 0;
  // max |L_m Phi - Phi L_{m+1} - E| over all symbols, E = (1 - chi) offdiag(P_N R):
  // zero up to roundoff wherever chi = 1.
  double conjugation_defect = 0.0;
};

// Throws invariant_violation when sum-norm of Psi >= 1/2 or the structure breaks.
KamStep kam_step(const ReductionState& s, const RemainderSpec& spec);

// [omega.d_phi, A](l) = i omega.l A(l).
ToeplitzOperator time_commutator(const ToeplitzOperator& A, const std::vector<double>& omega);

// Reversible real remainder on |l|_1 <= lsupp, |j - k| <= band: entries
// i x / (<j><k>) with the sign law R(-l)_{-j,-k} = -R(l)_{j,k}, scaled so that
// offdiag_norm(s0) = delta0. Deterministic in the seed.
ToeplitzOperator synthetic_remainder(int d, int L, int J, int lsupp, int band, double delta0, double s0,
                                     std::uint64_t seed);

struct RemainderRun {
  std::vector<ReductionState> states;
  std::vector<double> delta_s0, delta_sh;  // per state
  std::vector<double> conjugation_defects;
  std::vector<int> cut_counts;
  double slope = 0.0;       // least-squares slope of log delta_{m+1}(s0) vs log delta_m(s0)
  double sup_j_r = 0.0;     // sup_j |j| |Omega_j^final - Omega_j^0|
  double max_structure_defect = 0.0;
  bool in_cantor_set = true;
};

RemainderRun reduce_remainder(const ReductionState& init, const RemainderSpec& spec, int steps);

// Slope of log y_{k+1} against log y_k over consecutive pairs with both above floor.
double superlinear_slope(const std::vector<double>& deltas, double floor);

}  // namespace vpatch
