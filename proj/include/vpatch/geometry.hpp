#pragma once

// Boundary geometry of a patch R(theta) = sqrt(b^2 + 2 r(theta)) and the
// two-point kernels built on it.

#include <vector>

#include "vpatch/spectral.hpp"

namespace vpatch {

class PatchState {
 public:
  PatchState() = default;
  // Throws degenerate_patch unless |r|_inf < b^2/2 - margin, margin = 1e-2 b^2/2.
  PatchState(double b, PeriodicField r);

  static PatchState disc(double b, int M);

  double b() const { return b_; }
  const PeriodicField& r() const { return r_; }
  int M() const { return r_.M(); }
  double R(int i) const { return R_[static_cast<std::size_t>(i)]; }
  double dR(int i) const { return dR_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& R() const { return R_; }
  const std::vector<double>& dR() const { return dR_; }
  double max_R() const;
  // Throws boundary_contact if max R >= 1 - 1e-6.
  void require_inside_disc() const;

  static double admissible_sup(double b) { return 0.5 * b * b * (1.0 - 1e-2); }

 private:
  double b_ = 0.0;
  PeriodicField r_;
  std::vector<double> R_, dR_;
};

// k(theta_i, theta_k) on the M x M grid, row i, column k.
struct KernelTable {
  int M = 0;
  std::vector<double> values;
  bool symmetric = false;

  double at(int i, int k) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(M) + static_cast<std::size_t>(k)];
  }
  double max_asymmetry() const;
};

KernelTable kernel_A(const PatchState& s);
KernelTable smooth_factor_v1(const PatchState& s);
KernelTable diagonal_difference_quotient(const PeriodicField& f);
KernelTable kernel_B(const PatchState& s);
KernelTable kernel_P(const PatchState& s);

// Fourier coefficients of log|sin(u/2)| and log|1 - b^2 e^{iu}|.
double k1_coefficient(int k);
double k2_coefficient(double b, int k);

// Weights w_m with sum_m w_m g(2 pi m / M) = int K(u) g(u) du for g
// band-limited on the grid; the Nyquist mode is split evenly.
std::vector<double> singular_weights(int M, const std::function<double(int)>& coefficient);

// Kernel data in shifted coordinates eta = theta_i + u_m, u_m = 2 pi m/M.
//   log A(theta_i, eta) = log(2b) + log|sin(u/2)| + lv1[i, m]
//   log B(theta_i, eta) = log|1 - b^2 e^{iu}| + lp[i, m]
// so w1[m] + lv1[i,m]/M integrates against log A - log(2b), and
// w2[m] + lp[i,m]/M against log B.
struct PatchKernels {
  int M = 0;
  double b = 0.0;
  std::vector<double> w1, w2;
  std::vector<double> lv1, lp;
  std::vector<double> cosu, sinu;

  static PatchKernels build(const PatchState& s);

  double k1(int i, int m) const { return w1[static_cast<std::size_t>(m)] + lv1[at(i, m)] / M; }
  double k2(int i, int m) const { return w2[static_cast<std::size_t>(m)] + lp[at(i, m)] / M; }
  std::size_t at(int i, int m) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(M) + static_cast<std::size_t>(m);
  }
};

}  // namespace vpatch
