#pragma once

// Linearization of d_t r = -F_b[r] at a state r:
//   d_t rho = G rho,  G rho = -d_theta (V_r rho + L_r rho - S_r rho).

#include <map>

#include "vpatch/geometry.hpp"

namespace vpatch {

PeriodicField transport_coefficient(const PatchState& s);
// L_r rho = int rho(eta) log A_r(theta, eta) d eta. The constant log(2b)
// contributes log(2b) mean(rho), so L_0 1 = log b.
PeriodicField nonlocal_L(const PatchState& s, const PeriodicField& rho);
// S_r rho = int rho(eta) log B_r(theta, eta) d eta.
PeriodicField smoothing_S(const PatchState& s, const PeriodicField& rho);

class Linearization {
 public:
  explicit Linearization(const PatchState& s);

  const PeriodicField& V() const { return V_; }
  const PatchKernels& kernels() const { return K_; }
  PeriodicField L(const PeriodicField& rho) const;
  PeriodicField S(const PeriodicField& rho) const;
  PeriodicField apply(const PeriodicField& rho) const;  // G rho

 private:
  double b_;
  PatchKernels K_;
  PeriodicField V_;
};

PeriodicField apply_generator(const PatchState& s, const PeriodicField& rho);

// Matrix of G on 0 < |j| <= N, column j the image of e^{i j theta}. N <= M/3.
LinearOperatorMatrix assemble(const PatchState& s, int N);

struct LinearizedPieces {
  PeriodicField V;
  PatchKernels kernels;
  LinearOperatorMatrix assembled;
};
LinearizedPieces linearized_pieces(const PatchState& s, int N);

// Multiplier of G at r = 0 on e_j: -i Omega_j(b).
cplx equilibrium_multiplier(double b, int j);

// int log(sin^2(eta/2)) cos(j eta) d eta (normalized), composite Gauss-Legendre
// on a mesh graded towards the logarithmic endpoint, about M nodes in total.
double log_sin_moment(int j, int M);
// int log|1 - b^2 e^{i eta}| cos(j eta) d eta (normalized), M-point trapezoid.
double log_disc_moment(double b, int j, int M);

// sup_theta |d_t rho - G_0 rho| at time t for rho = sum a_j cos(j theta - Omega_j t).
double linear_flow_residual(double b, const std::map<int, double>& amplitudes, double t, int M);

}  // namespace vpatch
