#pragma once

// Contour dynamics of the patch: velocity functional, energy, Hamiltonian,
// time stepping and frequency analysis of trajectories.

#include <map>
#include <string>
#include <vector>

#include "vpatch/geometry.hpp"

namespace vpatch {

// F_b[r]; the evolution is d_t r = -F_b[r].
PeriodicField velocity_functional(const PatchState& s);

// Kinetic-type energy E(r) computed from boundary integrals.
double energy(const PatchState& s);
// Independent evaluation by radial Gauss-Legendre quadrature of the area
// integrals (nr nodes). Accurate to a few digits only; a cross-check.
double energy_polar(const PatchState& s, int nr = 64);
// H = -E/2.
double hamiltonian(const PatchState& s);
// grad E (with respect to the normalized L^2 pairing) = 2 Psi on the boundary.
PeriodicField stream_gradient(const PatchState& s);

struct EvolutionConfig {
  double dt = 1e-3;
  double T = 1.0;
  int M = 256;
  int record_stride = 1;
  bool dealias = true;
  bool record_hamiltonian = true;
  bool store_snapshots = false;
  double sobolev_s = 1.0;
  std::vector<int> modes;  // Fourier modes whose coefficients are recorded

  void validate() const;
  long steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> means;
  std::vector<double> hamiltonians;  // empty unless recorded
  std::vector<double> hs_norms;
  std::vector<int> modes;
  std::vector<std::vector<cplx>> mode_values;  // [sample][mode]
  std::vector<PeriodicField> snapshots;
  std::string status = "ok";  // otherwise names the invariant that stopped the run
  bool complete() const { return status == "ok"; }
};

// Dealiased classical RK4 step of d_t r = -F_b[r].
PatchState step(const PatchState& s, double dt, bool dealias = true);
Trajectory simulate(const PatchState& s0, const EvolutionConfig& cfg);

// r0 = sum a_j cos(j theta) for the given sites.
PatchState quasi_periodic_seed(double b, const std::map<int, double>& amplitudes, int M);

// Angular frequency Omega of a sampled signal x(t) ~ A exp(-i Omega t):
// Hann-windowed DFT peak, quadratic interpolation, then refinement of the
// windowed Fourier integral maximum.
double extract_frequency(const std::vector<double>& times, const std::vector<cplx>& signal);
double extract_frequencies(const Trajectory& traj, int mode);

}  // namespace vpatch
