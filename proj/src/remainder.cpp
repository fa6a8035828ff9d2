#include <algorithm>
#include <cmath>
#include <random>

#include "vpatch/errors.hpp"
#include "vpatch/frequencies.hpp"
#include "vpatch/kam.hpp"

namespace vpatch {

void RemainderSpec::validate(int d) const {
  if (static_cast<int>(omega.size()) != d) throw invalid_argument("RemainderSpec: omega has wrong dimension");
  if (!(gamma > 0.0 && gamma < 1.0)) throw invalid_argument("RemainderSpec: gamma outside (0,1)");
  if (!(tau2 > d)) throw invalid_argument("RemainderSpec: need tau2 > d");
  if (!(sh > s0 && s0 >= 0.0)) throw invalid_argument("RemainderSpec: need 0 <= s0 < sh");
  if (N0 < 2) throw invalid_argument("RemainderSpec: N0 must be >= 2");
  if (!(neumann_tol > 0.0 && neumann_tol < 1e-6)) throw invalid_argument("RemainderSpec: bad Neumann tolerance");
}

int RemainderSpec::truncation(int m) const {
  return static_cast<int>(std::floor(std::pow(static_cast<double>(N0), std::pow(1.5, m))));
}

ReductionState ReductionState::around(double b, ToeplitzOperator R0) {
  ReductionState s;
  s.mu.resize(static_cast<std::size_t>(R0.dim()));
  for (int r = 0; r < R0.dim(); ++r) s.mu[static_cast<std::size_t>(r)] = cplx(0.0, omega(b, R0.mode(r)));
  s.R = std::move(R0);
  return s;
}

double ReductionState::structure_defect() const {
  double w = 0.0;
  for (int j = 1; j <= R.J(); ++j) {
    w = std::max(w, std::abs(mu_of(j).real()));
    w = std::max(w, std::abs(mu_of(-j) + mu_of(j)));
  }
  w = std::max(w, R.realness_defect());
  w = std::max(w, R.reversibility_defect());
  return w;
}

namespace {

double divisor(const ReductionState& s, const std::vector<double>& omega, const std::vector<int>& l, int j, int k) {
  double d = (cplx(0.0, -1.0) * (s.mu_of(j) - s.mu_of(k))).real();
  for (std::size_t a = 0; a < l.size(); ++a) d += omega[a] * l[a];
  return d;
}

double chi_of(const RemainderSpec& spec, const std::vector<int>& l, int j, int k, double d) {
  const double x = d * std::pow(std::max(1, l1_norm(l)), spec.tau2) / (spec.gamma * std::max(1, std::abs(j - k)));
  return smooth_cutoff(x);
}

bool is_zero(const std::vector<int>& l) {
  return std::all_of(l.begin(), l.end(), [](int x) { return x == 0; });
}

double sum_norm(const ToeplitzOperator& A) {
  double s = 0.0;
  for (const auto& kv : A.symbols()) s += kv.second.norm();
  return s;
}

ToeplitzOperator diagonal_of(const ReductionState& s) {
  return ToeplitzOperator::diagonal(s.R.d(), s.R.L(), s.R.J(), [&](int j) { return s.mu_of(j); });
}

}  // namespace

ToeplitzOperator time_commutator(const ToeplitzOperator& A, const std::vector<double>& omega) {
  if (static_cast<int>(omega.size()) != A.d()) throw invalid_argument("time_commutator: omega has wrong dimension");
  ToeplitzOperator t = A;
  for (const auto& [l, b] : A.symbols()) {
    double wl = 0.0;
    for (std::size_t a = 0; a < l.size(); ++a) wl += omega[a] * l[a];
    t.block(l) = b * cplx(0.0, wl);
  }
  return t;
}

ToeplitzOperator solve_remainder_homological(const ReductionState& s, const RemainderSpec& spec, int N,
                                             std::vector<CutEntry>* cuts) {
  spec.validate(s.R.d());
  const ToeplitzOperator PR = s.R.project(N);
  ToeplitzOperator Psi(s.R.d(), s.R.L(), s.R.J());
  for (const auto& [l, b] : PR.symbols()) {
    const bool l0 = is_zero(l);
    for (int r = 0; r < PR.dim(); ++r) {
      for (int c = 0; c < PR.dim(); ++c) {
        if (l0 && r == c) continue;
        const cplx x = b(r, c);
        if (x == 0.0) continue;
        const int j = PR.mode(r), k = PR.mode(c);
        const double d = divisor(s, spec.omega, l, j, k);
        const double chi = chi_of(spec, l, j, k, d);
        if (chi < 1.0 && cuts) cuts->push_back(CutEntry{l, j, k, d, chi});
        if (chi > 0.0) Psi.block(l)(r, c) = -x * chi / cplx(0.0, d);
      }
    }
  }
  return Psi;
}

KamStep kam_step(const ReductionState& s, const RemainderSpec& spec) {
  spec.validate(s.R.d());
  const int d = s.R.d(), L = s.R.L(), J = s.R.J();
  const int N = spec.truncation(s.m);
  KamStep out;
  out.Psi = solve_remainder_homological(s, spec, N, &out.cuts);
  const ToeplitzOperator& Psi = out.Psi;
  if (!(sum_norm(Psi) < 0.5)) throw invariant_violation("kam_step: |Psi| >= 1/2, Phi = Id + Psi not invertible by Neumann series");

  const ToeplitzOperator PR = s.R.project(N);
  const ToeplitzOperator floorPR = PR.diagonal_part();
  const ToeplitzOperator I = ToeplitzOperator::identity(d, L, J);

  // Phi^{-1} = sum (-Psi)^n, stopped at relative tail neumann_tol.
  ToeplitzOperator inv = I, term = I;
  const ToeplitzOperator mPsi = Psi * cplx(-1.0, 0.0);
  for (int n = 1;; ++n) {
    if (n > 200) throw invariant_violation("kam_step: Neumann series did not converge");
    term = mPsi.compose(term);
    inv = inv + term;
    out.neumann_terms = n;
    if (term.max_abs() <= spec.neumann_tol) break;
  }

  const ToeplitzOperator inner =
      Psi.compose(floorPR) * cplx(-1.0, 0.0) + (s.R - PR) + s.R.compose(Psi);
  ReductionState next;
  next.m = s.m + 1;
  next.R = inv.compose(inner);
  next.mu = s.mu;
  for (int r = 0; r < 2 * J; ++r) next.mu[static_cast<std::size_t>(r)] += floorPR.block(std::vector<int>(d, 0))(r, r);
  const double defect = next.structure_defect();
  if (defect > 1e-10)
    throw invariant_violation("kam_step: reversible structure lost (defect " + std::to_string(defect) + ")");

  // L_m Phi - Phi L_{m+1} against the cut-mode remainder.
  const ToeplitzOperator Phi = I + Psi;
  ToeplitzOperator delta = time_commutator(Psi, spec.omega) + diagonal_of(s).compose(Phi) -
                           Phi.compose(diagonal_of(next)) + s.R.compose(Phi) - Phi.compose(next.R);
  for (const auto& [l, b] : PR.symbols()) {
    const bool l0 = is_zero(l);
    for (int r = 0; r < PR.dim(); ++r)
      for (int c = 0; c < PR.dim(); ++c) {
        if ((l0 && r == c) || b(r, c) == 0.0) continue;
        const int j = PR.mode(r), k = PR.mode(c);
        const double chi = chi_of(spec, l, j, k, divisor(s, spec.omega, l, j, k));
        delta.block(l)(r, c) -= (1.0 - chi) * b(r, c);
      }
  }
  out.conjugation_defect = delta.max_abs();
  out.next = std::move(next);
  return out;
}

ToeplitzOperator synthetic_remainder(int d, int L, int J, int lsupp, int band, double delta0, double s0,
                                     std::uint64_t seed) {
  if (lsupp < 0 || lsupp > L || band < 0) throw invalid_argument("synthetic_remainder: bad support");
  if (!(delta0 > 0.0)) throw invalid_argument("synthetic_remainder: delta0 must be positive");
  std::mt19937_64 rng(seed);
  // Uniform on [-1, 1] from the top 53 bits (same stream on every platform).
  auto uniform = [&rng] { return std::ldexp(static_cast<double>(rng() >> 11), -53) * 2.0 - 1.0; };
  ToeplitzOperator R(d, L, J);
  for (const auto& l : enumerate_l(d, lsupp)) {
    std::vector<int> ml(l.size());
    for (std::size_t a = 0; a < l.size(); ++a) ml[a] = -l[a];
    for (int j = -J; j <= J; ++j) {
      if (j == 0) continue;
      for (int k = std::max(-J, j - band); k <= std::min(J, j + band); ++k) {
        if (k == 0) continue;
        // Draw once per mirror pair (l,j,k) ~ (-l,-j,-k); the larger tuple draws.
        if (std::make_tuple(l, j, k) < std::make_tuple(ml, -j, -k)) continue;
        const cplx v(0.0, uniform() / (std::abs(j) * std::abs(k)));
        R.entry(l, j, k) = v;
        R.entry(ml, -j, -k) = -v;
      }
    }
  }
  const double n = R.offdiag_norm(s0);
  if (!(n > 0.0)) throw invalid_argument("synthetic_remainder: empty support");
  return R * cplx(delta0 / n, 0.0);
}

RemainderRun reduce_remainder(const ReductionState& init, const RemainderSpec& spec, int steps) {
  if (steps < 1) throw invalid_argument("reduce_remainder: steps must be >= 1");
  RemainderRun run;
  run.states.push_back(init);
  run.max_structure_defect = init.structure_defect();
  for (int m = 0; m < steps; ++m) {
    KamStep ks = kam_step(run.states.back(), spec);
    run.conjugation_defects.push_back(ks.conjugation_defect);
    run.cut_counts.push_back(static_cast<int>(ks.cuts.size()));
    if (!ks.cuts.empty()) run.in_cantor_set = false;
    run.max_structure_defect = std::max(run.max_structure_defect, ks.next.structure_defect());
    run.states.push_back(std::move(ks.next));
  }
  for (const auto& s : run.states) {
    run.delta_s0.push_back(s.R.offdiag_norm(spec.s0));
    run.delta_sh.push_back(s.R.offdiag_norm(spec.sh));
  }
  run.slope = superlinear_slope(run.delta_s0, 0.0);
  const ReductionState& last = run.states.back();
  for (int j = 1; j <= init.R.J(); ++j)
    run.sup_j_r = std::max(run.sup_j_r, j * std::abs(last.frequency(j) - init.frequency(j)));
  return run;
}

}  // namespace vpatch
