#include "vpatch/dynamics.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "vpatch/errors.hpp"
#include "vpatch/fft.hpp"

namespace vpatch {

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicField dealiased(const PeriodicField& r) {
  const int M = r.M();
  std::vector<cplx> c = r.coeffs();
  for (int s = 0; s < M; ++s)
    if (3 * std::abs(fft::wavenumber(s, M)) > M) c[static_cast<std::size_t>(s)] = 0.0;
  return PeriodicField::from_coeffs({M}, c);
}

PeriodicField axpy(const PeriodicField& x, double a, const PeriodicField& y) { return x + y * a; }

}  // namespace

PeriodicField velocity_functional(const PatchState& s) {
  const PatchKernels K = PatchKernels::build(s);
  const int M = s.M();
  const double b2 = s.b() * s.b();
  const double area = b2 + 2.0 * s.r().mean();
  const PeriodicField dr = derivative_theta(s.r());
  std::vector<double> F(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const double Ri = s.R(i), dRi = s.dR(i);
    double F1 = 0.0, F2 = 0.0;
    for (int m = 0; m < M; ++m) {
      const int k = (i + m) % M;
      const double cu = K.cosu[static_cast<std::size_t>(m)], su = K.sinu[static_cast<std::size_t>(m)];
      // d_eta (R sin(eta - theta)) and -d_eta (R cos(eta - theta)).
      const double a = s.dR(k) * su + s.R(k) * cu;
      const double c = -s.dR(k) * cu + s.R(k) * su;
      F1 += K.k1(i, m) * (dRi * a + Ri * c);
      F2 += K.k2(i, m) * (-dRi / (Ri * Ri) * a + c / Ri);
    }
    const double F0 = 0.5 * dr.value(static_cast<std::size_t>(i)) * area / (Ri * Ri);
    F[static_cast<std::size_t>(i)] = -F0 - F1 + F2;
  }
  return PeriodicField::from_values({M}, std::move(F));
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw invalid_argument("EvolutionConfig: dt must be positive");
  if (!(T >= dt)) throw invalid_argument("EvolutionConfig: T must be at least dt");
  if (!is_power_of_two(M) || M < 8) throw invalid_argument("EvolutionConfig: M must be a power of two >= 8");
  if (record_stride < 1) throw invalid_argument("EvolutionConfig: record_stride must be >= 1");
  for (int j : modes)
    if (2 * std::abs(j) >= M) throw invalid_argument("EvolutionConfig: recorded mode outside the grid");
}

long EvolutionConfig::steps() const { return std::lround(T / dt); }

PatchState step(const PatchState& s, double dt, bool dealias) {
  const double b = s.b();
  const PeriodicField& r = s.r();
  const PeriodicField k1 = -velocity_functional(s);
  const PeriodicField k2 = -velocity_functional(PatchState(b, axpy(r, 0.5 * dt, k1)));
  const PeriodicField k3 = -velocity_functional(PatchState(b, axpy(r, 0.5 * dt, k2)));
  const PeriodicField k4 = -velocity_functional(PatchState(b, axpy(r, dt, k3)));
  PeriodicField next = r + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
  return {b, dealias ? dealiased(next) : next};
}

Trajectory simulate(const PatchState& s0, const EvolutionConfig& cfg) {
  cfg.validate();
  if (s0.M() != cfg.M) throw invalid_argument("simulate: state grid does not match config M");
  Trajectory tr;
  tr.modes = cfg.modes;
  auto record = [&](const PatchState& s, long n) {
    tr.times.push_back(static_cast<double>(n) * cfg.dt);
    tr.means.push_back(s.r().mean());
    if (cfg.record_hamiltonian) tr.hamiltonians.push_back(hamiltonian(s));
    tr.hs_norms.push_back(sobolev_norm(s.r(), cfg.sobolev_s));
    std::vector<cplx> mv;
    for (int j : cfg.modes) mv.push_back(s.r().coeff(j));
    tr.mode_values.push_back(std::move(mv));
    if (cfg.store_snapshots) tr.snapshots.push_back(s.r());
  };
  PatchState s = s0;
  record(s, 0);
  const long n = cfg.steps();
  for (long i = 1; i <= n; ++i) {
    try {
      s = step(s, cfg.dt, cfg.dealias);
    } catch (const invariant_violation& e) {
      tr.status = e.what();
      return tr;
    }
    if (i % cfg.record_stride == 0) record(s, i);
  }
  return tr;
}

PatchState quasi_periodic_seed(double b, const std::map<int, double>& amplitudes, int M) {
  double total = 0.0;
  for (const auto& [j, a] : amplitudes) {
    if (j <= 0 || 2 * j >= M) throw invalid_argument("quasi_periodic_seed: site outside 1..M/2-1");
    total += std::abs(a);
  }
  if (!(total < PatchState::admissible_sup(b)))
    throw invalid_argument("quasi_periodic_seed: amplitudes exceed the admissibility margin");
  auto r = PeriodicField::sample(M, [&](double th) {
    double v = 0.0;
    for (const auto& [j, a] : amplitudes) v += a * std::cos(j * th);
    return v;
  });
  return {b, r};
}

double extract_frequency(const std::vector<double>& times, const std::vector<cplx>& signal) {
  const std::size_t N = signal.size();
  if (N < 64 || times.size() != N) throw invalid_argument("extract_frequency: need >= 64 samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(N - 1);
  if (!(dt > 0.0)) throw invalid_argument("extract_frequency: times must increase");
  const double tmid = 0.5 * (times.front() + times.back());
  std::vector<cplx> xw(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double sn = std::sin(kPi * static_cast<double>(n) / static_cast<double>(N - 1));
    xw[n] = sn * sn * signal[n];
  }

  int P = 1;
  while (static_cast<std::size_t>(P) < 4 * N) P *= 2;
  std::vector<cplx> pad(static_cast<std::size_t>(P), cplx(0.0, 0.0));
  std::copy(xw.begin(), xw.end(), pad.begin());
  const auto X = fft::inverse({P}, pad);  // sum x_n e^{+2 pi i k n / P}
  std::vector<double> mag(static_cast<std::size_t>(P));
  for (int k = 0; k < P; ++k) mag[static_cast<std::size_t>(k)] = std::abs(X[static_cast<std::size_t>(k)]);
  const int kp = static_cast<int>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + P / 2, sorted.end());
  const double floor = sorted[static_cast<std::size_t>(P / 2)];
  if (!(mag[static_cast<std::size_t>(kp)] > 0.0) || mag[static_cast<std::size_t>(kp)] < 10.0 * floor)
    throw no_frequency("extract_frequency: no spectral peak above the noise floor");

  const double la = std::log(mag[static_cast<std::size_t>((kp + P - 1) % P)]);
  const double lb = std::log(mag[static_cast<std::size_t>(kp)]);
  const double lc = std::log(mag[static_cast<std::size_t>((kp + 1) % P)]);
  const double curv = la - 2.0 * lb + lc;
  const double delta = curv < 0.0 ? 0.5 * (la - lc) / curv : 0.0;
  const double kk = fft::wavenumber(kp, P) + delta;
  const double bin = 2.0 * kPi / (P * dt);
  const double omega0 = kk * bin;

  // d|S|^2/d omega / 2 with S(omega) = sum xw_n e^{i omega (t_n - tmid)}.
  auto slope = [&](double om) {
    cplx S(0.0, 0.0), dS(0.0, 0.0);
    for (std::size_t n = 0; n < N; ++n) {
      const double t = times[n] - tmid;
      const cplx e = xw[n] * std::polar(1.0, om * t);
      S += e;
      dS += cplx(0.0, t) * e;
    }
    return (std::conj(S) * dS).real();
  };
  double h = bin;
  for (int tries = 0; tries < 6; ++tries, h *= 1.5) {
    const double lo = omega0 - h, hi = omega0 + h;
    const double glo = slope(lo), ghi = slope(hi);
    if (glo > 0.0 && ghi < 0.0) {
      std::uintmax_t iters = 200;
      auto res = boost::math::tools::toms748_solve(slope, lo, hi, glo, ghi,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
      return 0.5 * (res.first + res.second);
    }
  }
  return omega0;
}

double extract_frequencies(const Trajectory& traj, int mode) {
  auto it = std::find(traj.modes.begin(), traj.modes.end(), mode);
  if (it == traj.modes.end()) throw invalid_argument("extract_frequencies: mode was not recorded");
  const auto col = static_cast<std::size_t>(it - traj.modes.begin());
  std::vector<cplx> x;
  x.reserve(traj.mode_values.size());
  for (const auto& row : traj.mode_values) x.push_back(row[col]);
  return extract_frequency(traj.times, x);
}

}  // namespace vpatch
