#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "vpatch/dynamics.hpp"
#include "vpatch/errors.hpp"
#include "vpatch/frequencies.hpp"
#include "vpatch/geometry.hpp"

using namespace vpatch;

namespace {

PeriodicField profile(int M, const std::map<int, double>& a) {
  return PeriodicField::sample(M, [&](double t) {
    double v = 0.0;
    for (const auto& [j, c] : a) v += c * std::cos(j * t);
    return v;
  });
}

}  // namespace

TEST_CASE("equilibrium is stationary") {
  for (double b : {0.25, 0.5, 0.75}) CHECK(velocity_functional(PatchState::disc(b, 64)).sup_norm() <= 1e-12);
}

TEST_CASE("velocity functional: parity and linearization") {
  const int M = 64;
  const double b = 0.5;
  auto s = PatchState(b, profile(M, {{2, 1e-2}, {3, -5e-3}}));
  auto F = velocity_functional(s);
  for (int i = 1; i < M; ++i) CHECK(std::abs(F.value(i) + F.value(M - i)) < 1e-14);

  // dF(0)[cos j] = -Omega_j sin j, so that d_t r = -F rotates mode j at Omega_j.
  for (int j : {1, 2, 5}) {
    const double eps = 1e-5;
    auto Fp = velocity_functional(PatchState(b, profile(M, {{j, eps}})));
    auto Fm = velocity_functional(PatchState(b, profile(M, {{j, -eps}})));
    auto want = PeriodicField::sample(M, [&](double t) { return -omega(b, j) * std::sin(j * t); });
    CHECK(((Fp - Fm) * (0.5 / eps) - want).sup_norm() < 1e-8);
  }
}

TEST_CASE("energy: disc value, reflection, quadratic form") {
  const int M = 64;
  for (double b : {0.3, 0.5, 0.8}) {
    // Planar self-energy of a disc of radius b with the normalized convention.
    const double E0 = std::pow(b, 4) * std::log(b) / 4.0 - std::pow(b, 4) / 16.0;
    CHECK(std::abs(energy(PatchState::disc(b, M)) - E0) < 1e-12);
    CHECK(hamiltonian(PatchState::disc(b, M)) == doctest::Approx(-0.5 * E0).epsilon(1e-12));
  }
  const double b = 0.5;
  auto r = PeriodicField::sample(M, [](double t) { return 1e-2 * std::cos(2 * t) + 4e-3 * std::sin(3 * t); });
  auto s = PatchState(b, r);
  CHECK(std::abs(energy(s) - energy(PatchState(b, reflect(r)))) < 1e-15);
  CHECK(std::abs(energy(s) - energy_polar(s, 96)) < 1e-4 * std::abs(energy(s)));

  // (H(eps rho) - H(0)) / eps^2 -> -sum Omega_j/(2j) |rho_j|^2 = -Omega_2/8 for rho = cos 2 theta.
  const double want = -omega(b, 2) / 8.0;
  std::vector<double> err;
  for (double e : {1e-2, 1e-3}) {
    const double q = (hamiltonian(PatchState(b, profile(M, {{2, e}}))) - hamiltonian(PatchState::disc(b, M))) / (e * e);
    err.push_back(std::abs(q - want));
  }
  CHECK(err[1] / std::abs(want) <= 1e-3);
  CHECK(err[1] < err[0]);
}

TEST_CASE("stream gradient") {
  const int M = 64;
  const double b = 0.5;
  auto r = profile(M, {{2, 1e-2}, {5, 2e-3}});
  auto s = PatchState(b, r);
  auto g = stream_gradient(s);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 5; ++k) {
    const double a = u(rng), c = u(rng), d = u(rng);
    auto rho = PeriodicField::sample(M, [=](double t) { return a * std::cos(t) + c * std::sin(2 * t) + d * std::cos(4 * t); });
    const double eps = 1e-5;
    const double fd = (energy(PatchState(b, r + rho * eps)) - energy(PatchState(b, r - rho * eps))) / (2 * eps);
    const double an = inner(g, rho);
    CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an) + 1e-12);
  }
  // F = (1/2) d_theta grad E.
  CHECK((velocity_functional(s) - derivative_theta(g) * 0.5).sup_norm() < 1e-8);
  auto g0 = stream_gradient(PatchState::disc(b, M));
  double spread = 0.0;
  for (double v : g0.values()) spread = std::max(spread, std::abs(v - g0.value(0)));
  CHECK(spread < 1e-13);
}

TEST_CASE("evolution: equilibrium, mean, reversibility") {
  EvolutionConfig c;
  c.M = 32;
  c.dt = 1e-2;
  c.T = 0.5;
  auto tr = simulate(PatchState::disc(0.5, 32), c);
  CHECK(tr.complete());
  for (double h : tr.hs_norms) CHECK(h <= 1e-14);

  const int M = 64;
  const double b = 0.5;
  auto s0 = PatchState(b, profile(M, {{2, 1e-3}}));
  EvolutionConfig c2;
  c2.M = M;
  c2.dt = 1e-2;
  c2.T = 1.0;
  auto tr2 = simulate(s0, c2);
  for (double m : tr2.means) CHECK(std::abs(m - tr2.means.front()) <= 1e-12);
  const double H0 = tr2.hamiltonians.front();
  for (double h : tr2.hamiltonians) CHECK(std::abs(h - H0) <= 1e-8 * std::abs(H0));

  // Even data: r(t, theta) = r(-t, -theta).
  PatchState fwd = s0, bwd = s0;
  for (int n = 0; n < 50; ++n) {
    fwd = step(fwd, 1e-2);
    bwd = step(bwd, -1e-2);
  }
  CHECK((fwd.r() - reflect(bwd.r())).sup_norm() <= 1e-8);
}

TEST_CASE("quasi-periodic seed and linear flow") {
  auto s = quasi_periodic_seed(0.5, {{2, 1e-3}}, 64);
  CHECK(std::abs(s.r().coeff(2).real() - 5e-4) < 1e-15);
  CHECK(std::abs(s.r().coeff(3)) < 1e-15);
  for (int i = 1; i < 64; ++i) CHECK(s.r().value(i) == doctest::Approx(s.r().value(64 - i)));
  CHECK_THROWS_AS(quasi_periodic_seed(0.5, {{2, 0.2}}, 64), invalid_argument);
  CHECK_THROWS_AS(quasi_periodic_seed(0.5, {{40, 1e-3}}, 64), invalid_argument);
}

TEST_CASE("frequency extraction") {
  const double Om = 0.53125, dt = 0.05;
  std::vector<double> t;
  std::vector<cplx> x;
  for (int n = 0; n <= 4000; ++n) {
    t.push_back(n * dt);
    x.push_back(std::polar(1.0, -Om * n * dt));
  }
  const double T = t.back();
  CHECK(std::abs(extract_frequency(t, x) - Om) < 2 * std::numbers::pi / (T * 1e3));
  std::vector<cplx> zero(x.size(), cplx(0.0, 0.0));
  CHECK_THROWS_AS(extract_frequency(t, zero), no_frequency);

  // Small-amplitude run: mode 2 rotates at Omega_2(0.5).
  EvolutionConfig c;
  c.M = 32;
  c.dt = 0.05;
  c.T = 150;
  c.modes = {2};
  c.record_hamiltonian = false;
  auto tr = simulate(quasi_periodic_seed(0.5, {{2, 1e-6}}, 32), c);
  CHECK(extract_frequencies(tr, 2) == doctest::Approx(omega(0.5, 2)).epsilon(1e-6));
}
