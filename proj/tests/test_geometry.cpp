#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "vpatch/errors.hpp"
#include "vpatch/geometry.hpp"

using namespace vpatch;

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicField even_profile(int M, double a2, double a3 = 0.0) {
  return PeriodicField::sample(M, [=](double t) { return a2 * std::cos(2 * t) + a3 * std::cos(3 * t); });
}

double node(int i, int M) { return 2.0 * kPi * i / M; }

double direct_A(double b, double r_i, double th, double r_k, double et) {
  const double Ri = std::sqrt(b * b + 2 * r_i), Rk = std::sqrt(b * b + 2 * r_k);
  return std::abs(std::polar(Ri, th) - std::polar(Rk, et));
}

double direct_B(double b, double r_i, double th, double r_k, double et) {
  const double Ri = std::sqrt(b * b + 2 * r_i), Rk = std::sqrt(b * b + 2 * r_k);
  return std::abs(1.0 - Ri * Rk * std::exp(std::complex<double>(0.0, et - th)));
}

}  // namespace

TEST_CASE("patch state invariants") {
  CHECK_THROWS_AS(PatchState(1.2, even_profile(32, 0.0)), invalid_argument);
  CHECK_THROWS_AS(PatchState(0.5, even_profile(32, 0.2)), degenerate_patch);
  auto s = PatchState(0.5, even_profile(32, 1e-2));
  for (int i = 0; i < 32; ++i) CHECK(s.R(i) > 0.0);
  auto big = PatchState(0.9, even_profile(32, 0.3));
  CHECK_THROWS_AS(kernel_B(big), boundary_contact);
}

TEST_CASE("kernel A") {
  const int M = 32;
  const double b = 0.5;
  auto A0 = kernel_A(PatchState::disc(b, M));
  for (int i = 0; i < M; i += 3)
    for (int k = 0; k < M; k += 5)
      CHECK(std::abs(A0.at(i, k) - 2 * b * std::abs(std::sin(0.5 * (node(k, M) - node(i, M))))) < 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e-2, 1e-2);
  const double c1 = u(rng), c2 = u(rng);
  auto rnd = PeriodicField::sample(M, [=](double t) { return c1 * std::cos(t) + c2 * std::sin(3 * t); });
  auto Ar = kernel_A(PatchState(b, rnd));
  CHECK(Ar.max_asymmetry() < 1e-15);

  auto r = even_profile(M, 1e-3);
  auto A = kernel_A(PatchState(b, r));
  for (int i = 0; i < M; i += 7)
    for (int k = 1; k < M; k += 3) {
      const double want = direct_A(b, r.value(i), node(i, M), r.value(k), node(k, M));
      CHECK(std::abs(A.at(i, k) - want) < 1e-14);
    }
}

TEST_CASE("smooth factor v1") {
  const int M = 64;
  const double b = 0.5;
  auto v0 = smooth_factor_v1(PatchState::disc(b, M));
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; k += 9) CHECK(std::abs(v0.at(i, k) - 1.0) < 1e-14);

  auto r = even_profile(M, 1e-2, 4e-3);
  auto s = PatchState(b, r);
  auto A = kernel_A(s);
  auto v = smooth_factor_v1(s);
  for (int i = 0; i < M; i += 5)
    for (int k = 0; k < M; ++k) {
      if (k == i) continue;
      const double q = A.at(i, k) / (2 * b * std::abs(std::sin(0.5 * (node(k, M) - node(i, M)))));
      CHECK(std::abs(q - v.at(i, k)) < 1e-12);
    }

  // Diagonal against the eta -> theta limit by Richardson extrapolation of the defining quotient.
  const double a2 = 1e-2, a3 = 4e-3;
  auto rf = [=](double t) { return a2 * std::cos(2 * t) + a3 * std::cos(3 * t); };
  for (int i : {0, 5, 17}) {
    const double th = node(i, M);
    auto one_sided = [&](double h) {
      return direct_A(b, rf(th), th, rf(th + h), th + h) / (2 * b * std::abs(std::sin(0.5 * h)));
    };
    // Averaging both sides leaves an even expansion in h.
    auto quotient = [&](double h) { return 0.5 * (one_sided(h) + one_sided(-h)); };
    const double h = 1e-3;
    const double lim = (4 * quotient(h / 2) - quotient(h)) / 3;
    CHECK(std::abs(v.at(i, i) - lim) < 1e-8);
  }
}

TEST_CASE("diagonal difference quotient") {
  const int M = 32;
  auto g = diagonal_difference_quotient(PeriodicField::sample(M, [](double t) { return std::cos(t); }));
  for (int i = 0; i < M; ++i) CHECK(std::abs(g.at(i, i) + 2 * std::sin(node(i, M))) < 1e-13);
  auto z = diagonal_difference_quotient(PeriodicField::sample(M, [](double) { return 3.0; }));
  for (int i = 0; i < M; i += 3)
    for (int k = 0; k < M; k += 2) CHECK(std::abs(z.at(i, k)) < 1e-13);
  auto s3 = diagonal_difference_quotient(PeriodicField::sample(M, [](double t) { return std::sin(3 * t); }));
  CHECK(s3.at(0, M / 4) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("kernel B and P") {
  const int M = 32;
  const double b = 0.5;
  auto B0 = kernel_B(PatchState::disc(b, M));
  for (int i = 0; i < M; i += 3)
    for (int k = 0; k < M; k += 4)
      CHECK(std::abs(B0.at(i, k) - direct_B(b, 0, node(i, M), 0, node(k, M))) < 1e-15);
  auto P0 = kernel_P(PatchState::disc(b, M));
  for (double x : P0.values) CHECK(std::abs(x) < 1e-15);

  auto r = even_profile(M, 1e-3);
  auto s = PatchState(b, r);
  auto B = kernel_B(s);
  auto P = kernel_P(s);
  double Rmax = s.max_R(), minB = 1e9;
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) {
      minB = std::min(minB, B.at(i, k));
      CHECK(std::abs(B.at(i, k) - direct_B(b, r.value(i), node(i, M), r.value(k), node(k, M))) < 1e-14);
      CHECK(std::abs(B.at(i, k) * B.at(i, k) - B0.at(i, k) * B0.at(i, k) * (1 + P.at(i, k))) < 1e-13);
    }
  CHECK(minB >= 1 - Rmax * Rmax);

  // |P_r| <= C |r|: the ratio is stable over three decades.
  std::vector<double> ratios;
  for (double e : {1e-2, 1e-3, 1e-4}) {
    auto Pe = kernel_P(PatchState(b, even_profile(M, e)));
    double m = 0.0;
    for (double x : Pe.values) m = std::max(m, std::abs(x));
    ratios.push_back(m / e);
  }
  CHECK(ratios[0] / ratios[2] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("kernel decompositions and reversibility") {
  const int M = 64;
  const double b = 0.6;
  auto r = even_profile(M, 2e-2, -1e-2);
  auto s = PatchState(b, r);
  auto A = kernel_A(s), v = smooth_factor_v1(s), B = kernel_B(s), P = kernel_P(s);
  auto B0 = kernel_B(PatchState::disc(b, M));
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) {
      const int mi = (M - i) % M, mk = (M - k) % M;
      CHECK(std::abs(A.at(mi, mk) - A.at(i, k)) < 1e-14);
      CHECK(std::abs(B.at(mi, mk) - B.at(i, k)) < 1e-14);
      CHECK(std::abs(std::log(B.at(i, k)) - std::log(B0.at(i, k)) - 0.5 * std::log1p(P.at(i, k))) < 1e-12);
      if (i == k) continue;
      const double sn = std::sin(0.5 * (node(k, M) - node(i, M)));
      CHECK(std::abs(std::log(A.at(i, k)) - std::log(2 * b) - 0.5 * std::log(sn * sn) - std::log(v.at(i, k))) < 1e-12);
    }
}

TEST_CASE("singular multiplier coefficients") {
  CHECK(k1_coefficient(0) == doctest::Approx(-std::log(2.0)));
  CHECK(k1_coefficient(-4) == doctest::Approx(-0.125));
  CHECK(k2_coefficient(0.5, 2) == doctest::Approx(-0.0625 / 4));
  CHECK(k2_coefficient(0.5, 0) == 0.0);
}
