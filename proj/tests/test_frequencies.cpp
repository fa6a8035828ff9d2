#include <doctest.h>

#include <cmath>

#include "vpatch/errors.hpp"
#include "vpatch/frequencies.hpp"

using namespace vpatch;

TEST_CASE("equilibrium frequencies") {
  CHECK(omega(0.5, 1) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(omega(0.5, 2) == doctest::Approx(0.53125).epsilon(1e-15));
  CHECK(omega(0.5, -3) == doctest::Approx(-omega(0.5, 3)).epsilon(1e-15));
  for (int j : {1, 2, 6})
    for (int q : {1, 2, 3}) {
      const double h = q == 3 ? 5e-4 : 1e-4;
      double fd = 0.0;
      if (q == 1) fd = (omega(0.6 + h, j) - omega(0.6 - h, j)) / (2 * h);
      if (q == 2) fd = (omega(0.6 + h, j) - 2 * omega(0.6, j) + omega(0.6 - h, j)) / (h * h);
      if (q == 3)
        fd = (omega(0.6 + 2 * h, j) - 2 * omega(0.6 + h, j) + 2 * omega(0.6 - h, j) - omega(0.6 - 2 * h, j)) /
             (2 * h * h * h);
      CHECK(std::abs(fd - omega_derivative(0.6, j, q)) <= (q == 3 ? 1e-4 : 1e-5) * (1 + std::abs(fd)));
    }
  auto p = omega_poly(4);
  CHECK(p.eval(0.7) == doctest::Approx(omega(0.7, 4)).epsilon(1e-15));
  CHECK(p.eval(0.7, 2) == doctest::Approx(omega_derivative(0.7, 4, 2)).epsilon(1e-15));
  CHECK(falling_factorial(8, 3) == 336.0);
}

TEST_CASE("sparse polynomial bounds") {
  SparsePoly f(-0.3);
  f.add_term(2, 1.0);
  f.add_term(5, -0.5);
  double sup = 0.0, inf = 1e9;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 0.2 + 0.6 * i / 1000.0;
    sup = std::max(sup, std::abs(f.eval(x, 1)));
    inf = std::min(inf, std::abs(f.eval(x)));
  }
  CHECK(f.sup_bound(0.2, 0.8, 1) >= sup);
  CHECK(f.inf_abs_bound(0.2, 0.8) <= inf);
  CHECK(f.degree() == 5);
}

TEST_CASE("monotonicity and lower bounds") {
  for (double b : {0.1, 0.5, 0.9}) {
    auto m = check_monotonicity(b, 200);
    CHECK(m.increasing);
    CHECK(m.min_gap > 0.0);
  }
  CHECK(lower_bound_ratio(0.1, 0.9, 100, 500) >= 1.0);
  CHECK(sum_difference_ratio(0.1, 0.9, 40, 200) >= 1.0);
}

TEST_CASE("non-degeneracy") {
  CHECK(nondegeneracy_test(FrequencySystem{{1, 2}}));
  CHECK(nondegeneracy_test(FrequencySystem{{1, 3, 4}}));
  // 1 + x and 2 + 2x are dependent.
  CHECK_FALSE(nondegeneracy_test(std::vector<std::vector<long long>>{{1, 1}, {2, 2}}));
  CHECK(nondegeneracy_test(std::vector<std::vector<long long>>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  CHECK_THROWS_AS(FrequencySystem({2, 1}).validate(), invalid_argument);
}

TEST_CASE("transversality scan") {
  FrequencySystem sys{{1, 2}};
  ScanOptions opt;
  opt.Lmax = 4;
  opt.grid = 1000;
  auto rep = transversality_scan(sys, opt);
  CHECK(rep.rho0_hat > 0.0);
  for (const auto& c : rep.cases) CHECK(c.rho0_hat >= rep.rho0_hat);

  auto pert = perturbed_transversality(sys, opt, 1e-4);
  CHECK(pert.rho0_hat > 0.0);
  CHECK(pert.rho0_hat <= rep.rho0_hat);
  CHECK(pert.rho0_hat >= rep.rho0_hat - 1e-3);

  // Equal frequencies are degenerate: omega.(1,-1) vanishes identically.
  ScanOptions bad = opt;
  bad.synthetic_omega = {omega_poly(2), omega_poly(2)};
  CHECK(transversality_scan(sys, bad).cases[0].rho0_hat < 1e-12);
}
