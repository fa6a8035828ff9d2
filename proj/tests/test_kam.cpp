#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vpatch/errors.hpp"
#include "vpatch/frequencies.hpp"
#include "vpatch/kam.hpp"

using namespace vpatch;

TEST_CASE("smooth cutoff") {
  CHECK(smooth_cutoff(0.0) == 0.0);
  CHECK(smooth_cutoff(0.2) == 0.0);
  CHECK(smooth_cutoff(0.7) == 1.0);
  CHECK(smooth_cutoff(-0.7) == 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = 0.3 + 0.25 * i / 200.0;
    const double c = smooth_cutoff(x);
    CHECK(c >= prev);
    CHECK(c == smooth_cutoff(-x));
    prev = c;
  }
}

TEST_CASE("change of variables") {
  // beta_hat carries phi harmonics of every order; 64 x 128 resolves them to roundoff.
  auto beta = PeriodicField::sample({64, 128}, [](const std::vector<double>& ph, double t) {
    return 0.2 * std::sin(t) + 0.05 * std::sin(ph[0] + 2 * t);
  });
  auto c = ChangeOfVariables::from_beta(beta);
  CHECK(c.lipschitz() < 1.0);
  CHECK(c.inversion_defect() < 1e-12);
  CHECK(c.oddness_defect() < 1e-14);

  auto rho = PeriodicField::sample({64, 128}, [](const std::vector<double>& ph, double t) {
    return std::cos(t) + 0.3 * std::cos(ph[0] - t);
  });
  for (bool w : {false, true}) {
    auto back = compose_inverse(c, compose_with(c, rho, w), w);
    CHECK((back - rho).sup_norm() < 1e-12);
  }
  auto id = ChangeOfVariables::identity({64, 128});
  CHECK((compose_with(id, rho, true) - rho).sup_norm() < 1e-14);

  auto steep = PeriodicField::sample({4, 32}, [](const std::vector<double>&, double t) { return 0.6 * std::sin(2 * t); });
  CHECK_THROWS_AS(ChangeOfVariables::from_beta(steep), invariant_violation);
}

TEST_CASE("transport straightening with a theta-only coefficient") {
  TransportProblem p;
  p.omega = {std::numbers::phi};
  const double a = 0.1;
  p.f0 = PeriodicField::sample({64, 64}, [=](const std::vector<double>&, double t) { return a * std::cos(t); });
  auto r = straighten_transport(p, 7);
  // The rotation number of d_theta/dt = 1/2 + a cos(theta) is sqrt(1/4 - a^2).
  CHECK(std::abs(r.V_inf - std::sqrt(0.25 - a * a)) < 1e-12);
  CHECK(r.superlinear_slope > 1.0);
  CHECK(r.reducible);
  CHECK(r.change.oddness_defect() < 1e-13);
  // The last record is the final state, after the last step.
  for (std::size_t m = 1; m + 1 < r.history.size(); ++m) CHECK(r.history[m].N >= r.history[m - 1].N);
}

TEST_CASE("transport straightening with phi dependence") {
  TransportProblem q;
  q.omega = {std::numbers::phi};
  q.f0 = PeriodicField::sample({32, 64}, [](const std::vector<double>& ph, double t) {
    return 1e-3 * (std::cos(t) + std::cos(ph[0] - t) + 0.5 * std::cos(ph[0] + 2 * t));
  });
  auto r = straighten_transport(q, 4);
  CHECK(r.history.back().delta_sup < 1e-10);
  CHECK(r.superlinear_slope > 1.0);

  TransportProblem bad = q;
  bad.f0 = bad.f0 * 200.0;
  CHECK_THROWS_AS(straighten_transport(bad, 2), invalid_argument);
}

TEST_CASE("synthetic remainder") {
  auto R = synthetic_remainder(1, 8, 10, 2, 3, 1e-3, 1.0, 5);
  auto R2 = synthetic_remainder(1, 8, 10, 2, 3, 1e-3, 1.0, 5);
  auto R3 = synthetic_remainder(1, 8, 10, 2, 3, 1e-3, 1.0, 6);
  CHECK((R - R2).max_abs() == 0.0);
  CHECK((R - R3).max_abs() > 0.0);
  CHECK(R.offdiag_norm(1.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(R.realness_defect() < 1e-18);
  CHECK(R.reversibility_defect() < 1e-18);
}

TEST_CASE("remainder reduction") {
  auto st = ReductionState::around(0.5, synthetic_remainder(1, 12, 16, 2, 4, 1e-3, 1.0, 42));
  CHECK(st.frequency(2) == doctest::Approx(omega(0.5, 2)));
  CHECK(st.structure_defect() < 1e-15);
  RemainderSpec sp;
  sp.omega = {std::numbers::phi};
  auto run = reduce_remainder(st, sp, 3);
  REQUIRE(run.delta_s0.size() == 4);
  for (std::size_t m = 1; m < run.delta_s0.size(); ++m) CHECK(run.delta_s0[m] < run.delta_s0[m - 1]);
  CHECK(run.slope > 1.0);
  CHECK(run.sup_j_r <= 10 * 1e-3);
  CHECK(run.max_structure_defect < 1e-12);
  for (double c : run.conjugation_defects) CHECK(c < 1e-12);

  RemainderSpec wrong = sp;
  wrong.tau2 = 0.5;
  CHECK_THROWS_AS(reduce_remainder(st, wrong, 1), invalid_argument);
}

TEST_CASE("superlinear slope") {
  CHECK(superlinear_slope({1e-2, 1e-4, 1e-8}, 0.0) == doctest::Approx(2.0));
  CHECK(superlinear_slope({1e-2, 1e-3, 1e-20}, 1e-13) == doctest::Approx(1.5));
}
