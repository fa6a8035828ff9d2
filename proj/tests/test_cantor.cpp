#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "vpatch/cantor.hpp"
#include "vpatch/errors.hpp"

using namespace vpatch;

namespace {

bool is_zero(const std::vector<int>& l) {
  for (int x : l)
    if (x != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("interval sets") {
  IntervalSet s({{0.5, 0.7}, {0.1, 0.2}, {0.15, 0.3}});
  REQUIRE(s.intervals().size() == 2);
  CHECK(s.intervals()[0].lo == 0.1);
  CHECK(s.intervals()[0].hi == 0.3);
  CHECK(s.measure() == doctest::Approx(0.4));
  CHECK(s.contains(IntervalSet({{0.12, 0.2}, {0.6, 0.7}})));
  CHECK_FALSE(s.contains(IntervalSet({{0.25, 0.55}})));
  CHECK_THROWS_AS(IntervalSet({{0.3, 0.1}}), invalid_argument);
}

TEST_CASE("sublevel sets") {
  SparsePoly f(-0.25);
  f.add_term(2, 1.0);
  auto r = sublevel_set(f, 0.01, 0.0, 1.0);
  CHECK(r.flagged == 0);
  REQUIRE(r.set.intervals().size() == 1);
  CHECK(std::abs(r.measure - (std::sqrt(0.26) - std::sqrt(0.24))) < 1e-11);

  FrequencySystem sys{{1, 2}};
  DiophantineSpec spec;
  for (auto l : std::vector<std::vector<int>>{{1, -1}, {3, -2}, {-2, 1}}) {
    const SparsePoly g = resonance_function(sys, spec, l, 3, 0);
    const double alpha = 0.02;
    const double grid = oracle::grid_measure([&](double b) { return g.eval(b); }, alpha, 0.1, 0.9, 2000000);
    CHECK(std::abs(sublevel_measure(g, alpha, 0.1, 0.9) - grid) < 1e-5);
  }
  CHECK_THROWS_AS(sublevel_set(f, -1.0, 0.0, 1.0), invalid_argument);
}

TEST_CASE("Russmann bound dominates measured sublevel sets") {
  FrequencySystem sys{{1, 2}};
  for (auto l : std::vector<std::vector<int>>{{1, 1}, {2, -1}, {4, -3}}) {
    const SparsePoly g = sys.omega_dot(l);
    for (double alpha : {1e-2, 1e-4}) {
      const double bound = russmann_bound(g, alpha, sys.q0(), 0.5, 0.1, 0.9);
      CHECK(sublevel_measure(g, alpha, 0.1, 0.9) <= bound);
    }
  }
  CHECK_THROWS_AS(russmann_bound(sys.omega_dot({1, 0}), 1e-3, 6, 0.0, 0.1, 0.9), invalid_argument);
}

TEST_CASE("transport resonances for a single site") {
  FrequencySystem sys{{1}};
  DiophantineSpec spec;
  spec.kind = ResonanceKind::transport;
  spec.tau = 2.0;
  spec.tau1 = 2.0;
  spec.gamma = 1e-3;
  auto rep = excluded_measure(sys, spec);
  CHECK(rep.total > 0.0);
  CHECK(rep.total < 0.01 * (sys.b1 - sys.b0));
  CHECK(rep.flagged == 0);
  for (const auto& c : rep.contributions) CHECK_FALSE((is_zero(c.l) && c.j == 0));
  CHECK(rep.excluded.measure() == doctest::Approx(rep.total));
}

TEST_CASE("first-order gamma study") {
  FrequencySystem sys{{1, 2}};
  DiophantineSpec spec;
  spec.kind = ResonanceKind::first_order;
  spec.Lmax = 10;
  auto st = gamma_study(sys, spec, {1e-2, 1e-3, 1e-4});
  CHECK(st.strictly_decreasing);
  CHECK(st.nested);
  CHECK(st.exponent > 0.0);
  for (std::size_t i = 0; i + 1 < st.excluded.size(); ++i) CHECK(st.excluded[i + 1] < st.excluded[i]);
}

TEST_CASE("second-order resonances and Russmann check") {
  FrequencySystem sys{{1, 2}};
  DiophantineSpec spec;
  spec.kind = ResonanceKind::second_order;
  spec.Lmax = 4;
  spec.tau = 3.0;
  auto rep = excluded_measure(sys, spec);
  CHECK(rep.total > 0.0);
  CHECK(rep.total < sys.b1 - sys.b0);
  for (const auto& c : rep.contributions) CHECK_FALSE((is_zero(c.l) && c.has_j0 && c.j == c.j0));
  auto chk = check_russmann(sys, spec, rep, 0.5);
  CHECK(chk.checked > 0);
  CHECK(chk.violations == 0);

  auto again = excluded_measure(sys, spec);
  CHECK(again.total == rep.total);
  CHECK(again.contributions.size() == rep.contributions.size());

  DiophantineSpec first = spec;
  first.kind = ResonanceKind::first_order;
  auto f = excluded_measure(sys, first);
  CHECK(check_russmann(sys, first, f, 0.5).violations == 0);
}

TEST_CASE("gamma schedule and kinds") {
  CHECK(gamma_schedule(1e-3, 0) == doctest::Approx(2e-3));
  CHECK(gamma_schedule(1e-3, 3) == doctest::Approx(1.125e-3));
  CHECK(parse_kind("second-order") == ResonanceKind::second_order);
  CHECK(to_string(ResonanceKind::transport) == "transport");
  CHECK_THROWS_AS(parse_kind("zeroth"), invalid_argument);
}
