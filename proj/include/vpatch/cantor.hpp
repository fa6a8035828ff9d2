#pragma once

// Resonance sets {b : |f(b)| <= alpha} for the polynomial frequency curves,
// their exact measure as interval lists, and the Russmann sublevel bound.

#include <map>
#include <string>
#include <vector>

#include "vpatch/frequencies.hpp"

namespace vpatch {

struct Interval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
};

// Sorted, disjoint, closed intervals.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> iv);  // sorts and merges

  void insert(const IntervalSet& o);
  double measure() const;
  bool contains(const IntervalSet& inner, double tol = 0.0) const;
  const std::vector<Interval>& intervals() const { return iv_; }
  bool empty() const { return iv_.empty(); }

 private:
  std::vector<Interval> iv_;
};

struct SublevelResult {
  IntervalSet set;
  double measure = 0.0;
  int flagged = 0;  // cells where root isolation could not be certified
};

// {x in [lo,hi] : |f(x)| <= alpha}: roots of f -+ alpha isolated on a 2^14
// grid (cells subdivided until a derivative bound excludes hidden roots),
// then bisected to 1e-12.
SublevelResult sublevel_set(const SparsePoly& f, double alpha, double lo, double hi);
double sublevel_measure(const SparsePoly& f, double alpha, double lo, double hi);

// C alpha^{1/q0} / beta^{1+1/q0} with
//   C = max(2^{1+1/q0} q0 (2 (b-a) L + beta), 2^{1/q0} (b-a) beta),
//   L = max_{1<=k<=q0+1} sup_{[a,b]} |f^(k)|.
// Cells of length beta/(2L) each carry a derivative of order k <= q0 with
// |f^(k)| >= beta/2, whose sublevel set has measure <= 2k (2 alpha/beta)^{1/k}.
double russmann_constant(const SparsePoly& f, int q0, double beta, double a, double b);
double russmann_bound(const SparsePoly& f, double alpha, int q0, double beta, double a, double b);

enum class ResonanceKind { transport, second_order, first_order };
ResonanceKind parse_kind(const std::string& s);
std::string to_string(ResonanceKind k);

struct DiophantineSpec {
  double gamma = 1e-3;
  double upsilon = 1.0;
  double tau = 3.0;  // tau1 for transport / first order, tau2 for second order
  int Lmax = 20;
  int Jmax = 400;  // hard cap on |j|, |j0|
  ResonanceKind kind = ResonanceKind::first_order;
  double prefactor = 1.0;  // multiplies the threshold
  double C0 = 0.0;         // cutoff |j| <= C0 <l>; 0 selects the derived value
  double c2 = 1.0;         // cutoff min(|j|,|j0|) <= c2 gamma^{-upsilon} <l>^{tau1}
  double tau1 = 3.0;       // exponent in the c2 cutoff
  // Constant offsets added to omega_eq.l and to the j/2 speed (perturbed variants).
  std::vector<double> delta;
  double delta_speed = 0.0;
  int jobs = 1;

  void validate(const FrequencySystem& sys) const;
  // <l, j>-type threshold for the given index.
  double threshold(int lnorm, int j, int j0) const;
};

struct Contribution {
  std::vector<int> l;
  int j = 0;
  int j0 = 0;
  bool has_j0 = false;
  double alpha = 0.0;
  double measure = 0.0;
  IntervalSet set;
  // Closes a difference family: covers every j0' >= j0 through the limit
  // omega.l + (j - j0)/2 at a slightly enlarged alpha.
  bool tail = false;
};

struct MeasureReport {
  double total = 0.0;  // measure of the union of all resonance sets
  IntervalSet excluded;
  std::vector<Contribution> contributions;  // nonzero ones, canonical order
  long functions = 0;                       // index tuples examined
  int flagged = 0;
  double C0_used = 0.0;
  bool truncated = false;  // Jmax or the c2 cutoff was hit before the family collapsed
};

MeasureReport excluded_measure(const FrequencySystem& sys, const DiophantineSpec& spec);
double linear_cantor_measure(const FrequencySystem& sys, double gamma, double tau, int Lmax = 20);

// omega.l (+ offsets) + n/2: the j0 -> infinity limit of the difference family.
SparsePoly family_limit(const FrequencySystem& sys, const DiophantineSpec& spec, const std::vector<int>& l, int n);

// Resonance function of a contribution, as a polynomial in b.
SparsePoly resonance_function(const FrequencySystem& sys, const DiophantineSpec& spec, const std::vector<int>& l,
                              int j, int j0);

struct GammaStudy {
  std::vector<double> gammas;
  std::vector<double> excluded;
  double exponent = 0.0;     // least-squares slope of log excluded vs log gamma
  double prefactor = 0.0;    // exp(intercept)
  bool strictly_decreasing = false;
  bool nested = false;       // excluded set at smaller gamma inside the larger one
};
GammaStudy gamma_study(const FrequencySystem& sys, DiophantineSpec spec, const std::vector<double>& gammas);

struct RussmannCheck {
  long checked = 0;
  long violations = 0;
  double worst_ratio = 0.0;  // max measured / bound
  std::map<int, double> shell_bound;  // <l> -> sum of bounds over the shell
  // Tail over |l| > Lmax: shell sums extrapolated as K n^p with p = d - tau/q0;
  // infinite when p >= -1.
  double tail_exponent = 0.0;
  double tail_bound = 0.0;
};
// Each contribution against its Russmann bound with beta = rho0_hat <l>.
RussmannCheck check_russmann(const FrequencySystem& sys, const DiophantineSpec& spec, const MeasureReport& rep,
                             double rho0_hat);

// gamma_n = gamma (1 + 2^{-n}).
double gamma_schedule(double gamma, int n);

}  // namespace vpatch
