#include "vpatch/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "vpatch/errors.hpp"
#include "vpatch/spectral.hpp"

namespace vpatch {

IntervalSet::IntervalSet(std::vector<Interval> iv) {
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const Interval& x : iv) {
    if (x.hi < x.lo) throw invalid_argument("IntervalSet: reversed interval");
    if (!iv_.empty() && x.lo <= iv_.back().hi)
      iv_.back().hi = std::max(iv_.back().hi, x.hi);
    else
      iv_.push_back(x);
  }
}

void IntervalSet::insert(const IntervalSet& o) {
  if (o.iv_.empty()) return;
  std::vector<Interval> all = iv_;
  all.insert(all.end(), o.iv_.begin(), o.iv_.end());
  *this = IntervalSet(std::move(all));
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const Interval& x : iv_) m += x.length();
  return m;
}

bool IntervalSet::contains(const IntervalSet& inner, double tol) const {
  std::size_t k = 0;
  for (const Interval& x : inner.iv_) {
    while (k < iv_.size() && iv_[k].hi + tol < x.hi) ++k;
    if (k == iv_.size() || iv_[k].lo - tol > x.lo) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kGridLog2 = 14;
constexpr int kBlocks = 64;
constexpr double kRootTol = 1e-12;

// |f| > alpha everywhere on [lo,hi], certified by midpoint values and the
// local derivative bound.
bool above_on(const SparsePoly& f, double alpha, double lo, double hi, int depth = 0) {
  const double mid = 0.5 * (lo + hi);
  const double v = std::abs(f.eval(mid));
  if (v <= alpha) return false;
  const double lip = f.sup_bound(lo, hi, 1);
  if (v - lip * 0.5 * (hi - lo) > alpha) return true;
  if (depth > 40 || hi - lo < 1e-9) return false;
  return above_on(f, alpha, lo, mid, depth + 1) && above_on(f, alpha, mid, hi, depth + 1);
}

double bisect(const SparsePoly& f, double shift, double a, double b, double fa) {
  while (b - a > kRootTol) {
    const double m = 0.5 * (a + b);
    const double fm = f.eval(m) - shift;
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Roots of f - shift on [a,b], appended to roots.
void isolate(const SparsePoly& f, double shift, double a, double b, std::vector<double>& roots, int& flagged,
             int depth) {
  const double ga = f.eval(a) - shift, gb = f.eval(b) - shift;
  if (ga == 0.0) roots.push_back(a);
  if (gb == 0.0) roots.push_back(b);
  const double m = 0.5 * (a + b);
  const double gm = f.eval(m) - shift;
  const double lip = f.sup_bound(a, b, 1);
  if (std::abs(gm) > lip * 0.5 * (b - a)) return;  // monotone distance: no root
  if ((ga < 0.0) != (gb < 0.0) && ga != 0.0 && gb != 0.0) {
    // An odd number of roots; a single one when f' keeps its sign.
    const double dm = std::abs(f.eval(m, 1));
    if (dm > f.sup_bound(a, b, 2) * 0.5 * (b - a)) {
      roots.push_back(bisect(f, shift, a, b, ga));
      return;
    }
  }
  if (depth >= 30 || b - a < kRootTol) {
    ++flagged;
    if ((ga < 0.0) != (gb < 0.0)) roots.push_back(bisect(f, shift, a, b, ga));
    return;
  }
  isolate(f, shift, a, m, roots, flagged, depth + 1);
  isolate(f, shift, m, b, roots, flagged, depth + 1);
}

}  // namespace

SublevelResult sublevel_set(const SparsePoly& f, double alpha, double lo, double hi) {
  if (!(hi > lo)) throw invalid_argument("sublevel_set: empty interval");
  if (!(alpha >= 0.0)) throw invalid_argument("sublevel_set: alpha must be nonnegative");
  if (f.degree() > 4000) throw invalid_argument("sublevel_set: degree above 4000");
  SublevelResult res;
  const int cells = 1 << kGridLog2;
  const int per_block = cells / kBlocks;
  const double h = (hi - lo) / cells;
  std::vector<double> pts{lo, hi};
  for (int blk = 0; blk < kBlocks; ++blk) {
    const double a = lo + h * blk * per_block;
    const double b = blk + 1 == kBlocks ? hi : lo + h * (blk + 1) * per_block;
    if (above_on(f, alpha, a, b)) continue;
    for (int c = 0; c < per_block; ++c) {
      const double x0 = a + h * c;
      const double x1 = c + 1 == per_block ? b : a + h * (c + 1);
      isolate(f, alpha, x0, x1, pts, res.flagged, 0);
      isolate(f, -alpha, x0, x1, pts, res.flagged, 0);
    }
    pts.push_back(a);
    pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Interval> iv;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double m = 0.5 * (pts[k] + pts[k + 1]);
    if (std::abs(f.eval(m)) <= alpha) iv.push_back({pts[k], pts[k + 1]});
  }
  // Isolated touching points carry no measure and are dropped.
  res.set = IntervalSet(std::move(iv));
  res.measure = res.set.measure();
  return res;
}

double sublevel_measure(const SparsePoly& f, double alpha, double lo, double hi) {
  const SublevelResult r = sublevel_set(f, alpha, lo, hi);
  if (r.flagged > 0) throw invariant_violation("sublevel_measure: root isolation failed on some cells");
  return r.measure;
}

double russmann_constant(const SparsePoly& f, int q0, double beta, double a, double b) {
  if (!(beta > 0.0)) throw invalid_argument("russmann_bound: beta must be positive");
  if (q0 < 1) throw invalid_argument("russmann_bound: q0 must be >= 1");
  if (!(b > a)) throw invalid_argument("russmann_bound: empty interval");
  double L = 0.0;
  for (int k = 1; k <= q0 + 1; ++k) L = std::max(L, f.sup_bound(a, b, k));
  const double e = 1.0 / q0;
  return std::max(std::pow(2.0, 1.0 + e) * q0 * (2.0 * (b - a) * L + beta), std::pow(2.0, e) * (b - a) * beta);
}

double russmann_bound(const SparsePoly& f, double alpha, int q0, double beta, double a, double b) {
  const double C = russmann_constant(f, q0, beta, a, b);
  const double e = 1.0 / q0;
  return C * std::pow(alpha, e) / std::pow(beta, 1.0 + e);
}

// ---------------------------------------------------------------------------

ResonanceKind parse_kind(const std::string& s) {
  if (s == "transport") return ResonanceKind::transport;
  if (s == "second-order") return ResonanceKind::second_order;
  if (s == "first-order") return ResonanceKind::first_order;
  throw invalid_argument("unknown resonance kind: " + s);
}

std::string to_string(ResonanceKind k) {
  switch (k) {
    case ResonanceKind::transport: return "transport";
    case ResonanceKind::second_order: return "second-order";
    case ResonanceKind::first_order: return "first-order";
  }
  return "?";
}

void DiophantineSpec::validate(const FrequencySystem& sys) const {
  sys.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw invalid_argument("DiophantineSpec: gamma outside (0,1)");
  if (!(upsilon > 0.0 && upsilon <= 1.0)) throw invalid_argument("DiophantineSpec: upsilon outside (0,1]");
  if (!(tau > sys.d())) throw invalid_argument("DiophantineSpec: need tau > d");
  if (!(tau1 > sys.d())) throw invalid_argument("DiophantineSpec: need tau1 > d");
  if (Lmax < 0 || Jmax < 1) throw invalid_argument("DiophantineSpec: bad index caps");
  if (!(prefactor > 0.0)) throw invalid_argument("DiophantineSpec: prefactor must be positive");
  if (!(C0 >= 0.0) || !(c2 > 0.0)) throw invalid_argument("DiophantineSpec: cutoff constants must be positive");
  if (!delta.empty() && static_cast<int>(delta.size()) != sys.d())
    throw invalid_argument("DiophantineSpec: delta has wrong dimension");
  if (!(std::abs(delta_speed) < 0.25)) throw invalid_argument("DiophantineSpec: |delta_speed| must be < 1/4");
}

double DiophantineSpec::threshold(int lnorm, int j, int j0) const {
  const double bl = std::pow(std::max(1, lnorm), tau);
  switch (kind) {
    case ResonanceKind::transport: return prefactor * std::pow(gamma, upsilon) * std::max(1, std::abs(j)) / bl;
    case ResonanceKind::second_order: return prefactor * 2.0 * gamma * std::max(1, std::abs(j - j0)) / bl;
    case ResonanceKind::first_order: return prefactor * gamma * std::max(1, std::abs(j)) / bl;
  }
  return 0.0;
}

SparsePoly resonance_function(const FrequencySystem& sys, const DiophantineSpec& spec, const std::vector<int>& l,
                              int j, int j0) {
  SparsePoly f = sys.omega_dot(l);
  if (!spec.delta.empty())
    for (std::size_t k = 0; k < l.size(); ++k) f.add_constant(spec.delta[k] * l[k]);
  switch (spec.kind) {
    case ResonanceKind::transport:
      // -omega.l + j (1/2 + delta').
      f = f * -1.0;
      f.add_constant(j * (0.5 + spec.delta_speed));
      break;
    case ResonanceKind::second_order:
      f += omega_poly(j);
      f += omega_poly(j0) * -1.0;
      break;
    case ResonanceKind::first_order:
      f += omega_poly(j);
      break;
  }
  return f;
}

SparsePoly family_limit(const FrequencySystem& sys, const DiophantineSpec& spec, const std::vector<int>& l, int n) {
  SparsePoly g = sys.omega_dot(l);
  if (!spec.delta.empty())
    for (std::size_t k = 0; k < l.size(); ++k) g.add_constant(spec.delta[k] * l[k]);
  g.add_constant(0.5 * n);
  return g;
}

namespace {

constexpr double kTailFraction = 0.01;

struct FamilyContext {
  const FrequencySystem* sys;
  const DiophantineSpec* spec;
  std::vector<std::vector<int>> ls;
  double Comega;  // sup |omega_eq| plus the offsets
  double C0;
};

struct Partial {
  std::vector<Contribution> contributions;
  long functions = 0;
  int flagged = 0;
  bool truncated = false;
};

bool lex_positive(const std::vector<int>& l) {
  for (int x : l)
    if (x != 0) return x > 0;
  return false;
}

int next_nonsite(const FrequencySystem& sys, int j) {
  while (sys.is_site(j)) ++j;
  return j;
}

void measure_one(const FamilyContext& ctx, const std::vector<int>& l, int j, int j0, bool has_j0, Partial& out) {
  const DiophantineSpec& spec = *ctx.spec;
  const FrequencySystem& sys = *ctx.sys;
  ++out.functions;
  const SparsePoly f = resonance_function(sys, spec, l, j, j0);
  const double alpha = spec.threshold(l1_norm(l), j, j0);
  if (above_on(f, alpha, sys.b0, sys.b1)) return;
  SublevelResult r = sublevel_set(f, alpha, sys.b0, sys.b1);
  out.flagged += r.flagged;
  if (r.measure > 0.0) out.contributions.push_back(Contribution{l, j, j0, has_j0, alpha, r.measure, std::move(r.set)});
}

void measure_tail(const FamilyContext& ctx, const std::vector<int>& l, int n, int j0, Partial& out) {
  const DiophantineSpec& spec = *ctx.spec;
  const FrequencySystem& sys = *ctx.sys;
  ++out.functions;
  const SparsePoly g = family_limit(sys, spec, l, n);
  const double alpha = (1.0 + kTailFraction) * spec.threshold(l1_norm(l), n, 0);
  SublevelResult r = sublevel_set(g, alpha, sys.b0, sys.b1);
  out.flagged += r.flagged;
  if (r.measure > 0.0)
    out.contributions.push_back(Contribution{l, j0 + n, j0, true, alpha, r.measure, std::move(r.set), true});
}

void scan_family(const FamilyContext& ctx, const std::vector<std::size_t>& indices, std::vector<Partial>& parts) {
  const DiophantineSpec& spec = *ctx.spec;
  const FrequencySystem& sys = *ctx.sys;
  const double b1 = sys.b1;
  for (std::size_t idx : indices) {
    const auto& l = ctx.ls[idx];
    const int L = l1_norm(l);
    const int br = std::max(1, L);
    Partial& out = parts[idx];
    const double cap_real = ctx.C0 * br;
    int cap = static_cast<int>(std::min<double>(cap_real, spec.Jmax));
    if (cap_real > spec.Jmax) out.truncated = true;

    switch (spec.kind) {
      case ResonanceKind::transport:
        if (L > 0 && lex_positive(l)) measure_one(ctx, l, 0, 0, false, out);
        for (int j = 1; j <= cap; ++j) measure_one(ctx, l, j, 0, false, out);
        break;
      case ResonanceKind::first_order:
        for (int j = next_nonsite(sys, 1); j <= cap; j = next_nonsite(sys, j + 1)) measure_one(ctx, l, j, 0, true, out);
        break;
      case ResonanceKind::second_order: {
        const double jmin_cap = spec.c2 * std::pow(spec.gamma, -spec.upsilon) * std::pow(br, spec.tau1);
        const SparsePoly base = family_limit(sys, spec, l, 0);
        // Sums: omega.l + Omega_j + Omega_j' with j >= j', j + j' = s <= cap. Per s,
        // f = omega.l + s/2 - 1 + e with 0 <= e <= b1^2, which rules out whole shells.
        const double e = b1 * b1;
        for (int s = 2; s <= cap; ++s) {
          SparsePoly g = base;
          g.add_constant(0.5 * s - 1.0 + 0.5 * e);
          if (above_on(g, spec.threshold(L, s, 0) + 0.5 * e, sys.b0, sys.b1)) continue;
          for (int jp = next_nonsite(sys, 1); 2 * jp <= s && jp <= jmin_cap; jp = next_nonsite(sys, jp + 1))
            if (!sys.is_site(s - jp)) measure_one(ctx, l, s - jp, -jp, true, out);
        }
        // Differences j - j0 = n > 0, and n = 0 for l != 0 (one sign of l).
        for (int n = 0; n <= cap; ++n) {
          if (n == 0 && !(L > 0 && lex_positive(l))) continue;
          SparsePoly g = base;
          g.add_constant(0.5 * n);
          const double alpha = spec.threshold(L, n, 0);
          // Past j0 with b1^{2 j0} / 2 <= kTailFraction alpha every member lies in
          // {|g| <= (1 + kTailFraction) alpha}; that set closes the family.
          for (int j0 = next_nonsite(sys, 1);; j0 = next_nonsite(sys, j0 + 1)) {
            const double e = 0.5 * std::pow(b1, 2 * j0);
            if (above_on(g, alpha + e, sys.b0, sys.b1)) break;
            if (e <= kTailFraction * alpha) {
              measure_tail(ctx, l, n, j0, out);
              break;
            }
            if (j0 + n > spec.Jmax) {
              out.truncated = true;
              break;
            }
            const int j = j0 + n;
            if (sys.is_site(j)) continue;
            measure_one(ctx, l, j, j0, true, out);
          }
        }
        break;
      }
    }
  }
}

}  // namespace

MeasureReport excluded_measure(const FrequencySystem& sys, const DiophantineSpec& spec) {
  spec.validate(sys);
  FamilyContext ctx;
  ctx.sys = &sys;
  ctx.spec = &spec;
  double doff = 0.0;
  for (double x : spec.delta) doff = std::max(doff, std::abs(x));
  ctx.Comega = sys.omega_sup() + doff;
  // |j| cutoffs from Omega_j >= (j-1)/2 and |omega.l| <= Comega |l|.
  double C0 = spec.C0;
  if (C0 == 0.0) {
    switch (spec.kind) {
      case ResonanceKind::transport: {
        const double den = 0.5 - std::abs(spec.delta_speed) - spec.prefactor * std::pow(spec.gamma, spec.upsilon);
        if (!(den > 0.0)) throw invalid_argument("excluded_measure: threshold too large for the j cutoff");
        C0 = ctx.Comega / den + 1.0;
        break;
      }
      case ResonanceKind::first_order: {
        const double den = 0.5 - spec.prefactor * spec.gamma;
        if (!(den > 0.0)) throw invalid_argument("excluded_measure: threshold too large for the j cutoff");
        C0 = (ctx.Comega + 0.5) / den + 1.0;
        break;
      }
      case ResonanceKind::second_order: {
        const double den = 0.5 - 2.0 * spec.prefactor * spec.gamma;
        if (!(den > 0.0)) throw invalid_argument("excluded_measure: threshold too large for the j cutoff");
        C0 = (ctx.Comega + 1.0) / den + 1.0;
        break;
      }
    }
  }
  ctx.C0 = C0;
  for (int n = 0; n <= spec.Lmax; ++n)
    for (const auto& l : enumerate_l(sys.d(), n))
      if (l1_norm(l) == n) ctx.ls.push_back(l);

  std::vector<Partial> parts(ctx.ls.size());
  const int jobs = std::max(1, spec.jobs);
  std::vector<std::vector<std::size_t>> split(static_cast<std::size_t>(jobs));
  for (std::size_t i = 0; i < ctx.ls.size(); ++i) split[i % static_cast<std::size_t>(jobs)].push_back(i);
  if (jobs == 1) {
    scan_family(ctx, split[0], parts);
  } else {
    std::vector<std::thread> th;
    for (int t = 0; t < jobs; ++t)
      th.emplace_back([&, t] { scan_family(ctx, split[static_cast<std::size_t>(t)], parts); });
    for (auto& x : th) x.join();
  }

  MeasureReport rep;
  rep.C0_used = C0;
  std::vector<Interval> all;
  for (Partial& p : parts) {
    rep.functions += p.functions;
    rep.flagged += p.flagged;
    rep.truncated = rep.truncated || p.truncated;
    for (Contribution& c : p.contributions) {
      all.insert(all.end(), c.set.intervals().begin(), c.set.intervals().end());
      rep.contributions.push_back(std::move(c));
    }
  }
  rep.excluded = IntervalSet(std::move(all));
  rep.total = rep.excluded.measure();
  return rep;
}

double linear_cantor_measure(const FrequencySystem& sys, double gamma, double tau, int Lmax) {
  sys.validate();
  if (gamma == 0.0) return sys.b1 - sys.b0;
  DiophantineSpec spec;
  spec.gamma = gamma;
  spec.tau = tau;
  spec.tau1 = tau;
  spec.Lmax = Lmax;
  spec.kind = ResonanceKind::first_order;
  return (sys.b1 - sys.b0) - excluded_measure(sys, spec).total;
}

GammaStudy gamma_study(const FrequencySystem& sys, DiophantineSpec spec, const std::vector<double>& gammas) {
  if (gammas.size() < 2) throw invalid_argument("gamma_study: need at least two gammas");
  GammaStudy st;
  st.gammas = gammas;
  std::vector<IntervalSet> sets;
  for (double g : gammas) {
    spec.gamma = g;
    MeasureReport r = excluded_measure(sys, spec);
    st.excluded.push_back(r.total);
    sets.push_back(std::move(r.excluded));
  }
  st.strictly_decreasing = true;
  st.nested = true;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    for (std::size_t m = 0; m < gammas.size(); ++m) {
      if (gammas[m] < gammas[k]) {
        if (!(st.excluded[m] < st.excluded[k])) st.strictly_decreasing = false;
        if (!sets[k].contains(sets[m], 1e-11)) st.nested = false;
      }
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(st.excluded[k] > 0.0)) continue;
    const double x = std::log(gammas[k]), y = std::log(st.excluded[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    st.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    st.prefactor = std::exp((sy - st.exponent * sx) / n);
  }
  return st;
}

RussmannCheck check_russmann(const FrequencySystem& sys, const DiophantineSpec& spec, const MeasureReport& rep,
                             double rho0_hat) {
  if (!(rho0_hat > 0.0)) throw invalid_argument("check_russmann: rho0_hat must be positive");
  RussmannCheck chk;
  const int q0 = sys.q0();
  for (const Contribution& c : rep.contributions) {
    const int br = std::max(1, l1_norm(c.l));
    const SparsePoly f =
        c.tail ? family_limit(sys, spec, c.l, c.j - c.j0) : resonance_function(sys, spec, c.l, c.j, c.j0);
    const double bound = russmann_bound(f, c.alpha, q0, rho0_hat * br, sys.b0, sys.b1);
    ++chk.checked;
    chk.shell_bound[br] += bound;
    chk.worst_ratio = std::max(chk.worst_ratio, c.measure / bound);
    if (c.measure > bound) ++chk.violations;
  }
  chk.tail_exponent = sys.d() - spec.tau / q0;
  if (chk.tail_exponent >= -1.0) {
    chk.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    double K = 0.0;
    for (const auto& [n, s] : chk.shell_bound) K = std::max(K, s / std::pow(n, chk.tail_exponent));
    // sum_{n > Lmax} n^p <= int_{Lmax}^inf x^p dx.
    const double Lm = std::max(1, spec.Lmax);
    chk.tail_bound = K * std::pow(Lm, chk.tail_exponent + 1.0) / (-(chk.tail_exponent + 1.0));
  }
  return chk;
}

double gamma_schedule(double gamma, int n) {
  if (n < 0) throw invalid_argument("gamma_schedule: n < 0");
  return gamma * (1.0 + std::ldexp(1.0, -n));
}

}  // namespace vpatch
