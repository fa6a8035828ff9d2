#include "vpatch/frequencies.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <thread>

#include "vpatch/errors.hpp"
#include "vpatch/spectral.hpp"

namespace vpatch {

double falling_factorial(int n, int q) {
  double f = 1.0;
  for (int i = 0; i < q; ++i) f *= static_cast<double>(n - i);
  return f;
}

double omega(double b, int j) {
  if (j == 0) throw invalid_argument("omega: j = 0");
  if (j < 0) return -omega(b, -j);
  return 0.5 * (j - 1 + std::pow(b, 2 * j));
}

double omega_derivative(double b, int j, int q) {
  if (j == 0) throw invalid_argument("omega_derivative: j = 0");
  if (q < 0) throw invalid_argument("omega_derivative: q < 0");
  if (j < 0) return -omega_derivative(b, -j, q);
  if (q == 0) return omega(b, j);
  const int n = 2 * j;
  if (q > n) return 0.0;
  return 0.5 * falling_factorial(n, q) * std::pow(b, n - q);
}

// ---------------------------------------------------------------------------

void SparsePoly::add_term(int exponent, double coeff) {
  if (exponent < 0) throw invalid_argument("SparsePoly: negative exponent");
  if (exponent == 0) {
    c0_ += coeff;
    return;
  }
  double& c = terms_[exponent];
  c += coeff;
  if (c == 0.0) terms_.erase(exponent);
}

SparsePoly& SparsePoly::operator+=(const SparsePoly& o) {
  c0_ += o.c0_;
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

SparsePoly SparsePoly::operator*(double s) const {
  SparsePoly p(c0_ * s);
  for (const auto& [e, c] : terms_) p.add_term(e, c * s);
  return p;
}

int SparsePoly::degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

double SparsePoly::eval(double b, int q) const {
  double v = q == 0 ? c0_ : 0.0;
  for (const auto& [e, c] : terms_)
    if (q <= e) v += c * falling_factorial(e, q) * std::pow(b, e - q);
  return v;
}

double SparsePoly::sup_bound(double lo, double hi, int q) const {
  const double x = std::max(std::abs(lo), std::abs(hi));
  double v = q == 0 ? std::abs(c0_) : 0.0;
  for (const auto& [e, c] : terms_)
    if (q <= e) v += std::abs(c) * falling_factorial(e, q) * std::pow(x, e - q);
  return v;
}

double SparsePoly::inf_abs_bound(double lo, double hi) const {
  double mn = c0_, mx = c0_;
  for (const auto& [e, c] : terms_) {
    const double a = c * std::pow(lo, e), b = c * std::pow(hi, e);
    mn += std::min(a, b);
    mx += std::max(a, b);
  }
  if (mn > 0.0) return mn;
  if (mx < 0.0) return -mx;
  return 0.0;
}

SparsePoly omega_poly(int j) {
  if (j == 0) throw invalid_argument("omega_poly: j = 0");
  if (j < 0) return omega_poly(-j) * -1.0;
  SparsePoly p(0.5 * (j - 1));
  p.add_term(2 * j, 0.5);
  return p;
}

// ---------------------------------------------------------------------------

void FrequencySystem::validate() const {
  if (sites.empty()) throw invalid_argument("FrequencySystem: empty tangential set");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] < 1 || sites[i] > 30) throw invalid_argument("FrequencySystem: sites must lie in 1..30");
    if (i > 0 && sites[i] <= sites[i - 1]) throw invalid_argument("FrequencySystem: sites must increase");
  }
  if (!(b0 > 0.0 && b0 < b1 && b1 < 1.0)) throw invalid_argument("FrequencySystem: need 0 < b0 < b1 < 1");
}

bool FrequencySystem::is_site(int j) const {
  return std::find(sites.begin(), sites.end(), j) != sites.end();
}

std::vector<double> FrequencySystem::omega_eq(double b) const {
  std::vector<double> w;
  for (int j : sites) w.push_back(omega(b, j));
  return w;
}

SparsePoly FrequencySystem::omega_dot(const std::vector<int>& l) const {
  if (l.size() != sites.size()) throw invalid_argument("omega_dot: l has wrong dimension");
  SparsePoly p;
  for (std::size_t k = 0; k < l.size(); ++k) p += omega_poly(sites[k]) * static_cast<double>(l[k]);
  return p;
}

double FrequencySystem::omega_sup() const {
  double m = 0.0;
  for (int j : sites) m = std::max(m, std::abs(omega(b1, j)));
  return m;
}

MonotonicityReport check_monotonicity(double b, int Jmax) {
  if (!(b > 0.0 && b < 1.0)) throw invalid_argument("check_monotonicity: b outside (0,1)");
  MonotonicityReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 1; j < Jmax; ++j) {
    const double gap = omega(b, j + 1) / (j + 1) - omega(b, j) / j;
    if (gap < rep.min_gap) {
      rep.min_gap = gap;
      rep.argmin_j = j;
    }
  }
  rep.increasing = rep.min_gap > 0.0;
  return rep;
}

double lower_bound_ratio(double b0, double b1, int Jmax, int grid) {
  double worst = std::numeric_limits<double>::infinity();
  for (int g = 0; g < grid; ++g) {
    const double b = b0 + (b1 - b0) * g / (grid - 1);
    for (int j = 1; j <= Jmax; ++j) worst = std::min(worst, std::abs(omega(b, j)) / (0.5 * b0 * b0 * j));
  }
  return worst;
}

double sum_difference_ratio(double b0, double b1, int Jmax, int grid) {
  double worst = std::numeric_limits<double>::infinity();
  const double c = b0 * b0 / 6.0;
  for (int g = 0; g < grid; ++g) {
    const double b = b0 + (b1 - b0) * g / (grid - 1);
    for (int j = 1; j <= Jmax; ++j) {
      for (int k = 1; k <= Jmax; ++k) {
        worst = std::min(worst, std::abs(omega(b, j) + omega(b, k)) / (c * (j + k)));
        if (j != k) worst = std::min(worst, std::abs(omega(b, j) - omega(b, k)) / (c * std::abs(j - k)));
      }
    }
  }
  return worst;
}

bool nondegeneracy_test(const std::vector<std::vector<long long>>& polys) {
  using boost::multiprecision::cpp_rational;
  std::size_t cols = 0;
  for (const auto& p : polys) cols = std::max(cols, p.size());
  std::vector<std::vector<cpp_rational>> a(polys.size(), std::vector<cpp_rational>(cols, 0));
  for (std::size_t i = 0; i < polys.size(); ++i)
    for (std::size_t k = 0; k < polys[i].size(); ++k) a[i][k] = polys[i][k];
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < a.size(); ++c) {
    std::size_t piv = rank;
    while (piv < a.size() && a[piv][c] == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == rank || a[i][c] == 0) continue;
      const cpp_rational f = a[i][c] / a[rank][c];
      for (std::size_t k = c; k < cols; ++k) a[i][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank == polys.size();
}

bool nondegeneracy_test(const FrequencySystem& sys) {
  sys.validate();
  std::vector<std::vector<long long>> polys;
  for (int j : sys.sites) {
    std::vector<long long> p(static_cast<std::size_t>(2 * j + 1), 0);
    p[0] = j - 1;  // 2 Omega_j = (j - 1) + b^{2j}
    p[static_cast<std::size_t>(2 * j)] = 1;
    polys.push_back(p);
  }
  polys.push_back({1});
  return nondegeneracy_test(polys);
}

// ---------------------------------------------------------------------------
// Transversality scan. Every function is a short sum c0 + sum c_e b^e; the
// minimum over the b-grid of max_q |f^(q)| is found by branch and bound on
// grid index ranges with Lipschitz lower bounds from sup |f^(q+1)|.

namespace {

struct Combo {
  double c0 = 0.0;
  int nt = 0;
  std::array<int, 12> e{};
  std::array<double, 12> c{};

  void add(int ex, double co) {
    if (ex == 0) {
      c0 += co;
      return;
    }
    for (int i = 0; i < nt; ++i)
      if (e[static_cast<std::size_t>(i)] == ex) {
        c[static_cast<std::size_t>(i)] += co;
        return;
      }
    if (nt == 12) throw invalid_argument("transversality_scan: too many monomials");
    e[static_cast<std::size_t>(nt)] = ex;
    c[static_cast<std::size_t>(nt)] = co;
    ++nt;
  }
  void add(const SparsePoly& p, double s) {
    c0 += s * p.constant();
    for (const auto& [ex, co] : p.terms()) add(ex, s * co);
  }
};

struct Grid {
  double b0, b1;
  int n;
  double at(int g) const { return n == 1 ? b0 : b0 + (b1 - b0) * g / (n - 1); }
};

// out[q] = f^(q)(b), q <= qmax; with absolute coefficients when abs_coeffs.
void derivs(const Combo& f, double b, int qmax, double* out, bool abs_coeffs = false) {
  for (int q = 0; q <= qmax; ++q) out[q] = 0.0;
  out[0] = abs_coeffs ? std::abs(f.c0) : f.c0;
  for (int t = 0; t < f.nt; ++t) {
    const int ex = f.e[static_cast<std::size_t>(t)];
    double co = f.c[static_cast<std::size_t>(t)];
    if (abs_coeffs) co = std::abs(co);
    const int top = std::min(ex, qmax);
    double p = std::pow(b, ex - top);
    double ff = falling_factorial(ex, top);
    for (int q = top; q >= 0; --q) {
      out[q] += co * ff * p;
      p *= b;
      if (q > 0) ff /= ex - q + 1;
    }
  }
}

struct Hit {
  double value = std::numeric_limits<double>::infinity();  // max_q |f^(q)| / <l>
  double b = 0.0;
  int q = 0;
};

// Minimum over grid points of max_q max(0, |f^(q)| - red), pruned against
// bound (same units). Returns a hit only if it improves on the bound.
class Minimizer {
 public:
  Minimizer(Grid g, int qmax) : grid_(g), qmax_(qmax) {}

  // sup_{n >= 2J} (n)_q b^{n-q}: bounds every derivative of order q of the
  // b^{2j}/2 - b^{2j'}/2 corrections with j > j' >= J.
  static double envelope(double b, int q, int J) {
    int n = 2 * J;
    if (n < q) n = q;
    double t = falling_factorial(n, q) * std::pow(b, n - q), best = t;
    while ((n + 1) * b > n + 1 - q) {
      t *= b * (n + 1) / (n + 1 - q);
      ++n;
      best = std::max(best, t);
    }
    return best;
  }

  // Minimum over the grid of max_q (|g^(q)| - envelope_q(J)) - red: a lower
  // bound for every member g + corrections of a family with j' >= J.
  Hit run_family(const Combo& g, int J, double red, double bound) {
    env_J_ = J;
    Hit h = run(g, red, bound);
    env_J_ = 0;
    return h;
  }

  Hit run(const Combo& f, double red, double bound) {
    f_ = &f;
    red_ = red;
    best_ = Hit{};
    best_.value = bound;
    visit(0, grid_.n - 1);
    return best_;
  }

 private:
  Grid grid_;
  int qmax_;
  const Combo* f_ = nullptr;
  double red_ = 0.0;
  Hit best_;
  int env_J_ = 0;

  double env(double b, int q) const { return env_J_ > 0 ? envelope(b, q, env_J_) : 0.0; }

  double value_at(double b, int& qarg) const {
    double d[64];
    derivs(*f_, b, qmax_, d);
    double v = 0.0;
    qarg = 0;
    for (int q = 0; q <= qmax_; ++q) {
      const double x = std::max(0.0, std::abs(d[q]) - red_ - env(b, q));
      if (x > v) {
        v = x;
        qarg = q;
      }
    }
    return v;
  }

  void visit(int lo, int hi) {
    const int mid = lo + (hi - lo) / 2;
    const double bm = grid_.at(mid);
    const double h = std::max(bm - grid_.at(lo), grid_.at(hi) - bm);
    double d[64], lip[65];
    derivs(*f_, bm, qmax_, d);
    // Monomial bounds are monotone in b >= 0: sup over the node sits at its right end.
    derivs(*f_, grid_.at(hi), qmax_ + 1, lip, true);
    double lb = 0.0;
    for (int q = 0; q <= qmax_; ++q)
      lb = std::max(lb, std::abs(d[q]) - lip[q + 1] * h - env(grid_.at(hi), q));
    if (lb - red_ >= best_.value) return;
    if (hi - lo < 8) {
      for (int g = lo; g <= hi; ++g) {
        int qa = 0;
        const double v = value_at(grid_.at(g), qa);
        if (v < best_.value) best_ = Hit{v, grid_.at(g), qa};
      }
      return;
    }
    visit(lo, mid);
    visit(mid + 1, hi);
  }
};

struct CaseAcc {
  double best = std::numeric_limits<double>::infinity();
  Witness witness;
  long order = std::numeric_limits<long>::max();
  std::map<int, double> shell;
  long functions = 0;
};

struct ScanContext {
  const FrequencySystem* sys;
  std::vector<SparsePoly> omegas;  // omega_eq components as polynomials
  double Comega;
  int q0;
  Grid grid;
  double eps;
  std::vector<std::vector<int>> ls;
};

// Min over grid of |omega.l + n/2| when below bound, else bound: prunes
// whole families sharing it.
double gmin(const ScanContext& ctx, const Combo& base, int n, double bound) {
  Combo g = base;
  g.c0 += 0.5 * n;
  Minimizer mz(ctx.grid, 0);
  return mz.run(g, 0.0, bound).value;
}

void scan_range(const ScanContext& ctx, const std::vector<std::size_t>& indices,
                std::array<CaseAcc, 4>& acc) {
  const int q0 = ctx.q0;
  const double e = ctx.eps;
  Minimizer mz(ctx.grid, q0);
  const double bmax = ctx.grid.b1;

  auto consider = [&](int cs, const Combo& f, double red, int br, long order, const std::vector<int>& l,
                      int j, int j0, int sign) {
    CaseAcc& a = acc[static_cast<std::size_t>(cs)];
    ++a.functions;
    auto it = a.shell.find(br);
    const double shell_best = it == a.shell.end() ? std::numeric_limits<double>::infinity() : it->second;
    const double cut = std::min(shell_best, a.best) * br;
    const Hit h = mz.run(f, red, cut);
    if (h.value < cut) {
      const double v = h.value / br;
      a.shell[br] = v;
      if (v < a.best || (v == a.best && order < a.order)) {
        a.best = v;
        a.order = order;
        a.witness = Witness{h.b, l, j, j0, h.q, sign};
      }
    }
  };
  // Pruning level per unit <l>: the shell minimum, capped by the case minimum.
  // Shell minima are therefore exact only where they fall below the case's
  // running minimum; the case minimum itself is always exact.
  auto shell_bound = [&](int cs, int br) {
    const CaseAcc& a = acc[static_cast<std::size_t>(cs)];
    auto it = a.shell.find(br);
    const double sb = it == a.shell.end() ? std::numeric_limits<double>::infinity() : it->second;
    return std::min(sb, a.best);
  };
  // Index cutoff: beyond it |f| - red >= X <l> with X the running case
  // minimum, so no function past it can lower the minimum. Unbounded until
  // the case has a first value.
  auto cap = [&](int cs, int br, int L, double shift) {
    const double X = acc[static_cast<std::size_t>(cs)].best;
    if (!std::isfinite(X)) return std::numeric_limits<double>::infinity();
    return (X * br + (ctx.Comega + e) * L + shift) / (0.5 - e) + 1.0;
  };
  auto nonsite_from = [&](int j) {
    while (ctx.sys->is_site(j)) ++j;
    return j;
  };

  for (std::size_t idx : indices) {
    const auto& l = ctx.ls[idx];
    const int L = l1_norm(l);
    const int br = std::max(1, L);
    const long order = static_cast<long>(idx);
    Combo base;
    for (std::size_t k = 0; k < l.size(); ++k) base.add(ctx.omegas[k], static_cast<double>(l[k]));

    // (i) omega.l, l != 0.
    if (L > 0) consider(0, base, e * L, br, order, l, 0, 0, 0);

    // (ii) omega.l + j/2 and (iii) omega.l + Omega_j, j outside the sites.
    for (int cs = 1; cs <= 2; ++cs) {
      for (int j = nonsite_from(1); j <= cap(cs, br, L, 0.5); j = nonsite_from(j + 1)) {
        Combo f = base;
        if (cs == 1) {
          f.c0 += 0.5 * j;
        } else {
          f.add(omega_poly(j), 1.0);
          const double thr = shell_bound(cs, br) * br + 0.5 * std::pow(bmax, 2 * j) + e * (L + j);
          if (gmin(ctx, base, j - 1, thr) >= thr) continue;
        }
        consider(cs, f, e * (L + j), br, order, l, j, 0, +1);
      }
    }

    // (iv) omega.l + Omega_j + Omega_j' (j >= j') and omega.l + Omega_j - Omega_j' (j > j').
    {
      for (int s = 2; s <= cap(3, br, L, 1.0); ++s) {
        const double gm = gmin(ctx, base, s - 2, shell_bound(3, br) * br + 1.0 + e * (L + s));
        for (int jp = nonsite_from(1); 2 * jp <= s; jp = nonsite_from(jp + 1)) {
          const int j = s - jp;
          if (ctx.sys->is_site(j)) continue;
          const double extra = 0.5 * (std::pow(bmax, 2 * j) + std::pow(bmax, 2 * jp));
          const double red = e * (L + s);
          if (gm - extra - red >= shell_bound(3, br) * br) continue;
          Combo f = base;
          f.add(omega_poly(j), 1.0);
          f.add(omega_poly(jp), 1.0);
          consider(3, f, red, br, order, l, j, jp, +1);
        }
      }
      for (int m = 1; m <= cap(3, br, L, 0.5); ++m) {
        const double red = e * (L + m);
        const double gm = gmin(ctx, base, m, shell_bound(3, br) * br + 0.5 * bmax * bmax + red);
        Combo g = base;
        g.c0 += 0.5 * m;
        int next_family_check = 4;
        for (int jp = nonsite_from(1);; jp = nonsite_from(jp + 1)) {
          const int j = jp + m;
          if (jp >= next_family_check) {
            next_family_check *= 2;
            const double cut = shell_bound(3, br) * br;
            if (std::isfinite(cut) && mz.run_family(g, jp, red, cut).value >= cut) break;
          }
          // Beyond this j' the b^{2j}, b^{2j'} terms are below 1e-12 in every
          // derivative up to q0 and f equals omega.l + m/2 to that accuracy.
          double tail = 0.0;
          for (int q = 0; q <= q0 && q <= 2 * jp; ++q)
            tail = std::max(tail, falling_factorial(2 * jp, q) * std::pow(bmax, 2 * jp - q));
          if (tail < 1e-12 && jp > 1) break;
          if (ctx.sys->is_site(j)) continue;
          // The b^{2j'} correction only shrinks with j', so the rest of the family prunes too.
          if (gm - 0.5 * std::pow(bmax, 2 * jp) - red >= shell_bound(3, br) * br) break;
          Combo f = base;
          f.add(omega_poly(j), 1.0);
          f.add(omega_poly(jp), -1.0);
          consider(3, f, red, br, order, l, j, jp, -1);
        }
      }
    }
  }
}

}  // namespace

TransversalityReport transversality_scan(const FrequencySystem& sys, const ScanOptions& opt) {
  sys.validate();
  if (opt.Lmax < 1) throw invalid_argument("transversality_scan: Lmax must be >= 1");
  if (opt.grid < 2) throw invalid_argument("transversality_scan: grid must have >= 2 points");
  if (!(opt.perturbation >= 0.0 && opt.perturbation < 0.25))
    throw invalid_argument("transversality_scan: perturbation outside [0, 1/4)");
  ScanContext ctx;
  ctx.sys = &sys;
  if (!opt.synthetic_omega.empty()) {
    if (static_cast<int>(opt.synthetic_omega.size()) != sys.d())
      throw invalid_argument("transversality_scan: synthetic omega has wrong dimension");
    ctx.omegas = opt.synthetic_omega;
  } else {
    for (int j : sys.sites) ctx.omegas.push_back(omega_poly(j));
  }
  ctx.Comega = 0.0;
  for (const auto& p : ctx.omegas) ctx.Comega = std::max(ctx.Comega, p.sup_bound(sys.b0, sys.b1, 0));
  ctx.q0 = sys.q0();
  ctx.grid = Grid{sys.b0, sys.b1, opt.grid};
  ctx.eps = opt.perturbation;
  // Shells of increasing |l|_1 so that the running bounds tighten early.
  for (int n = 0; n <= opt.Lmax; ++n)
    for (const auto& l : enumerate_l(sys.d(), n))
      if (l1_norm(l) == n) ctx.ls.push_back(l);

  const int jobs = std::max(1, opt.jobs);
  std::vector<std::array<CaseAcc, 4>> accs(static_cast<std::size_t>(jobs));
  std::vector<std::vector<std::size_t>> parts(static_cast<std::size_t>(jobs));
  for (std::size_t i = 0; i < ctx.ls.size(); ++i) parts[i % static_cast<std::size_t>(jobs)].push_back(i);
  if (jobs == 1) {
    scan_range(ctx, parts[0], accs[0]);
  } else {
    std::vector<std::thread> th;
    for (int t = 0; t < jobs; ++t)
      th.emplace_back([&, t] { scan_range(ctx, parts[static_cast<std::size_t>(t)], accs[static_cast<std::size_t>(t)]); });
    for (auto& x : th) x.join();
  }

  TransversalityReport rep;
  rep.perturbation = opt.perturbation;
  rep.grid = opt.grid;
  rep.Lmax = opt.Lmax;
  const char* names[4] = {"omega.l", "omega.l+j/2", "omega.l+Omega_j", "omega.l+Omega_j+-Omega_j'"};
  rep.rho0_hat = std::numeric_limits<double>::infinity();
  for (int cs = 0; cs < 4; ++cs) {
    CaseReport& cr = rep.cases[static_cast<std::size_t>(cs)];
    cr.name = names[cs];
    cr.rho0_hat = std::numeric_limits<double>::infinity();
    long order = std::numeric_limits<long>::max();
    for (const auto& a : accs) {
      const CaseAcc& c = a[static_cast<std::size_t>(cs)];
      cr.functions += c.functions;
      if (c.best < cr.rho0_hat || (c.best == cr.rho0_hat && c.order < order)) {
        cr.rho0_hat = c.best;
        cr.witness = c.witness;
        order = c.order;
      }
      for (const auto& [br, v] : c.shell) {
        auto it = cr.per_l.find(br);
        if (it == cr.per_l.end() || v < it->second) cr.per_l[br] = v;
      }
    }
    rep.rho0_hat = std::min(rep.rho0_hat, cr.rho0_hat);
  }
  return rep;
}

TransversalityReport perturbed_transversality(const FrequencySystem& sys, ScanOptions opt, double eps_hat) {
  opt.perturbation = eps_hat;
  return transversality_scan(sys, opt);
}

}  // namespace vpatch
