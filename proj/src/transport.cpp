#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpatch/errors.hpp"
#include "vpatch/fft.hpp"
#include "vpatch/kam.hpp"

namespace vpatch {

double smooth_cutoff(double x) {
  const double a = std::abs(x);
  if (a <= 1.0 / 3.0) return 0.0;
  if (a >= 0.5) return 1.0;
  // psi(t) = exp(-1/t) glue of 0 and 1 on t = 6a - 2 in (0,1).
  const double t = 6.0 * a - 2.0;
  const double p = std::exp(-1.0 / t), q = std::exp(-1.0 / (1.0 - t));
  return p / (p + q);
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One theta row: coefficients and evaluation of the interpolant and its derivative.
struct RowSeries {
  std::vector<cplx> c;
  int M;

  RowSeries(const double* v, int M_) : M(M_) {
    std::vector<cplx> in(v, v + M);
    c = fft::forward({M}, in);
  }
  // value (deriv = false) or d/dtheta (deriv = true; Nyquist dropped) at x.
  double eval(double x, bool deriv) const {
    const cplx step(std::cos(x), std::sin(x));
    cplx e = step;
    double s = deriv ? 0.0 : c[0].real();
    for (int j = 1; j < M / 2; ++j) {
      const cplx t = c[static_cast<std::size_t>(j)] * e;
      s += deriv ? -2.0 * j * t.imag() : 2.0 * t.real();
      e *= step;
    }
    if (!deriv) s += c[static_cast<std::size_t>(M / 2)].real() * std::cos(0.5 * M * x);
    return s;
  }
};

void require_same_grid(const PeriodicField& a, const PeriodicField& b, const char* what) {
  if (a.grid() != b.grid()) throw invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

PeriodicField evaluate_shifted(const PeriodicField& f, const PeriodicField& theta_new) {
  require_same_grid(f, theta_new, "evaluate_shifted");
  const int M = f.M();
  const std::size_t rows = f.size() / static_cast<std::size_t>(M);
  std::vector<double> out(f.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const RowSeries row(f.values().data() + r * M, M);
    for (int i = 0; i < M; ++i) {
      const std::size_t k = r * M + static_cast<std::size_t>(i);
      out[k] = row.eval(theta_new.value(k), false);
    }
  }
  return PeriodicField::from_values(f.grid(), std::move(out));
}

// ---------------------------------------------------------------------------

ChangeOfVariables ChangeOfVariables::identity(std::vector<int> grid) {
  return {PeriodicField::zeros(grid), PeriodicField::zeros(grid)};
}

ChangeOfVariables ChangeOfVariables::from_beta(PeriodicField beta) {
  const double lip = derivative_theta(beta).sup_norm();
  if (!(lip < 1.0))
    throw invariant_violation("change of variables: sup |d_theta beta| >= 1 (not a diffeomorphism)");
  const int M = beta.M();
  const std::size_t rows = beta.size() / static_cast<std::size_t>(M);
  std::vector<double> bh(beta.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const RowSeries row(beta.values().data() + r * M, M);
    for (int i = 0; i < M; ++i) {
      const double y = kTwoPi * i / M;
      // theta + beta(theta) = y; the map is increasing, Newton from theta = y - beta(y).
      double th = y - row.eval(y, false);
      for (int it = 0; it < 60; ++it) {
        const double g = th + row.eval(th, false) - y;
        const double dth = g / (1.0 + row.eval(th, true));
        th -= dth;
        if (std::abs(dth) < 1e-15) break;
      }
      bh[r * M + static_cast<std::size_t>(i)] = th - y;
    }
  }
  ChangeOfVariables c;
  c.beta_hat = PeriodicField::from_values(beta.grid(), std::move(bh));
  c.beta = std::move(beta);
  return c;
}

double ChangeOfVariables::lipschitz() const { return derivative_theta(beta).sup_norm(); }

double ChangeOfVariables::inversion_defect() const {
  std::vector<double> th(beta.size());
  for (std::size_t k = 0; k < th.size(); ++k) th[k] = beta.theta_of(k) + beta.value(k);
  const PeriodicField shifted = evaluate_shifted(beta_hat, PeriodicField::from_values(beta.grid(), std::move(th)));
  return (shifted + beta).sup_norm();
}

double ChangeOfVariables::oddness_defect() const { return (reflect(beta) + beta).sup_norm(); }

namespace {

PeriodicField shifted_nodes(const PeriodicField& shift) {
  std::vector<double> th(shift.size());
  for (std::size_t k = 0; k < th.size(); ++k) th[k] = shift.theta_of(k) + shift.value(k);
  return PeriodicField::from_values(shift.grid(), std::move(th));
}

PeriodicField plus_one(const PeriodicField& f) {
  std::vector<double> v = f.values();
  for (double& x : v) x += 1.0;
  return PeriodicField::from_values(f.grid(), std::move(v));
}

}  // namespace

PeriodicField compose_with(const ChangeOfVariables& c, const PeriodicField& rho, bool weighted) {
  require_same_grid(c.beta, rho, "compose_with");
  if (!(c.lipschitz() < 1.0)) throw invariant_violation("compose_with: sup |d_theta beta| >= 1");
  PeriodicField out = evaluate_shifted(rho, shifted_nodes(c.beta));
  if (weighted) out = out.times(plus_one(derivative_theta(c.beta)));
  return out;
}

PeriodicField compose_inverse(const ChangeOfVariables& c, const PeriodicField& rho, bool weighted) {
  require_same_grid(c.beta, rho, "compose_inverse");
  PeriodicField out = evaluate_shifted(rho, shifted_nodes(c.beta_hat));
  if (weighted) out = out.times(plus_one(derivative_theta(c.beta_hat)));
  return out;
}

ChangeOfVariables accumulate(const ChangeOfVariables& first, const ChangeOfVariables& second) {
  require_same_grid(first.beta, second.beta, "accumulate");
  return ChangeOfVariables::from_beta(first.beta + evaluate_shifted(second.beta, shifted_nodes(first.beta)));
}

// ---------------------------------------------------------------------------

void TransportProblem::validate() const {
  const int d = static_cast<int>(omega.size());
  if (f0.dims() != d + 1) throw invalid_argument("TransportProblem: f0 must live on T^{d+1}");
  if (!(V0 > 0.0)) throw invalid_argument("TransportProblem: V0 must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw invalid_argument("TransportProblem: gamma outside (0,1)");
  if (!(upsilon > 0.0 && upsilon <= 1.0)) throw invalid_argument("TransportProblem: upsilon outside (0,1]");
  if (!(tau1 > d)) throw invalid_argument("TransportProblem: need tau1 > d");
  if (N0 < 2) throw invalid_argument("TransportProblem: N0 must be >= 2");
  for (int n : f0.grid())
    if (3 * N0 > n) throw invalid_argument("TransportProblem: grid too small for N0");
  if (!(f0.sup_norm() <= smallness * V0))
    throw invalid_argument("TransportProblem: f0 above the smallness threshold");
  const double sym = (reflect(f0) - f0).sup_norm();
  if (sym > 1e-12 * std::max(1.0, f0.sup_norm()))
    throw invalid_argument("TransportProblem: f0 is not even under (phi,theta) -> (-phi,-theta)");
}

int TransportProblem::truncation(int m) const {
  int cap = f0.grid().front();
  for (int n : f0.grid()) cap = std::min(cap, n);
  cap /= 3;
  const double N = std::pow(static_cast<double>(N0), std::pow(1.5, m));
  return static_cast<int>(std::min<double>(cap, std::floor(N)));
}

double superlinear_slope(const std::vector<double>& deltas, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    if (!(deltas[k] > floor && deltas[k + 1] > floor)) continue;
    const double x = std::log(deltas[k]), y = std::log(deltas[k + 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n == 0) return 0.0;
  if (n == 1) return sy / sx;  // single pair: ratio of logs
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// Solve (omega.d_phi + V d_theta) beta = <f> - f on <l,j> <= N with the cut-off.
PeriodicField transport_homological(const PeriodicField& f, const std::vector<double>& omega, double V,
                                    double thr_gamma, double tau1, int N, int step, std::vector<CutMode>& cuts,
                                    long& modes, long& cut) {
  const auto& g = f.grid();
  const int d = static_cast<int>(omega.size());
  std::vector<cplx> c(f.size(), cplx(0.0, 0.0));
  const auto& fc = f.coeffs();
  std::vector<int> l(static_cast<std::size_t>(d));
  for (std::size_t s = 0; s < f.size(); ++s) {
    std::size_t rem = s;
    const int j = fft::wavenumber(static_cast<int>(rem % static_cast<std::size_t>(g.back())), g.back());
    rem /= static_cast<std::size_t>(g.back());
    for (int a = d - 1; a >= 0; --a) {
      const int na = g[static_cast<std::size_t>(a)];
      l[static_cast<std::size_t>(a)] = fft::wavenumber(static_cast<int>(rem % static_cast<std::size_t>(na)), na);
      rem /= static_cast<std::size_t>(na);
    }
    const int L = l1_norm(l);
    if ((L == 0 && j == 0) || bracket(l, j) > N) continue;
    double div = j * V;
    for (int a = 0; a < d; ++a) div += omega[static_cast<std::size_t>(a)] * l[static_cast<std::size_t>(a)];
    const double x = div * std::pow(std::max(1, L), tau1) / (thr_gamma * std::max(1, std::abs(j)));
    const double chi = smooth_cutoff(x);
    ++modes;
    if (chi < 1.0) {
      ++cut;
      cuts.push_back(CutMode{step, l, j, 0, div, chi});
    }
    if (chi > 0.0) c[s] = -fc[s] * chi / cplx(0.0, div);
  }
  return PeriodicField::from_coeffs(g, c);
}

}  // namespace

TransportResult straighten_transport(const TransportProblem& p, int steps) {
  p.validate();
  if (steps < 1) throw invalid_argument("straighten_transport: steps must be >= 1");
  const int d = static_cast<int>(p.omega.size());
  const double thr_gamma = std::pow(p.gamma, p.upsilon);
  TransportResult res;
  res.change = ChangeOfVariables::identity(p.f0.grid());
  double V = p.V0;
  PeriodicField f = p.f0;
  std::vector<double> deltas;
  for (int m = 0; m <= steps; ++m) {
    TransportStep st;
    st.m = m;
    st.V = V;
    st.delta_sup = f.sup_norm();
    st.delta_s = sobolev_norm(f, 1.0);
    deltas.push_back(st.delta_sup);
    if (m == steps) {
      res.history.push_back(st);
      break;
    }
    st.N = p.truncation(m);
    long modes = 0, cut = 0;
    const PeriodicField beta = transport_homological(f, p.omega, V, thr_gamma, p.tau1, st.N, m, res.cuts, modes, cut);
    st.cut_fraction = modes > 0 ? static_cast<double>(cut) / static_cast<double>(modes) : 0.0;
    res.history.push_back(st);
    if (cut > 0) res.in_cantor_set = false;
    if (st.cut_fraction > 0.5) {
      res.reducible = false;
      break;
    }
    const ChangeOfVariables c = ChangeOfVariables::from_beta(beta);
    // The conjugated operator applied to the theta-linear probe y gives the
    // new d_theta coefficient: [omega.d_phi beta + V (1 + beta_theta)] at theta = y + beta_hat.
    const PeriodicField bt = derivative_theta(beta);
    std::vector<double> w = plus_one(bt).times(f).values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += V * (1.0 + bt.value(k));
    PeriodicField W = PeriodicField::from_values(f.grid(), std::move(w));
    for (int a = 0; a < d; ++a) W = W + derivative_phi(beta, a) * p.omega[static_cast<std::size_t>(a)];
    W = evaluate_shifted(W, shifted_nodes(c.beta_hat));
    V += f.mean();
    std::vector<double> nf = W.values();
    for (double& x : nf) x -= V;
    f = PeriodicField::from_values(f.grid(), std::move(nf));
    res.change = accumulate(res.change, c);
  }
  res.V_inf = V;
  res.superlinear_slope = superlinear_slope(deltas, 1e-13);
  return res;
}

}  // namespace vpatch
