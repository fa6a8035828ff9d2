#include "vpatch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpatch/errors.hpp"
#include "vpatch/fft.hpp"

namespace vpatch {

namespace {

constexpr double kPi = std::numbers::pi;

double half_angle(int i, int k, int M) { return kPi * static_cast<double>(k - i) / M; }

template <class F>
KernelTable make_table(int M, bool symmetric, F&& f) {
  KernelTable t;
  t.M = M;
  t.symmetric = symmetric;
  t.values.resize(static_cast<std::size_t>(M) * static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k)
      t.values[static_cast<std::size_t>(i) * static_cast<std::size_t>(M) + static_cast<std::size_t>(k)] = f(i, k);
  return t;
}

// (R_k^2 R_i^2 - b^4) without cancellation for small r.
double rr_excess(double b, double ri, double rk) { return 2.0 * b * b * (ri + rk) + 4.0 * ri * rk; }

}  // namespace

PatchState::PatchState(double b, PeriodicField r) : b_(b), r_(std::move(r)) {
  if (!(b > 0.0 && b < 1.0)) throw invalid_argument("PatchState: b must lie in (0,1)");
  if (r_.dims() != 1) throw invalid_argument("PatchState: r must be a theta-only field");
  if (!(r_.sup_norm() < admissible_sup(b)))
    throw degenerate_patch("PatchState: |r|_inf exceeds the admissible bound b^2/2 - margin");
  const int M = r_.M();
  const PeriodicField dr = derivative_theta(r_);
  R_.resize(static_cast<std::size_t>(M));
  dR_.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const double R2 = b * b + 2.0 * r_.value(static_cast<std::size_t>(i));
    if (!(R2 > 0.0)) throw degenerate_patch("PatchState: R^2 <= 0 at a grid node");
    R_[static_cast<std::size_t>(i)] = std::sqrt(R2);
    dR_[static_cast<std::size_t>(i)] = dr.value(static_cast<std::size_t>(i)) / R_[static_cast<std::size_t>(i)];
  }
}

PatchState PatchState::disc(double b, int M) { return {b, PeriodicField::zeros({M})}; }

double PatchState::max_R() const { return *std::max_element(R_.begin(), R_.end()); }

void PatchState::require_inside_disc() const {
  if (max_R() >= 1.0 - 1e-6) throw boundary_contact("PatchState: boundary reaches the unit circle");
}

double KernelTable::max_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) m = std::max(m, std::abs(at(i, k) - at(k, i)));
  return m;
}

KernelTable kernel_A(const PatchState& s) {
  const int M = s.M();
  return make_table(M, true, [&](int i, int k) {
    if (i == k) return 0.0;
    const double dR = s.R(i) - s.R(k);
    const double sn = std::sin(half_angle(i, k, M));
    return std::sqrt(dR * dR + 4.0 * s.R(i) * s.R(k) * sn * sn);
  });
}

KernelTable smooth_factor_v1(const PatchState& s) {
  const int M = s.M();
  const double b = s.b();
  const auto& r = s.r().values();
  return make_table(M, true, [&](int i, int k) {
    double g2 = 0.0;
    if (i == k) {
      g2 = s.dR(i) * s.dR(i);
    } else {
      const double g = 2.0 * (r[static_cast<std::size_t>(k)] - r[static_cast<std::size_t>(i)]) /
                       ((s.R(k) + s.R(i)) * std::sin(half_angle(i, k, M)));
      g2 = 0.25 * g * g;
    }
    return std::sqrt(g2 + s.R(i) * s.R(k)) / b;
  });
}

KernelTable diagonal_difference_quotient(const PeriodicField& f) {
  if (f.dims() != 1) throw invalid_argument("diagonal_difference_quotient: theta-only field required");
  const int M = f.M();
  const PeriodicField df = derivative_theta(f);
  return make_table(M, true, [&](int i, int k) {
    if (i == k) return 2.0 * df.value(static_cast<std::size_t>(i));
    return (f.value(static_cast<std::size_t>(k)) - f.value(static_cast<std::size_t>(i))) /
           std::sin(half_angle(i, k, M));
  });
}

KernelTable kernel_B(const PatchState& s) {
  s.require_inside_disc();
  const int M = s.M();
  return make_table(M, true, [&](int i, int k) {
    const double rr = s.R(i) * s.R(k);
    const double c = std::cos(2.0 * half_angle(i, k, M));
    return std::sqrt(rr * rr - 2.0 * rr * c + 1.0);
  });
}

KernelTable kernel_P(const PatchState& s) {
  s.require_inside_disc();
  const int M = s.M();
  const double b = s.b();
  const auto& r = s.r().values();
  return make_table(M, true, [&](int i, int k) {
    const double ri = r[static_cast<std::size_t>(i)], rk = r[static_cast<std::size_t>(k)];
    const double c = std::cos(2.0 * half_angle(i, k, M));
    const double excess = rr_excess(b, ri, rk);
    const double rr_minus_b2 = excess / (s.R(i) * s.R(k) + b * b);
    const double B0sq = 1.0 - 2.0 * b * b * c + b * b * b * b;
    return (excess - 2.0 * rr_minus_b2 * c) / B0sq;
  });
}

double k1_coefficient(int k) {
  return k == 0 ? -std::numbers::ln2 : -0.5 / std::abs(k);
}

double k2_coefficient(double b, int k) {
  if (k == 0) return 0.0;
  return -0.5 * std::pow(b, 2.0 * std::abs(k)) / std::abs(k);
}

std::vector<double> singular_weights(int M, const std::function<double(int)>& coefficient) {
  if (!is_power_of_two(M) || M < 4) throw invalid_argument("singular_weights: bad grid size");
  std::vector<cplx> c(static_cast<std::size_t>(M));
  for (int s = 0; s < M; ++s) c[static_cast<std::size_t>(s)] = coefficient(std::abs(fft::wavenumber(s, M)));
  auto w = fft::inverse({M}, c);
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) out[static_cast<std::size_t>(m)] = w[static_cast<std::size_t>(m)].real() / M;
  return out;
}

PatchKernels PatchKernels::build(const PatchState& s) {
  s.require_inside_disc();
  PatchKernels k;
  const int M = s.M();
  const double b = s.b(), b2 = b * b;
  k.M = M;
  k.b = b;
  k.w1 = singular_weights(M, k1_coefficient);
  k.w2 = singular_weights(M, [b](int n) { return k2_coefficient(b, n); });
  k.cosu.resize(static_cast<std::size_t>(M));
  k.sinu.resize(static_cast<std::size_t>(M));
  std::vector<double> sinh(static_cast<std::size_t>(M)), B0sq(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const double u = 2.0 * kPi * m / M;
    k.cosu[static_cast<std::size_t>(m)] = std::cos(u);
    k.sinu[static_cast<std::size_t>(m)] = std::sin(u);
    sinh[static_cast<std::size_t>(m)] = std::sin(0.5 * u);
    B0sq[static_cast<std::size_t>(m)] = 1.0 - 2.0 * b2 * std::cos(u) + b2 * b2;
  }
  const auto& r = s.r().values();
  const std::size_t n = static_cast<std::size_t>(M) * static_cast<std::size_t>(M);
  k.lv1.resize(n);
  k.lp.resize(n);
  for (int i = 0; i < M; ++i) {
    const double ri = r[static_cast<std::size_t>(i)], Ri = s.R(i);
    for (int m = 0; m < M; ++m) {
      const int kk = (i + m) % M;
      const double rk = r[static_cast<std::size_t>(kk)], Rk = s.R(kk);
      const double excess = rr_excess(b, ri, rk);
      const double rr_minus_b2 = excess / (Ri * Rk + b2);
      double g2 = 0.0;
      if (m == 0) {
        g2 = s.dR(i) * s.dR(i);
      } else {
        const double g = 2.0 * (rk - ri) / ((Rk + Ri) * sinh[static_cast<std::size_t>(m)]);
        g2 = 0.25 * g * g;
      }
      k.lv1[k.at(i, m)] = 0.5 * std::log1p((g2 + rr_minus_b2) / b2);
      const double P = (excess - 2.0 * rr_minus_b2 * k.cosu[static_cast<std::size_t>(m)]) /
                       B0sq[static_cast<std::size_t>(m)];
      k.lp[k.at(i, m)] = 0.5 * std::log1p(P);
    }
  }
  return k;
}

}  // namespace vpatch
