#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpatch/dynamics.hpp"
#include "vpatch/errors.hpp"

namespace vpatch {

namespace {

constexpr double kPi = std::numbers::pi;

struct Boundary {
  std::vector<cplx> z, dz;
};

Boundary boundary_points(const PatchState& s) {
  const int M = s.M();
  Boundary bd;
  bd.z.resize(static_cast<std::size_t>(M));
  bd.dz.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const cplx e = std::polar(1.0, 2.0 * kPi * i / M);
    bd.z[static_cast<std::size_t>(i)] = s.R(i) * e;
    bd.dz[static_cast<std::size_t>(i)] = cplx(s.dR(i), s.R(i)) * e;
  }
  return bd;
}

// mu_n = mean(R^{n+2} e^{i n theta}) / (n + 2): the moments int_D w^n dA / (2 pi).
std::vector<cplx> area_moments(const PatchState& s) {
  const int M = s.M();
  const double maxR = s.max_R();
  int nmax = 1;
  while (nmax < M - 1 && std::pow(maxR, 2.0 * nmax) >= 1e-20) ++nmax;
  std::vector<cplx> mu(static_cast<std::size_t>(nmax) + 1, cplx(0.0, 0.0));
  for (int n = 1; n <= nmax; ++n) {
    cplx acc(0.0, 0.0);
    for (int i = 0; i < M; ++i)
      acc += std::pow(s.R(i), n + 2) * std::polar(1.0, 2.0 * kPi * n * static_cast<double>(i) / M);
    mu[static_cast<std::size_t>(n)] = acc / static_cast<double>(M) / static_cast<double>(n + 2);
  }
  return mu;
}

// Gauss-Legendre nodes and weights on [0,1] (Golub-Welsch).
void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    x[static_cast<std::size_t>(k)] = 0.5 * (es.eigenvalues()(k) + 1.0);
    const double v = es.eigenvectors()(0, k);
    w[static_cast<std::size_t>(k)] = v * v;  // 2 v^2 on [-1,1], halved for [0,1]
  }
}

}  // namespace

double energy(const PatchState& s) {
  const PatchKernels K = PatchKernels::build(s);
  const Boundary bd = boundary_points(s);
  const int M = s.M();
  const double c0 = 2.0 * std::log(2.0 * s.b()) - 1.5;
  double planar = 0.0;
  for (int i = 0; i < M; ++i) {
    const cplx zi = std::conj(bd.z[static_cast<std::size_t>(i)]);
    cplx acc(0.0, 0.0);
    for (int m = 0; m < M; ++m) {
      const int k = (i + m) % M;
      const double ker = (c0 + 2.0 * K.lv1[K.at(i, m)]) / M + 2.0 * K.w1[static_cast<std::size_t>(m)];
      const cplx d = std::conj(bd.z[static_cast<std::size_t>(k)]) - zi;
      acc += ker * d * d * bd.dz[static_cast<std::size_t>(k)];
    }
    planar += (acc * bd.dz[static_cast<std::size_t>(i)]).real();
  }
  planar /= 16.0 * M;
  double image = 0.0;
  const auto mu = area_moments(s);
  for (std::size_t n = 1; n < mu.size(); ++n) image += std::norm(mu[n]) / static_cast<double>(n);
  return planar + image;
}

double hamiltonian(const PatchState& s) { return -0.5 * energy(s); }

PeriodicField stream_gradient(const PatchState& s) {
  const PatchKernels K = PatchKernels::build(s);
  const Boundary bd = boundary_points(s);
  const int M = s.M();
  const double c0 = 2.0 * std::log(2.0 * s.b()) - 1.0;
  const auto mu = area_moments(s);
  std::vector<double> g(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const cplx zi = bd.z[static_cast<std::size_t>(i)];
    cplx acc(0.0, 0.0);
    for (int m = 0; m < M; ++m) {
      const int k = (i + m) % M;
      const double ker = (c0 + 2.0 * K.lv1[K.at(i, m)]) / M + 2.0 * K.w1[static_cast<std::size_t>(m)];
      acc += ker * (std::conj(bd.z[static_cast<std::size_t>(k)]) - std::conj(zi)) *
             bd.dz[static_cast<std::size_t>(k)];
    }
    double psi = (acc / cplx(0.0, 4.0)).real();
    cplx zn(1.0, 0.0);
    for (std::size_t n = 1; n < mu.size(); ++n) {
      zn *= zi;
      psi += (zn * std::conj(mu[n])).real() / static_cast<double>(n);
    }
    g[static_cast<std::size_t>(i)] = 2.0 * psi;
  }
  return PeriodicField::from_values({M}, std::move(g));
}

double energy_polar(const PatchState& s, int nr) {
  if (nr < 2) throw invalid_argument("energy_polar: need at least two radial nodes");
  s.require_inside_disc();
  const int M = s.M();
  std::vector<double> x, w;
  gauss_legendre01(nr, x, w);
  std::vector<double> cosu(static_cast<std::size_t>(M)), sinu(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    cosu[static_cast<std::size_t>(m)] = std::cos(2.0 * kPi * m / M);
    sinu[static_cast<std::size_t>(m)] = std::sin(2.0 * kPi * m / M);
  }
  std::vector<cplx> e(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) e[static_cast<std::size_t>(i)] = std::polar(1.0, 2.0 * kPi * i / M);

  double total = 0.0;
  for (int a = 0; a < nr; ++a) {
    for (int b = 0; b < nr; ++b) {
      const double sa = x[static_cast<std::size_t>(a)], sb = x[static_cast<std::size_t>(b)];
      const double smax = std::max(sa, sb);
      const double ratio = std::min(sa, sb) / smax;
      // log|1 - ratio e^{iu}| carries the near-singular part exactly.
      const auto wx = singular_weights(M, [ratio](int k) {
        return k == 0 ? 0.0 : -0.5 * std::pow(ratio, std::abs(k)) / std::abs(k);
      });
      double pair = 0.0;
      for (int i = 0; i < M; ++i) {
        const double Ri = s.R(i);
        double acc = 0.0;
        for (int m = 0; m < M; ++m) {
          const int k = (i + m) % M;
          const double Rk = s.R(k);
          const double g = Ri * Ri * Rk * Rk;
          double rem = 0.0;
          if (a == b && m == 0) {
            rem = std::log(std::hypot(s.dR(i), Ri) / Ri);
          } else {
            const double p = sa * Ri, q = sb * Rk;
            const double num = std::hypot(p - q * cosu[static_cast<std::size_t>(m)], q * sinu[static_cast<std::size_t>(m)]);
            const double den = std::hypot(1.0 - ratio * cosu[static_cast<std::size_t>(m)], ratio * sinu[static_cast<std::size_t>(m)]);
            rem = std::log(num / den) - std::log(smax * Ri);
          }
          const cplx wxi = sa * Ri * e[static_cast<std::size_t>(i)] * sb * Rk * std::conj(e[static_cast<std::size_t>(k)]);
          const double image = -std::log(std::abs(1.0 - wxi));
          acc += g * (wx[static_cast<std::size_t>(m)] + (std::log(smax * Ri) + rem + image) / M);
        }
        pair += acc;
      }
      total += w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)] * sa * sb * pair / M;
    }
  }
  return total;
}

}  // namespace vpatch
