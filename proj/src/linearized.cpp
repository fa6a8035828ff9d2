#include "vpatch/linearized.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "vpatch/errors.hpp"
#include "vpatch/frequencies.hpp"

namespace vpatch {

namespace {

constexpr double kPi = std::numbers::pi;

// sum_m k(i, m) rho(theta_i + u_m) for each i.
template <class Ker>
PeriodicField shifted_convolution(const PeriodicField& rho, int M, Ker&& k) {
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += k(i, m) * rho.value(static_cast<std::size_t>((i + m) % M));
    out[static_cast<std::size_t>(i)] = acc;
  }
  return PeriodicField::from_values({M}, std::move(out));
}

void require_theta_field(const PeriodicField& rho, int M) {
  if (rho.dims() != 1 || rho.M() != M) throw invalid_argument("linearized operator: field grid mismatch");
}

}  // namespace

Linearization::Linearization(const PatchState& s) : b_(s.b()), K_(PatchKernels::build(s)) {
  const int M = s.M();
  const double area = s.b() * s.b() + 2.0 * s.r().mean();
  std::vector<double> V(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const double Ri = s.R(i);
    double s1 = 0.0, s2 = 0.0;
    for (int m = 0; m < M; ++m) {
      const int k = (i + m) % M;
      const double a = s.dR(k) * K_.sinu[static_cast<std::size_t>(m)] + s.R(k) * K_.cosu[static_cast<std::size_t>(m)];
      s1 += K_.k1(i, m) * a;
      s2 += K_.k2(i, m) * a;
    }
    V[static_cast<std::size_t>(i)] = -0.5 * area / (Ri * Ri) - s1 / Ri - s2 / (Ri * Ri * Ri);
  }
  V_ = PeriodicField::from_values({M}, std::move(V));
}

PeriodicField Linearization::L(const PeriodicField& rho) const {
  require_theta_field(rho, K_.M);
  const double c = std::log(2.0 * b_) * rho.mean();
  auto out = shifted_convolution(rho, K_.M, [this](int i, int m) { return K_.k1(i, m); });
  std::vector<double> v = out.values();
  for (double& x : v) x += c;
  return PeriodicField::from_values({K_.M}, std::move(v));
}

PeriodicField Linearization::S(const PeriodicField& rho) const {
  require_theta_field(rho, K_.M);
  return shifted_convolution(rho, K_.M, [this](int i, int m) { return K_.k2(i, m); });
}

PeriodicField Linearization::apply(const PeriodicField& rho) const {
  return -derivative_theta(V_.times(rho) + L(rho) - S(rho));
}

PeriodicField transport_coefficient(const PatchState& s) { return Linearization(s).V(); }
PeriodicField nonlocal_L(const PatchState& s, const PeriodicField& rho) { return Linearization(s).L(rho); }
PeriodicField smoothing_S(const PatchState& s, const PeriodicField& rho) { return Linearization(s).S(rho); }
PeriodicField apply_generator(const PatchState& s, const PeriodicField& rho) {
  return Linearization(s).apply(rho);
}

namespace {

LinearOperatorMatrix assemble_from(const Linearization& lin, int M, int N) {
  if (N < 1 || 3 * N > M) throw invalid_argument("assemble: need 1 <= N <= M/3");
  FourierLattice lat(0, 0, N, true);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(lat.size(), lat.size());
  for (int j = 1; j <= N; ++j) {
    const PeriodicField gc = lin.apply(PeriodicField::mode({M}, {}, j, false));
    const PeriodicField gs = lin.apply(PeriodicField::mode({M}, {}, j, true));
    for (int row = 0; row < lat.size(); ++row) {
      const int jr = lat.site(row).j;
      const cplx c = gc.coeff(jr), sn = gs.coeff(jr);
      // e^{+-ij theta} = cos(j theta) +- i sin(j theta).
      m(row, lat.index_of({}, j)) = c + cplx(0.0, 1.0) * sn;
      m(row, lat.index_of({}, -j)) = c - cplx(0.0, 1.0) * sn;
    }
  }
  return {lat, m, true};
}

}  // namespace

LinearOperatorMatrix assemble(const PatchState& s, int N) {
  if (N < 1 || 3 * N > s.M()) throw invalid_argument("assemble: need 1 <= N <= M/3");
  return assemble_from(Linearization(s), s.M(), N);
}

LinearizedPieces linearized_pieces(const PatchState& s, int N) {
  if (N < 1 || 3 * N > s.M()) throw invalid_argument("assemble: need 1 <= N <= M/3");
  Linearization lin(s);
  return {lin.V(), lin.kernels(), assemble_from(lin, s.M(), N)};
}

cplx equilibrium_multiplier(double b, int j) {
  if (j == 0) throw invalid_argument("equilibrium_multiplier: j = 0");
  if (!(b > 0.0 && b < 1.0)) throw invalid_argument("equilibrium_multiplier: b outside (0,1)");
  return {0.0, -omega(b, j)};
}

double log_sin_moment(int j, int M) {
  constexpr int kNodes = 16;
  const int panels = std::max(4, M / kNodes);
  const int graded = std::min(24, panels / 2);
  const int uniform = panels - graded - 1;
  auto f = [j](double x) { return std::log(std::sin(0.5 * x) * std::sin(0.5 * x)) * std::cos(j * x); };
  using GL = boost::math::quadrature::gauss<double, kNodes>;
  // Even integrand: (1/pi) int_0^pi.
  const double split = kPi / 8.0;
  double total = 0.0;
  const double h = (kPi - split) / uniform;
  for (int p = 0; p < uniform; ++p) total += GL::integrate(f, split + p * h, split + (p + 1) * h);
  double hi = split;
  for (int p = 0; p < graded; ++p) {
    total += GL::integrate(f, 0.25 * hi, hi);
    hi *= 0.25;
  }
  total += GL::integrate(f, 0.0, hi);
  return total / kPi;
}

double log_disc_moment(double b, int j, int M) {
  double acc = 0.0;
  const double b2 = b * b;
  for (int m = 0; m < M; ++m) {
    const double u = 2.0 * kPi * m / M;
    acc += 0.5 * std::log1p(b2 * b2 - 2.0 * b2 * std::cos(u)) * std::cos(j * u);
  }
  return acc / M;
}

double linear_flow_residual(double b, const std::map<int, double>& amplitudes, double t, int M) {
  const PatchState disc = PatchState::disc(b, M);
  auto rho = PeriodicField::sample(M, [&](double th) {
    double v = 0.0;
    for (const auto& [j, a] : amplitudes) v += a * std::cos(j * th - omega(b, j) * t);
    return v;
  });
  auto drho = PeriodicField::sample(M, [&](double th) {
    double v = 0.0;
    for (const auto& [j, a] : amplitudes) v += a * omega(b, j) * std::sin(j * th - omega(b, j) * t);
    return v;
  });
  return (drho - apply_generator(disc, rho)).sup_norm();
}

}  // namespace vpatch
