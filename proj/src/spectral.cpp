#include "vpatch/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpatch/errors.hpp"
#include "vpatch/fft.hpp"

namespace vpatch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t grid_total(const std::vector<int>& grid) {
  if (grid.empty()) throw invalid_argument("PeriodicField: empty grid");
  std::size_t n = 1;
  for (int g : grid) {
    if (!is_power_of_two(g) || g < 2)
      throw invalid_argument("PeriodicField: grid sizes must be powers of two >= 2");
    n *= static_cast<std::size_t>(g);
  }
  return n;
}

// Signed wavenumbers of flat slot idx.
void wavenumbers(const std::vector<int>& grid, std::size_t idx, std::vector<int>& l, int& j) {
  const int d = static_cast<int>(grid.size()) - 1;
  l.assign(static_cast<std::size_t>(d), 0);
  const int M = grid.back();
  j = fft::wavenumber(static_cast<int>(idx % static_cast<std::size_t>(M)), M);
  idx /= static_cast<std::size_t>(M);
  for (int a = d - 1; a >= 0; --a) {
    const int n = grid[static_cast<std::size_t>(a)];
    l[static_cast<std::size_t>(a)] =
        fft::wavenumber(static_cast<int>(idx % static_cast<std::size_t>(n)), n);
    idx /= static_cast<std::size_t>(n);
  }
}

std::vector<cplx> real_to_complex(const std::vector<double>& v) {
  return std::vector<cplx>(v.begin(), v.end());
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int l1_norm(const std::vector<int>& l) {
  int s = 0;
  for (int x : l) s += std::abs(x);
  return s;
}

int bracket(const std::vector<int>& l, int j) {
  return std::max({1, l1_norm(l), std::abs(j)});
}

// ---------------------------------------------------------------------------

PeriodicField PeriodicField::from_values(std::vector<int> grid, std::vector<double> values) {
  const std::size_t n = grid_total(grid);
  if (values.size() != n) throw invalid_argument("PeriodicField: value count does not match grid");
  for (double v : values)
    if (!std::isfinite(v)) throw invalid_argument("PeriodicField: non-finite sample");
  PeriodicField f;
  f.grid_ = std::move(grid);
  f.values_ = std::move(values);
  f.coeffs_ = fft::forward(f.grid_, real_to_complex(f.values_));
  return f;
}

PeriodicField PeriodicField::from_coeffs(std::vector<int> grid, const std::vector<cplx>& coeffs) {
  const std::size_t n = grid_total(grid);
  if (coeffs.size() != n) throw invalid_argument("PeriodicField: coefficient count does not match grid");
  auto synth = fft::inverse(grid, coeffs);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = synth[i].real();
  return from_values(std::move(grid), std::move(v));
}

PeriodicField PeriodicField::zeros(std::vector<int> grid) {
  const std::size_t n = grid_total(grid);
  PeriodicField f;
  f.grid_ = std::move(grid);
  f.values_.assign(n, 0.0);
  f.coeffs_.assign(n, cplx(0.0, 0.0));
  f.zero_mean_ = true;
  return f;
}

PeriodicField PeriodicField::sample(int M, const std::function<double(double)>& fn) {
  std::vector<double> v(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) v[static_cast<std::size_t>(i)] = fn(kTwoPi * i / M);
  return from_values({M}, std::move(v));
}

PeriodicField PeriodicField::sample(
    std::vector<int> grid, const std::function<double(const std::vector<double>&, double)>& fn) {
  const std::size_t n = grid_total(grid);
  PeriodicField shape;
  shape.grid_ = grid;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = fn(shape.phi_of(i), shape.theta_of(i));
  return from_values(std::move(grid), std::move(v));
}

PeriodicField PeriodicField::mode(std::vector<int> grid, const std::vector<int>& l, int j,
                                  bool sine) {
  if (l.size() + 1 != grid.size()) throw invalid_argument("mode: l has wrong dimension");
  return sample(std::move(grid), [&](const std::vector<double>& phi, double th) {
    double a = j * th;
    for (std::size_t k = 0; k < l.size(); ++k) a += l[k] * phi[k];
    return sine ? std::sin(a) : std::cos(a);
  });
}

std::vector<double> PeriodicField::phi_of(std::size_t i) const {
  const int d = angle_dims();
  std::vector<double> phi(static_cast<std::size_t>(std::max(d, 0)), 0.0);
  i /= static_cast<std::size_t>(M());
  for (int a = d - 1; a >= 0; --a) {
    const int n = grid_[static_cast<std::size_t>(a)];
    phi[static_cast<std::size_t>(a)] =
        kTwoPi * static_cast<double>(i % static_cast<std::size_t>(n)) / n;
    i /= static_cast<std::size_t>(n);
  }
  return phi;
}

double PeriodicField::theta_of(std::size_t i) const {
  return kTwoPi * static_cast<double>(i % static_cast<std::size_t>(M())) / M();
}

bool PeriodicField::in_truncation(const std::vector<int>& l, int j) const {
  if (static_cast<int>(l.size()) != angle_dims()) return false;
  for (std::size_t a = 0; a < l.size(); ++a)
    if (2 * std::abs(l[a]) >= grid_[a]) return false;
  return 2 * std::abs(j) < M();
}

std::size_t PeriodicField::coeff_slot(const std::vector<int>& l, int j) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < l.size(); ++a)
    idx = idx * static_cast<std::size_t>(grid_[a]) +
          static_cast<std::size_t>(fft::slot(l[a], grid_[a]));
  return idx * static_cast<std::size_t>(M()) + static_cast<std::size_t>(fft::slot(j, M()));
}

cplx PeriodicField::coeff(const std::vector<int>& l, int j) const {
  if (!in_truncation(l, j)) return {0.0, 0.0};
  return coeffs_[coeff_slot(l, j)];
}

cplx PeriodicField::coeff(int j) const {
  if (dims() != 1) throw invalid_argument("coeff(j): field is not theta-only");
  return coeff({}, j);
}

PeriodicField PeriodicField::with_zero_mean() const {
  PeriodicField f = *this;
  const double m = mean();
  for (double& v : f.values_) v -= m;
  f.coeffs_[0] = cplx(0.0, 0.0);
  f.zero_mean_ = true;
  return f;
}

double PeriodicField::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

void PeriodicField::check_compatible(const PeriodicField& o) const {
  if (grid_ != o.grid_) throw invalid_argument("PeriodicField: grid mismatch");
}

PeriodicField PeriodicField::operator+(const PeriodicField& o) const {
  check_compatible(o);
  PeriodicField f = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    f.values_[i] += o.values_[i];
    f.coeffs_[i] += o.coeffs_[i];
  }
  f.zero_mean_ = zero_mean_ && o.zero_mean_;
  return f;
}

PeriodicField PeriodicField::operator-(const PeriodicField& o) const {
  check_compatible(o);
  PeriodicField f = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    f.values_[i] -= o.values_[i];
    f.coeffs_[i] -= o.coeffs_[i];
  }
  f.zero_mean_ = zero_mean_ && o.zero_mean_;
  return f;
}

PeriodicField PeriodicField::operator*(double s) const {
  PeriodicField f = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    f.values_[i] *= s;
    f.coeffs_[i] *= s;
  }
  return f;
}

PeriodicField PeriodicField::times(const PeriodicField& o) const {
  check_compatible(o);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] * o.values_[i];
  return from_values(grid_, std::move(v));
}

// ---------------------------------------------------------------------------

namespace {

int min_half_grid(const PeriodicField& f) {
  int m = f.grid()[0];
  for (int g : f.grid()) m = std::min(m, g);
  return m / 2;
}

PeriodicField filtered(const PeriodicField& f, const std::function<bool(const std::vector<int>&, int)>& keep) {
  std::vector<cplx> c = f.coeffs();
  std::vector<int> l;
  int j = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    wavenumbers(f.grid(), i, l, j);
    if (!keep(l, j)) c[i] = cplx(0.0, 0.0);
  }
  return PeriodicField::from_coeffs(f.grid(), c);
}

}  // namespace

PeriodicField project(const PeriodicField& f, int N) {
  if (N < 1) throw invalid_argument("project: N must be >= 1");
  if (N >= min_half_grid(f)) throw invalid_argument("project: N exceeds the grid truncation");
  PeriodicField p = filtered(f, [&](const std::vector<int>& l, int j) {
    // The Nyquist slot sits outside every admissible N.
    return bracket(l, j) <= N;
  });
  return f.zero_mean_flag() ? p.with_zero_mean() : p;
}

PeriodicField project_complement(const PeriodicField& f, int N) { return f - project(f, N); }

double sobolev_norm(const PeriodicField& f, double s) {
  const auto& c = f.coeffs();
  std::vector<int> l;
  int j = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    wavenumbers(f.grid(), i, l, j);
    acc += std::pow(static_cast<double>(bracket(l, j)), 2.0 * s) * std::norm(c[i]);
  }
  return std::sqrt(acc);
}

namespace {

PeriodicField multiply_coeffs(const PeriodicField& f, const std::function<cplx(const std::vector<int>&, int, bool)>& m) {
  std::vector<cplx> c = f.coeffs();
  std::vector<int> l;
  int j = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    wavenumbers(f.grid(), i, l, j);
    bool nyquist = (2 * std::abs(j) == f.M());
    for (std::size_t a = 0; a < l.size(); ++a) nyquist = nyquist || 2 * std::abs(l[a]) == f.grid()[a];
    c[i] *= m(l, j, nyquist);
  }
  return PeriodicField::from_coeffs(f.grid(), c);
}

}  // namespace

PeriodicField derivative_theta(const PeriodicField& f) {
  PeriodicField d = multiply_coeffs(f, [](const std::vector<int>&, int j, bool nyq) {
    return nyq ? cplx(0.0, 0.0) : cplx(0.0, static_cast<double>(j));
  });
  return d.with_zero_mean();
}

PeriodicField derivative_phi(const PeriodicField& f, int axis) {
  if (axis < 0 || axis >= f.angle_dims()) throw invalid_argument("derivative_phi: bad axis");
  PeriodicField d = multiply_coeffs(f, [axis](const std::vector<int>& l, int, bool nyq) {
    return nyq ? cplx(0.0, 0.0) : cplx(0.0, static_cast<double>(l[static_cast<std::size_t>(axis)]));
  });
  return d.with_zero_mean();
}

PeriodicField antiderivative(const PeriodicField& f) {
  const auto& c = f.coeffs();
  double scale = 0.0;
  for (const auto& x : c) scale = std::max(scale, std::abs(x));
  std::vector<int> l;
  int j = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    wavenumbers(f.grid(), i, l, j);
    if (j == 0 && std::abs(c[i]) > 1e-12 * std::max(1.0, scale))
      throw invalid_argument("antiderivative: field has a nonzero theta-mean");
  }
  PeriodicField a = multiply_coeffs(f, [](const std::vector<int>&, int jj, bool nyq) {
    if (jj == 0 || nyq) return cplx(0.0, 0.0);
    return cplx(0.0, -1.0 / jj);
  });
  return a.with_zero_mean();
}

double inner(const PeriodicField& a, const PeriodicField& b) {
  if (a.grid() != b.grid()) throw invalid_argument("inner: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.value(i) * b.value(i);
  return s / static_cast<double>(a.size());
}

double symplectic_pairing(const PeriodicField& r, const PeriodicField& h) {
  if (std::abs(h.mean()) > 1e-12 * std::max(1.0, h.sup_norm()))
    throw invalid_argument("symplectic_pairing: h has nonzero mean");
  return inner(antiderivative(r), h);
}

PeriodicField reflect(const PeriodicField& f) {
  const auto& g = f.grid();
  std::vector<double> v(f.size());
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    // Map each axis index k -> (n - k) mod n.
    std::size_t rem = i, out = 0, stride = 1;
    std::vector<std::size_t> idx(g.size());
    for (int a = static_cast<int>(g.size()) - 1; a >= 0; --a) {
      const auto na = static_cast<std::size_t>(g[static_cast<std::size_t>(a)]);
      idx[static_cast<std::size_t>(a)] = rem % na;
      rem /= na;
    }
    for (int a = static_cast<int>(g.size()) - 1; a >= 0; --a) {
      const auto na = static_cast<std::size_t>(g[static_cast<std::size_t>(a)]);
      out += ((na - idx[static_cast<std::size_t>(a)]) % na) * stride;
      stride *= na;
    }
    v[out] = f.value(i);
  }
  return PeriodicField::from_values(g, std::move(v));
}

double evaluate_at(const PeriodicField& f, double theta) {
  if (f.dims() != 1) throw invalid_argument("evaluate_at: field is not theta-only");
  const int M = f.M();
  const auto& c = f.coeffs();
  double s = c[0].real();
  for (int j = 1; j < M / 2; ++j) {
    const cplx e(std::cos(j * theta), std::sin(j * theta));
    s += 2.0 * (c[static_cast<std::size_t>(j)] * e).real();
  }
  s += c[static_cast<std::size_t>(M / 2)].real() * std::cos(0.5 * M * theta);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<int>> enumerate_l(int d, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> l(static_cast<std::size_t>(d), -n);
  if (d == 0) return {std::vector<int>{}};
  while (true) {
    if (l1_norm(l) <= n) out.push_back(l);
    int a = d - 1;
    while (a >= 0 && l[static_cast<std::size_t>(a)] == n) {
      l[static_cast<std::size_t>(a)] = -n;
      --a;
    }
    if (a < 0) break;
    ++l[static_cast<std::size_t>(a)];
  }
  return out;
}

FourierLattice::FourierLattice(int d, int nl, int nj, bool skip_zero_j)
    : d_(d), nl_(nl), nj_(nj), skip_zero_j_(skip_zero_j) {
  if (d < 0 || nl < 0 || nj < 0) throw invalid_argument("FourierLattice: negative size");
  for (const auto& l : enumerate_l(d, nl)) {
    for (int j = -nj; j <= nj; ++j) {
      if (skip_zero_j && j == 0) continue;
      index_[{l, j}] = static_cast<int>(sites_.size());
      sites_.push_back(Site{l, j});
    }
  }
}

int FourierLattice::index_of(const std::vector<int>& l, int j) const {
  auto it = index_.find({l, j});
  return it == index_.end() ? -1 : it->second;
}

LinearOperatorMatrix::LinearOperatorMatrix(FourierLattice lattice, Eigen::MatrixXcd entries,
                                           bool toeplitz_in_time)
    : lattice_(std::move(lattice)), entries_(std::move(entries)), toeplitz_(toeplitz_in_time) {
  if (entries_.rows() != lattice_.size() || entries_.cols() != lattice_.size())
    throw invalid_argument("LinearOperatorMatrix: entry matrix does not match lattice");
}

LinearOperatorMatrix LinearOperatorMatrix::identity(const FourierLattice& lattice) {
  return {lattice, Eigen::MatrixXcd::Identity(lattice.size(), lattice.size()), true};
}

LinearOperatorMatrix LinearOperatorMatrix::multiplier(const FourierLattice& lattice,
                                                      const std::function<cplx(int)>& a) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(lattice.size(), lattice.size());
  for (int i = 0; i < lattice.size(); ++i) m(i, i) = a(lattice.site(i).j);
  return {lattice, m, true};
}

cplx LinearOperatorMatrix::entry(const std::vector<int>& l, int j, const std::vector<int>& l0,
                                 int j0) const {
  const int a = lattice_.index_of(l, j), b = lattice_.index_of(l0, j0);
  if (a < 0 || b < 0) return {0.0, 0.0};
  return entries_(a, b);
}

double LinearOperatorMatrix::symmetry_defect(int kind) const {
  const int n = lattice_.size();
  std::vector<int> mirror(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const Site& s = lattice_.site(a);
    std::vector<int> ml(s.l.size());
    for (std::size_t k = 0; k < ml.size(); ++k) ml[k] = -s.l[k];
    mirror[static_cast<std::size_t>(a)] = lattice_.index_of(ml, -s.j);
  }
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const cplx t = entries_(a, b);
      const cplx tm = entries_(mirror[static_cast<std::size_t>(a)], mirror[static_cast<std::size_t>(b)]);
      double e = 0.0;
      if (kind == 0) e = std::abs(tm - std::conj(t));
      if (kind == 1) e = std::abs(tm + t);
      if (kind == 2) e = std::abs(tm - t);
      worst = std::max(worst, e);
    }
  }
  return worst;
}

bool LinearOperatorMatrix::is_real(double tol) const { return symmetry_defect(0) <= tol; }
bool LinearOperatorMatrix::is_reversible(double tol) const { return symmetry_defect(1) <= tol; }
bool LinearOperatorMatrix::is_reversibility_preserving(double tol) const {
  return symmetry_defect(2) <= tol;
}

bool LinearOperatorMatrix::check_toeplitz(double tol) const {
  std::map<std::tuple<std::vector<int>, int, int>, cplx> seen;
  const int n = lattice_.size();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Site& sa = lattice_.site(a);
      const Site& sb = lattice_.site(b);
      std::vector<int> dl(sa.l.size());
      for (std::size_t k = 0; k < dl.size(); ++k) dl[k] = sa.l[k] - sb.l[k];
      auto key = std::make_tuple(dl, sa.j, sb.j);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(key, entries_(a, b));
      } else if (std::abs(it->second - entries_(a, b)) > tol) {
        return false;
      }
    }
  }
  return true;
}

double LinearOperatorMatrix::max_offdiagonal() const {
  double m = 0.0;
  for (int a = 0; a < entries_.rows(); ++a)
    for (int b = 0; b < entries_.cols(); ++b)
      if (a != b) m = std::max(m, std::abs(entries_(a, b)));
  return m;
}

double offdiag_norm(const LinearOperatorMatrix& op, double s) {
  if (!op.toeplitz_in_time()) throw invalid_argument("offdiag_norm: operator is not Toeplitz in time");
  const auto& lat = op.lattice();
  std::map<std::pair<std::vector<int>, int>, double> band_sup;
  for (int a = 0; a < lat.size(); ++a) {
    for (int b = 0; b < lat.size(); ++b) {
      const Site& sa = lat.site(a);
      const Site& sb = lat.site(b);
      std::vector<int> dl(sa.l.size());
      for (std::size_t k = 0; k < dl.size(); ++k) dl[k] = sa.l[k] - sb.l[k];
      double& v = band_sup[{dl, sa.j - sb.j}];
      v = std::max(v, std::abs(op.entries()(a, b)));
    }
  }
  double acc = 0.0;
  for (const auto& [key, sup] : band_sup)
    acc += std::pow(static_cast<double>(bracket(key.first, key.second)), 2.0 * s) * sup * sup;
  return std::sqrt(acc);
}

PeriodicField apply_operator(const LinearOperatorMatrix& op, const PeriodicField& f) {
  const auto& lat = op.lattice();
  if (f.angle_dims() != lat.d()) throw invalid_argument("apply_operator: dimension mismatch");
  if (2 * lat.nj() >= f.M()) throw invalid_argument("apply_operator: truncation exceeds grid");
  for (int a = 0; a < lat.d(); ++a)
    if (2 * lat.nl() >= f.grid()[static_cast<std::size_t>(a)])
      throw invalid_argument("apply_operator: truncation exceeds grid");
  Eigen::VectorXcd x(lat.size());
  for (int b = 0; b < lat.size(); ++b) x(b) = f.coeff(lat.site(b).l, lat.site(b).j);
  Eigen::VectorXcd y = op.entries() * x;
  std::vector<cplx> c(f.size(), cplx(0.0, 0.0));
  for (int a = 0; a < lat.size(); ++a) c[f.coeff_slot(lat.site(a).l, lat.site(a).j)] = y(a);
  PeriodicField out = PeriodicField::from_coeffs(f.grid(), c);
  return lat.skip_zero_j() && lat.d() == 0 ? out.with_zero_mean() : out;
}

}  // namespace vpatch
