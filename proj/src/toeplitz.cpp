#include "vpatch/toeplitz.hpp"

#include <cmath>

#include "vpatch/errors.hpp"

namespace vpatch {

namespace {

std::vector<int> negate(const std::vector<int>& l) {
  std::vector<int> m(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) m[i] = -l[i];
  return m;
}

std::vector<int> add(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

}  // namespace

ToeplitzOperator::ToeplitzOperator(int d, int L, int J) : d_(d), L_(L), J_(J) {
  if (d < 0 || L < 0 || J < 1) throw invalid_argument("ToeplitzOperator: bad sizes");
  for (const auto& l : enumerate_l(d, L)) sym_.emplace(l, Eigen::MatrixXcd::Zero(2 * J, 2 * J));
}

ToeplitzOperator ToeplitzOperator::identity(int d, int L, int J) {
  return diagonal(d, L, J, [](int) { return cplx(1.0, 0.0); });
}

ToeplitzOperator ToeplitzOperator::diagonal(int d, int L, int J, const std::function<cplx(int)>& a) {
  ToeplitzOperator t(d, L, J);
  auto& b = t.block(std::vector<int>(static_cast<std::size_t>(d), 0));
  for (int i = 0; i < 2 * J; ++i) b(i, i) = a(t.mode(i));
  return t;
}

const Eigen::MatrixXcd& ToeplitzOperator::block(const std::vector<int>& l) const {
  auto it = sym_.find(l);
  if (it == sym_.end()) throw invalid_argument("ToeplitzOperator: l outside support");
  return it->second;
}

Eigen::MatrixXcd& ToeplitzOperator::block(const std::vector<int>& l) {
  auto it = sym_.find(l);
  if (it == sym_.end()) throw invalid_argument("ToeplitzOperator: l outside support");
  return it->second;
}

cplx ToeplitzOperator::entry(const std::vector<int>& l, int j, int k) const {
  return block(l)(index(j), index(k));
}

cplx& ToeplitzOperator::entry(const std::vector<int>& l, int j, int k) {
  return block(l)(index(j), index(k));
}

void ToeplitzOperator::check_compatible(const ToeplitzOperator& o) const {
  if (d_ != o.d_ || L_ != o.L_ || J_ != o.J_)
    throw invalid_argument("ToeplitzOperator: incompatible truncations");
}

ToeplitzOperator ToeplitzOperator::operator+(const ToeplitzOperator& o) const {
  check_compatible(o);
  ToeplitzOperator t = *this;
  for (auto& [l, b] : t.sym_) b += o.block(l);
  return t;
}

ToeplitzOperator ToeplitzOperator::operator-(const ToeplitzOperator& o) const {
  check_compatible(o);
  ToeplitzOperator t = *this;
  for (auto& [l, b] : t.sym_) b -= o.block(l);
  return t;
}

ToeplitzOperator ToeplitzOperator::operator*(cplx s) const {
  ToeplitzOperator t = *this;
  for (auto& kv : t.sym_) kv.second *= s;
  return t;
}

ToeplitzOperator ToeplitzOperator::compose(const ToeplitzOperator& o) const {
  check_compatible(o);
  ToeplitzOperator t(d_, L_, J_);
  for (const auto& [l1, a] : sym_) {
    if (a.isZero(0.0)) continue;
    for (const auto& [l2, b] : o.sym_) {
      if (b.isZero(0.0)) continue;
      auto l = add(l1, l2);
      if (l1_norm(l) > L_) continue;
      t.sym_.at(l).noalias() += a * b;
    }
  }
  return t;
}

double ToeplitzOperator::offdiag_norm(double s) const {
  double acc = 0.0;
  for (const auto& [l, b] : sym_) {
    for (int m = -(2 * J_ - 1); m <= 2 * J_ - 1; ++m) {
      double sup = 0.0;
      for (int r = 0; r < 2 * J_; ++r) {
        const int j = mode(r);
        const int k = j - m;
        if (k == 0 || std::abs(k) > J_) continue;
        sup = std::max(sup, std::abs(b(r, index(k))));
      }
      if (sup > 0.0) acc += std::pow(static_cast<double>(bracket(l, m)), 2.0 * s) * sup * sup;
    }
  }
  return std::sqrt(acc);
}

double ToeplitzOperator::max_abs() const {
  double m = 0.0;
  for (const auto& kv : sym_) m = std::max(m, kv.second.cwiseAbs().maxCoeff());
  return m;
}

double ToeplitzOperator::mirror_defect(int kind) const {
  double worst = 0.0;
  for (const auto& [l, b] : sym_) {
    const auto& bm = block(negate(l));
    for (int r = 0; r < 2 * J_; ++r) {
      for (int c = 0; c < 2 * J_; ++c) {
        const cplx t = b(r, c);
        // Index of -j is 2J - 1 - index(j).
        const cplx tm = bm(2 * J_ - 1 - r, 2 * J_ - 1 - c);
        double e = 0.0;
        if (kind == 0) e = std::abs(tm - std::conj(t));
        if (kind == 1) e = std::abs(tm + t);
        if (kind == 2) e = std::abs(tm - t);
        worst = std::max(worst, e);
      }
    }
  }
  return worst;
}

double ToeplitzOperator::realness_defect() const { return mirror_defect(0); }
double ToeplitzOperator::reversibility_defect() const { return mirror_defect(1); }
double ToeplitzOperator::reversibility_preserving_defect() const { return mirror_defect(2); }

ToeplitzOperator ToeplitzOperator::diagonal_part() const {
  ToeplitzOperator t(d_, L_, J_);
  const std::vector<int> zero(static_cast<std::size_t>(d_), 0);
  t.block(zero).diagonal() = block(zero).diagonal();
  return t;
}

ToeplitzOperator ToeplitzOperator::project(int N) const {
  ToeplitzOperator t = *this;
  for (auto& [l, b] : t.sym_)
    for (int r = 0; r < 2 * J_; ++r)
      for (int c = 0; c < 2 * J_; ++c)
        if (bracket(l, mode(r) - mode(c)) > N) b(r, c) = 0.0;
  return t;
}

LinearOperatorMatrix ToeplitzOperator::to_matrix(int nl) const {
  FourierLattice lat(d_, nl, J_, true);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(lat.size(), lat.size());
  for (int a = 0; a < lat.size(); ++a) {
    for (int b = 0; b < lat.size(); ++b) {
      std::vector<int> dl(static_cast<std::size_t>(d_));
      for (int i = 0; i < d_; ++i)
        dl[static_cast<std::size_t>(i)] =
            lat.site(a).l[static_cast<std::size_t>(i)] - lat.site(b).l[static_cast<std::size_t>(i)];
      if (l1_norm(dl) > L_) continue;
      m(a, b) = entry(dl, lat.site(a).j, lat.site(b).j);
    }
  }
  return {lat, m, true};
}

}  // namespace vpatch
