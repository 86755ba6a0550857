#include "cprojlab/jets.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "cprojlab/errors.hpp"

namespace cprojlab {

namespace {

int64_t pack_key(const MultiIndex& m, int nvars) {
  int64_t k = 0;
  for (int i = 0; i < nvars; ++i) k = (k << 5) | m[i];
  return k;
}

void enumerate(int nvars, int order, std::vector<MultiIndex>& out) {
  // graded lex: all |mu| = d for d = 0..order
  MultiIndex m{};
  for (int d = 0; d <= order; ++d) {
    // first composition of d into nvars parts, lex-descending on the fly
    std::fill(m.begin(), m.end(), 0);
    m[0] = static_cast<uint8_t>(d);
    while (true) {
      out.push_back(m);
      // next composition of d (colex-style increment)
      int i = nvars - 2;
      while (i >= 0 && m[i] == 0) --i;
      if (i < 0) break;
      int rest = m[nvars - 1];
      m[i] -= 1;
      m[i + 1] = static_cast<uint8_t>(rest + 1);
      if (i + 1 != nvars - 1) m[nvars - 1] = 0;
      if (d == 0) break;
    }
    if (d == 0) continue;
  }
}

}  // namespace

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
  assert(nvars >= 1 && nvars <= kMaxVars);
  assert(order >= 0 && order <= 31);
  enumerate(nvars, order, idx_);
  ord_.resize(idx_.size());
  pos_.reserve(idx_.size() * 2);
  for (size_t i = 0; i < idx_.size(); ++i) {
    ord_[i] = mi_order(idx_[i], nvars);
    pos_[pack_key(idx_[i], nvars)] = static_cast<int>(i);
  }
  const int P = size();
  if (static_cast<long long>(P) * P <= 20'000'000LL) {
    multable_.assign(static_cast<size_t>(P) * P, -1);
    for (int i = 0; i < P; ++i) {
      for (int j = 0; j < P; ++j) {
        if (ord_[i] + ord_[j] > order_) continue;
        MultiIndex s;
        for (int k = 0; k < nvars_; ++k) s[k] = static_cast<uint8_t>(idx_[i][k] + idx_[j][k]);
        for (int k = nvars_; k < kMaxVars; ++k) s[k] = 0;
        multable_[static_cast<size_t>(i) * P + j] = position(s);
      }
    }
    has_multable_ = true;
  }
}

int JetSpace::position(const MultiIndex& m) const {
  if (mi_order(m, nvars_) > order_) return -1;
  auto it = pos_.find(pack_key(m, nvars_));
  return it == pos_.end() ? -1 : it->second;
}

int JetSpace::mul_target(int i, int j) const {
  if (has_multable_) return multable_[static_cast<size_t>(i) * size() + j];
  if (ord_[i] + ord_[j] > order_) return -1;
  MultiIndex s;
  for (int k = 0; k < nvars_; ++k) s[k] = static_cast<uint8_t>(idx_[i][k] + idx_[j][k]);
  for (int k = nvars_; k < kMaxVars; ++k) s[k] = 0;
  return position(s);
}

int JetSpace::raise_target(int i, int var) const {
  if (ord_[i] + 1 > order_) return -1;
  MultiIndex s = idx_[i];
  s[var] += 1;
  return position(s);
}

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(nvars, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto sp = std::shared_ptr<const JetSpace>(new JetSpace(nvars, order));
  cache[key] = sp;
  return sp;
}

Jet::Jet(std::shared_ptr<const JetSpace> space, double c0) : space_(std::move(space)) {
  c_.assign(space_->size(), 0.0);
  c_[0] = c0;
}

Jet Jet::constant(std::shared_ptr<const JetSpace> space, double c) { return Jet(std::move(space), c); }

Jet Jet::variable(std::shared_ptr<const JetSpace> space, int var, double value) {
  Jet j(std::move(space), value);
  if (j.order() >= 1) {
    MultiIndex m{};
    m[var] = 1;
    int p = j.space().position(m);
    j.c_[p] = 1.0;
  }
  return j;
}

double Jet::coeff(const MultiIndex& m) const {
  int p = space_->position(m);
  if (p < 0) throw std::out_of_range("multi-index above jet order");
  return c_[p];
}

double Jet::partial(const MultiIndex& m) const {
  double f = 1.0;
  for (int i = 0; i < nvars(); ++i)
    for (int k = 2; k <= m[i]; ++k) f *= k;
  return coeff(m) * f;
}

double Jet::partial1(int var) const {
  MultiIndex m{};
  m[var] = 1;
  return coeff(m);
}

Jet Jet::truncated(int new_order) const {
  if (new_order == order()) return *this;
  assert(new_order < order());
  Jet r(JetSpace::get(nvars(), new_order));
  for (int i = 0; i < r.space().size(); ++i) r.c_[i] = c_[space_->position(r.space().mindex(i))];
  return r;
}

Jet Jet::derivative(int var) const {
  assert(order() >= 1);
  Jet r(JetSpace::get(nvars(), order() - 1));
  for (int i = 0; i < r.space().size(); ++i) {
    MultiIndex m = r.space().mindex(i);
    m[var] += 1;
    int p = space_->position(m);
    r.c_[i] = c_[p] * m[var];
  }
  return r;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& x : r.c_) x = -x;
  return r;
}

namespace {
// align two jets to a common (minimum) order
void align(const Jet& a, const Jet& b, Jet& oa, Jet& ob) {
  if (a.order() == b.order()) {
    oa = a;
    ob = b;
  } else if (a.order() < b.order()) {
    oa = a;
    ob = b.truncated(a.order());
  } else {
    oa = a.truncated(b.order());
    ob = b;
  }
}
}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  if (o.order() < order()) *this = truncated(o.order());
  const Jet rhs = (o.order() > order()) ? o.truncated(order()) : o;
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += rhs.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.order() < order()) *this = truncated(o.order());
  const Jet rhs = (o.order() > order()) ? o.truncated(order()) : o;
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= rhs.c_[i];
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet x, y;
  align(a, b, x, y);
  const JetSpace& sp = x.space();
  Jet r(x.space_ptr());
  const int P = sp.size();
  const auto& xc = x.coeffs();
  const auto& yc = y.coeffs();
  auto& rc = r.coeffs();
  for (int i = 0; i < P; ++i) {
    const double xi = xc[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < P; ++j) {
      const double yj = yc[j];
      if (yj == 0.0) continue;
      const int t = sp.mul_target(i, j);
      if (t < 0) continue;
      rc[t] += xi * yj;
    }
  }
  return r;
}

namespace {
// series of f(u) where s = u - u0 has no constant term: sum_k a_k s^k
Jet analytic_series(const Jet& u, const std::vector<double>& a) {
  Jet s = u;
  s -= u.value();
  Jet r = Jet::constant(u.space_ptr(), a[0]);
  Jet p = Jet::constant(u.space_ptr(), 1.0);
  const int K = u.order();
  for (int k = 1; k <= K; ++k) {
    p = p * s;
    if (a[k] != 0.0) {
      Jet t = p;
      t *= a[k];
      r += t;
    }
  }
  return r;
}
}  // namespace

Jet jet_inv(const Jet& v) {
  const double v0 = v.value();
  if (v0 == 0.0) throw DomainError("division by zero in jet arithmetic");
  const int K = v.order();
  std::vector<double> a(K + 1);
  double p = 1.0 / v0;
  for (int k = 0; k <= K; ++k) {
    a[k] = p;
    p *= -1.0 / v0;
  }
  return analytic_series(v, a);
}

Jet operator/(const Jet& a, const Jet& b) { return a * jet_inv(b); }

Jet jet_exp(const Jet& u) {
  const int K = u.order();
  std::vector<double> a(K + 1);
  double e = std::exp(u.value());
  double f = 1.0;
  for (int k = 0; k <= K; ++k) {
    a[k] = e / f;
    f *= (k + 1);
  }
  return analytic_series(u, a);
}

Jet jet_log(const Jet& u) {
  const double u0 = u.value();
  if (!(u0 > 0.0)) throw DomainError("log of non-positive value in jet arithmetic");
  const int K = u.order();
  std::vector<double> a(K + 1);
  a[0] = std::log(u0);
  double p = 1.0 / u0;
  for (int k = 1; k <= K; ++k) {
    a[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
    p /= u0;
  }
  return analytic_series(u, a);
}

Jet jet_sqrt(const Jet& u) { return jet_pow(u, 0.5); }

Jet jet_powi(const Jet& u, long long e) {
  if (e == 0) return Jet::constant(u.space_ptr(), 1.0);
  bool neg = e < 0;
  unsigned long long n = neg ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
  Jet base = u;
  Jet r = Jet::constant(u.space_ptr(), 1.0);
  while (n) {
    if (n & 1ULL) r = r * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return neg ? jet_inv(r) : r;
}

Jet jet_pow(const Jet& u, double a) {
  const double u0 = u.value();
  if (!(u0 > 0.0)) throw DomainError("real power of non-positive value in jet arithmetic");
  const int K = u.order();
  std::vector<double> c(K + 1);
  // c_k = binom(a,k) u0^{a-k}
  double acc = std::pow(u0, a);
  c[0] = acc;
  double binom = 1.0;
  for (int k = 1; k <= K; ++k) {
    binom *= (a - (k - 1)) / k;
    c[k] = binom * std::pow(u0, a - k);
  }
  return analytic_series(u, c);
}

Jet jet_poly_eval(const Jet& poly, const std::vector<Jet>& args) {
  const int m = poly.nvars();
  assert(static_cast<int>(args.size()) == m);
  auto xsp = args[0].space_ptr();
  int maxdeg = 0;
  const JetSpace& fs = poly.space();
  for (int pos = 0; pos < fs.size(); ++pos)
    if (poly.coeffs()[pos] != 0.0) maxdeg = std::max(maxdeg, fs.order_of(pos));
  std::vector<std::vector<Jet>> pw(m);
  for (int i = 0; i < m; ++i) {
    pw[i].resize(maxdeg + 1);
    pw[i][0] = Jet::constant(xsp, 1.0);
    for (int p = 1; p <= maxdeg; ++p) pw[i][p] = pw[i][p - 1] * args[i];
  }
  Jet r = Jet::constant(xsp, 0.0);
  for (int pos = 0; pos < fs.size(); ++pos) {
    const double cv = poly.coeffs()[pos];
    if (cv == 0.0) continue;
    const MultiIndex& mu = fs.mindex(pos);
    Jet term = Jet::constant(xsp, cv);
    for (int i = 0; i < m; ++i)
      if (mu[i] > 0) term = term * pw[i][mu[i]];
    r += term;
  }
  return r;
}

Jet jet_compose(const Jet& f, const std::vector<Jet>& args) {
  const int m = f.nvars();
  assert(static_cast<int>(args.size()) == m);
  auto xsp = args[0].space_ptr();
  const int K = args[0].order();
  // powers of (args[i] - value) up to K
  std::vector<std::vector<Jet>> pw(m);
  for (int i = 0; i < m; ++i) {
    Jet d = args[i];
    d -= args[i].value();
    pw[i].resize(K + 1);
    pw[i][0] = Jet::constant(xsp, 1.0);
    for (int p = 1; p <= K; ++p) pw[i][p] = pw[i][p - 1] * d;
  }
  Jet r = Jet::constant(xsp, 0.0);
  const JetSpace& fs = f.space();
  for (int pos = 0; pos < fs.size(); ++pos) {
    const double cv = f.coeffs()[pos];
    if (cv == 0.0) continue;
    const MultiIndex& mu = fs.mindex(pos);
    if (fs.order_of(pos) > K) continue;
    Jet term = Jet::constant(xsp, cv);
    for (int i = 0; i < m; ++i)
      if (mu[i] > 0) term = term * pw[i][mu[i]];
    r += term;
  }
  return r;
}

}  // namespace cprojlab
