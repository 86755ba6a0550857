#pragma once

// Truncated multivariate Taylor (jet) arithmetic. A Jet stores the Taylor
// coefficients d^mu f / mu! of a function about a base point, for all
// multi-indices |mu| <= order. All differentiation in the library goes
// through this type; there is no finite differencing anywhere.

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

namespace cprojlab {

constexpr int kMaxVars = 12;  // 2n <= 12 enforced chart-wide

using MultiIndex = std::array<uint8_t, kMaxVars>;

inline int mi_order(const MultiIndex& m, int nvars) {
  int s = 0;
  for (int i = 0; i < nvars; ++i) s += m[i];
  return s;
}

// Index tables for the space of multi-indices with |mu| <= order in nvars
// variables, graded-lexicographic. Instances are cached and shared; lookup
// by (nvars, order) is thread-safe.
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(idx_.size()); }

  const MultiIndex& mindex(int pos) const { return idx_[pos]; }
  int order_of(int pos) const { return ord_[pos]; }
  // position of a multi-index, -1 if |mu| > order
  int position(const MultiIndex& m) const;
  // position of mindex(i)+mindex(j), -1 if the sum exceeds the order
  int mul_target(int i, int j) const;
  // position within this space of mindex(i)+e_k, -1 if above the order
  int raise_target(int i, int var) const;

 private:
  JetSpace(int nvars, int order);
  int nvars_, order_;
  std::vector<MultiIndex> idx_;
  std::vector<int> ord_;
  std::unordered_map<int64_t, int> pos_;
  std::vector<int32_t> multable_;  // dense product table when small enough
  bool has_multable_ = false;
};

class Jet {
 public:
  Jet() = default;
  Jet(std::shared_ptr<const JetSpace> space, double c0 = 0.0);

  static Jet constant(std::shared_ptr<const JetSpace> space, double c);
  static Jet variable(std::shared_ptr<const JetSpace> space, int var, double value);

  bool valid() const { return space_ != nullptr; }
  const JetSpace& space() const { return *space_; }
  std::shared_ptr<const JetSpace> space_ptr() const { return space_; }
  int order() const { return space_->order(); }
  int nvars() const { return space_->nvars(); }

  double value() const { return c_[0]; }
  double coeff(const MultiIndex& m) const;     // d^mu f / mu!
  double partial(const MultiIndex& m) const;   // d^mu f
  double partial1(int var) const;              // first partial
  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }

  Jet truncated(int new_order) const;
  Jet derivative(int var) const;  // order drops by one

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { Jet r = -a; return r += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;
};

Jet jet_inv(const Jet& v);          // 1/v, v.value() != 0
Jet jet_exp(const Jet& u);
Jet jet_log(const Jet& u);          // u.value() > 0
Jet jet_sqrt(const Jet& u);         // u.value() > 0
Jet jet_powi(const Jet& u, long long e);
Jet jet_pow(const Jet& u, double a);  // u.value() > 0

// f is a jet in m variables about y0 = (values of args); args are m jets in
// a common space about x0 with args[i].value() == y0_i. Returns the jet of
// f(args(x)) about x0, truncated to the args' order.
Jet jet_compose(const Jet& f, const std::vector<Jet>& args);

// Treats poly's coefficients as an exact polynomial in its variables and
// evaluates it on the given jets (which may have any base values). Exact
// for polynomial data: used to re-expand stored jet solutions at new
// base points.
Jet jet_poly_eval(const Jet& poly, const std::vector<Jet>& args);

}  // namespace cprojlab
