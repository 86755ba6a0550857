#include "cprojlab/jetmat.hpp"

#include <cmath>

#include "cprojlab/errors.hpp"

namespace cprojlab {

JetMat::JetMat(int rows, int cols, std::shared_ptr<const JetSpace> space)
    : rows_(rows), cols_(cols), space_(std::move(space)) {
  m_.assign(static_cast<size_t>(rows_) * cols_, Jet(space_, 0.0));
}

Eigen::MatrixXd JetMat::value() const {
  Eigen::MatrixXd v(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) v(r, c) = (*this)(r, c).value();
  return v;
}

JetMat JetMat::transpose() const {
  JetMat t(cols_, rows_, space_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Jet JetMat::trace() const {
  Jet s(space_, 0.0);
  for (int r = 0; r < rows_; ++r) s += (*this)(r, r);
  return s;
}

JetMat JetMat::operator*(const JetMat& o) const {
  JetMat out(rows_, o.cols_, space_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < o.cols_; ++c) {
      Jet s(space_, 0.0);
      for (int k = 0; k < cols_; ++k) s += (*this)(r, k) * o(k, c);
      out(r, c) = s;
    }
  return out;
}

JetMat JetMat::operator+(const JetMat& o) const {
  JetMat out = *this;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out(r, c) += o(r, c);
  return out;
}

JetMat JetMat::operator-(const JetMat& o) const {
  JetMat out = *this;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out(r, c) -= o(r, c);
  return out;
}

JetMat JetMat::scaled(const Jet& s) const {
  JetMat out = *this;
  for (auto& e : out.m_) e = e * s;
  return out;
}

JetMat JetMat::scaled(double s) const {
  JetMat out = *this;
  for (auto& e : out.m_) e *= s;
  return out;
}

JetMat JetMat::identity(int n, std::shared_ptr<const JetSpace> space) {
  JetMat out(n, n, space);
  for (int i = 0; i < n; ++i) out(i, i) = Jet::constant(space, 1.0);
  return out;
}

JetMat JetMat::from_constant(const Eigen::MatrixXd& m, std::shared_ptr<const JetSpace> space) {
  JetMat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), space);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out(r, c) = Jet::constant(space, m(r, c));
  return out;
}

Jet JetMat::det() const {
  JetMat a = *this;
  const int n = rows_;
  Jet d = Jet::constant(space_, 1.0);
  std::vector<int> rowidx(n);
  for (int i = 0; i < n; ++i) rowidx[i] = i;
  double sign = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a(rowidx[k], k).value());
    for (int r = k + 1; r < n; ++r)
      if (std::abs(a(rowidx[r], k).value()) > best) {
        best = std::abs(a(rowidx[r], k).value());
        piv = r;
      }
    if (best == 0.0) return Jet::constant(space_, 0.0);
    if (piv != k) {
      std::swap(rowidx[piv], rowidx[k]);
      sign = -sign;
    }
    d = d * a(rowidx[k], k);
    Jet inv_piv = jet_inv(a(rowidx[k], k));
    for (int r = k + 1; r < n; ++r) {
      Jet f = a(rowidx[r], k) * inv_piv;
      for (int c = k; c < n; ++c) a(rowidx[r], c) -= f * a(rowidx[k], c);
    }
  }
  return d * sign;
}

JetMat JetMat::inverse() const {
  const int n = rows_;
  JetMat a = *this;
  JetMat b = identity(n, space_);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a(k, k).value());
    for (int r = k + 1; r < n; ++r)
      if (std::abs(a(r, k).value()) > best) {
        best = std::abs(a(r, k).value());
        piv = r;
      }
    if (best == 0.0) throw SingularSolution("JetMat::inverse: singular at base point");
    if (piv != k)
      for (int c = 0; c < n; ++c) {
        std::swap(a(piv, c), a(k, c));
        std::swap(b(piv, c), b(k, c));
      }
    Jet inv_piv = jet_inv(a(k, k));
    for (int c = 0; c < n; ++c) {
      a(k, c) = a(k, c) * inv_piv;
      b(k, c) = b(k, c) * inv_piv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == k) continue;
      Jet f = a(r, k);
      if (f.value() == 0.0) {
        bool all_zero = true;
        for (double cc : f.coeffs())
          if (cc != 0.0) {
            all_zero = false;
            break;
          }
        if (all_zero) continue;
      }
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(k, c);
        b(r, c) -= f * b(k, c);
      }
    }
  }
  return b;
}

}  // namespace cprojlab
