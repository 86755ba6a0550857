#include "cprojlab/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace cprojlab {

TensorValue::TensorValue(int dim, std::vector<Slot> signature) : dim_(dim), sig_(std::move(signature)) {
  int sz = 1;
  stride_.assign(sig_.size(), 0);
  for (int k = rank() - 1; k >= 0; --k) {
    stride_[k] = sz;
    sz *= dim_;
  }
  data_.assign(sz, 0.0);
}

TensorValue TensorValue::from_matrix(const Eigen::MatrixXd& m, Slot row, Slot col) {
  TensorValue t(static_cast<int>(m.rows()), {row, col});
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) t.data_[i * t.stride_[0] + j] = m(i, j);
  return t;
}

TensorValue TensorValue::from_vector(const Eigen::VectorXd& v, Slot s) {
  TensorValue t(static_cast<int>(v.size()), {s});
  for (int i = 0; i < v.size(); ++i) t.data_[i] = v[i];
  return t;
}

int TensorValue::offset(const std::vector<int>& idx) const {
  int o = 0;
  for (int k = 0; k < rank(); ++k) o += idx[k] * stride_[k];
  return o;
}

double& TensorValue::at(std::initializer_list<int> idx) {
  assert(static_cast<int>(idx.size()) == rank());
  int o = 0, k = 0;
  for (int i : idx) o += i * stride_[k++];
  return data_[o];
}

double TensorValue::at(std::initializer_list<int> idx) const {
  assert(static_cast<int>(idx.size()) == rank());
  int o = 0, k = 0;
  for (int i : idx) o += i * stride_[k++];
  return data_[o];
}

TensorValue TensorValue::contract(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= rank() || j >= rank())
    throw SignatureError("contract: invalid slot indices");
  if (sig_[i] == sig_[j]) throw SignatureError("contract: slots have the same variance");
  if (i > j) std::swap(i, j);
  std::vector<Slot> nsig;
  for (int k = 0; k < rank(); ++k)
    if (k != i && k != j) nsig.push_back(sig_[k]);
  TensorValue out(dim_, nsig);
  std::vector<int> idx(rank(), 0), oidx;
  oidx.reserve(rank() - 2);
  // iterate over all output indices and sum the diagonal
  const int orank = out.rank();
  std::vector<int> oi(orank, 0);
  while (true) {
    // map output indices back to input slots
    int p = 0;
    for (int k = 0; k < rank(); ++k)
      if (k != i && k != j) idx[k] = oi[p++];
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
      idx[i] = d;
      idx[j] = d;
      s += data_[offset(idx)];
    }
    out.data_[out.offset(oi)] = s;
    // increment oi
    int k = orank - 1;
    while (k >= 0) {
      if (++oi[k] < dim_) break;
      oi[k] = 0;
      --k;
    }
    if (k < 0) break;
    if (orank == 0) break;
  }
  return out;
}

TensorValue TensorValue::permute(const std::vector<int>& perm) const {
  assert(static_cast<int>(perm.size()) == rank());
  std::vector<Slot> nsig(rank());
  for (int k = 0; k < rank(); ++k) nsig[k] = sig_[perm[k]];
  TensorValue out(dim_, nsig);
  std::vector<int> oi(rank(), 0), idx(rank(), 0);
  while (true) {
    for (int k = 0; k < rank(); ++k) idx[perm[k]] = oi[k];
    out.data_[out.offset(oi)] = data_[offset(idx)];
    int k = rank() - 1;
    while (k >= 0) {
      if (++oi[k] < dim_) break;
      oi[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

TensorValue TensorValue::symmetrize(int i, int j) const {
  std::vector<int> perm(rank());
  for (int k = 0; k < rank(); ++k) perm[k] = k;
  std::swap(perm[i], perm[j]);
  TensorValue sw = permute(perm);
  TensorValue out = *this;
  for (size_t k = 0; k < data_.size(); ++k) out.data_[k] = 0.5 * (data_[k] + sw.data_[k]);
  return out;
}

TensorValue TensorValue::antisymmetrize(int i, int j) const {
  std::vector<int> perm(rank());
  for (int k = 0; k < rank(); ++k) perm[k] = k;
  std::swap(perm[i], perm[j]);
  TensorValue sw = permute(perm);
  TensorValue out = *this;
  for (size_t k = 0; k < data_.size(); ++k) out.data_[k] = 0.5 * (data_[k] - sw.data_[k]);
  return out;
}

TensorValue TensorValue::outer(const TensorValue& o) const {
  std::vector<Slot> nsig = sig_;
  nsig.insert(nsig.end(), o.sig_.begin(), o.sig_.end());
  TensorValue out(dim_, nsig);
  for (size_t a = 0; a < data_.size(); ++a)
    for (size_t b = 0; b < o.data_.size(); ++b) out.data_[a * o.data_.size() + b] = data_[a] * o.data_[b];
  return out;
}

TensorValue& TensorValue::operator+=(const TensorValue& o) {
  if (sig_ != o.sig_ || dim_ != o.dim_) throw SignatureError("tensor addition: signature mismatch");
  for (size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

TensorValue& TensorValue::operator-=(const TensorValue& o) {
  if (sig_ != o.sig_ || dim_ != o.dim_) throw SignatureError("tensor subtraction: signature mismatch");
  for (size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

TensorValue& TensorValue::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

double TensorValue::norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double TensorValue::max_abs() const {
  double s = 0.0;
  for (double x : data_) s = std::max(s, std::abs(x));
  return s;
}

Eigen::MatrixXd TensorValue::as_matrix() const {
  assert(rank() == 2);
  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = data_[i * stride_[0] + j];
  return m;
}

Eigen::VectorXd TensorValue::as_vector() const {
  assert(rank() == 1);
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = data_[i];
  return v;
}

}  // namespace cprojlab
