#pragma once

// Pointwise dense tensors with a variance signature over a 2n-dimensional
// chart. Contraction pairs one up slot with one down slot (Einstein
// summation); anything else is a SignatureError.

#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "cprojlab/errors.hpp"

namespace cprojlab {

enum class Slot : uint8_t { Up, Down };

class TensorValue {
 public:
  TensorValue() = default;
  TensorValue(int dim, std::vector<Slot> signature);

  static TensorValue from_matrix(const Eigen::MatrixXd& m, Slot row, Slot col);
  static TensorValue from_vector(const Eigen::VectorXd& v, Slot s);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(sig_.size()); }
  const std::vector<Slot>& signature() const { return sig_; }
  int size() const { return static_cast<int>(data_.size()); }

  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;
  double& flat(int i) { return data_[i]; }
  double flat(int i) const { return data_[i]; }
  const std::vector<double>& data() const { return data_; }

  TensorValue contract(int i, int j) const;
  TensorValue permute(const std::vector<int>& perm) const;  // result slot k = old slot perm[k]
  TensorValue symmetrize(int i, int j) const;
  TensorValue antisymmetrize(int i, int j) const;
  TensorValue outer(const TensorValue& o) const;

  TensorValue& operator+=(const TensorValue& o);
  TensorValue& operator-=(const TensorValue& o);
  TensorValue& operator*=(double s);
  friend TensorValue operator+(TensorValue a, const TensorValue& b) { return a += b; }
  friend TensorValue operator-(TensorValue a, const TensorValue& b) { return a -= b; }
  friend TensorValue operator*(TensorValue a, double s) { return a *= s; }
  friend TensorValue operator*(double s, TensorValue a) { return a *= s; }

  double norm() const;     // Frobenius over components
  double max_abs() const;

  Eigen::MatrixXd as_matrix() const;  // rank-2
  Eigen::VectorXd as_vector() const;  // rank-1

  // flat index helpers
  int offset(const std::vector<int>& idx) const;

 private:
  int dim_ = 0;
  std::vector<Slot> sig_;
  std::vector<int> stride_;
  std::vector<double> data_;
};

}  // namespace cprojlab
