#pragma once

// Dense matrices of jets: the workhorse for metric fields, pullbacks and
// closed-form mobility solutions. All entries share one jet space.

#include <vector>

#include <Eigen/Dense>

#include "cprojlab/jets.hpp"

namespace cprojlab {

class JetMat {
 public:
  JetMat() = default;
  JetMat(int rows, int cols, std::shared_ptr<const JetSpace> space);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::shared_ptr<const JetSpace> space() const { return space_; }

  Jet& operator()(int r, int c) { return m_[r * cols_ + c]; }
  const Jet& operator()(int r, int c) const { return m_[r * cols_ + c]; }

  Eigen::MatrixXd value() const;
  JetMat transpose() const;
  Jet trace() const;
  Jet det() const;       // Gauss elimination with jet division
  JetMat inverse() const;

  JetMat operator*(const JetMat& o) const;
  JetMat operator+(const JetMat& o) const;
  JetMat operator-(const JetMat& o) const;
  JetMat scaled(const Jet& s) const;
  JetMat scaled(double s) const;

  static JetMat identity(int n, std::shared_ptr<const JetSpace> space);
  static JetMat from_constant(const Eigen::MatrixXd& m, std::shared_ptr<const JetSpace> space);

 private:
  int rows_ = 0, cols_ = 0;
  std::shared_ptr<const JetSpace> space_;
  std::vector<Jet> m_;
};

}  // namespace cprojlab
