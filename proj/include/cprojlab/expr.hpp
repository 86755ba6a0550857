#pragma once

// Scalar fields over chart coordinates: an expression tree with exact jet
// evaluation. Grammar (UTF-8):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' integer)?
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//   ident  := 'x' digits    (x1 .. x{2n})
//   func   := 'exp' | 'log'

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cprojlab/jets.hpp"

namespace cprojlab {

class ScalarField {
 public:
  ScalarField();  // the zero field
  static ScalarField constant(double c);
  static ScalarField var(int index);  // 0-based coordinate index
  static ScalarField parse(const std::string& text, int nvars);

  double eval(const Eigen::VectorXd& x) const;
  // jet of the field at x, all Taylor coefficients to order K exact
  Jet jet(const Eigen::VectorXd& x, int K) const;

  int max_var() const;  // largest coordinate index used, -1 if none
  const std::string& source() const { return src_; }
  bool is_zero() const;

  friend ScalarField operator+(const ScalarField&, const ScalarField&);
  friend ScalarField operator-(const ScalarField&, const ScalarField&);
  friend ScalarField operator*(const ScalarField&, const ScalarField&);
  friend ScalarField operator/(const ScalarField&, const ScalarField&);
  friend ScalarField operator*(double, const ScalarField&);
  friend ScalarField operator*(const ScalarField&, double);
  friend ScalarField operator/(const ScalarField&, double);
  friend ScalarField operator+(const ScalarField&, double);
  friend ScalarField operator+(double, const ScalarField&);
  friend ScalarField operator-(const ScalarField&, double);
  friend ScalarField operator-(double, const ScalarField&);
  friend ScalarField exp(const ScalarField&);
  friend ScalarField log(const ScalarField&);
  friend ScalarField pow(const ScalarField&, long long);
  friend ScalarField shift_vars(const ScalarField&, int);
  ScalarField operator-() const;

  struct Node;

 private:
  explicit ScalarField(std::shared_ptr<const Node> root, std::string src);
  std::shared_ptr<const Node> root_;
  std::string src_;
};

ScalarField exp(const ScalarField& f);
ScalarField log(const ScalarField& f);
ScalarField pow(const ScalarField& f, long long e);
// x_i -> x_{i+offset}
ScalarField shift_vars(const ScalarField& f, int offset);

// eval_jet: jet of f at x with Taylor coefficients d^mu f / mu!.
// Throws DomainError if x lies outside the box or the expression is
// undefined at x.
Jet eval_jet(const ScalarField& f, const Eigen::VectorXd& x, int K);

}  // namespace cprojlab
