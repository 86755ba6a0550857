#pragma once

// C-projective connection changes, the rho tensor, the c-projective Weyl
// curvature and its invariance check. Conventions:
//   changed connection:  hat nabla_a X^b = nabla_a X^b
//     + 1/2 (Ups_a X^b + delta_a^b Ups_c X^c - J_a^c Ups_c J_d^b X^d - J_a^b Ups_c J_d^c X^d)
//   density change on L: hat nabla_a sigma = nabla_a sigma - Ups_a sigma
//   rho:   P_ab = (Ric_ab + (Ric_(ab) - J_(a^c J_b)^d Ric_cd)/(n-1)) / (n+1)
//   Weyl:  W = R - dP with
//   (dP)_ab^c_d = delta_[a^c P_b]d - J_[a^c P_b]e J_d^e - P_[ab] delta_d^c - J_[a^e P_b]e J_d^c

#include <functional>
#include <memory>
#include <vector>

#include "cprojlab/kahler.hpp"

namespace cprojlab {

// Smooth one-form field with exact jets.
class OneForm {
 public:
  virtual ~OneForm() = default;
  virtual int dim() const = 0;
  // jets of the components Ups_a at x, order K
  virtual std::vector<Jet> jets(const Eigen::VectorXd& x, int K) const = 0;
  Eigen::VectorXd value(const Eigen::VectorXd& x) const;
};

class ComponentOneForm : public OneForm {
 public:
  explicit ComponentOneForm(std::vector<ScalarField> comps) : comps_(std::move(comps)) {}
  int dim() const override { return static_cast<int>(comps_.size()); }
  std::vector<Jet> jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::vector<ScalarField> comps_;
};

// df for a scalar expression f
class ExactOneForm : public OneForm {
 public:
  ExactOneForm(ScalarField f, int dim) : f_(std::move(f)), dim_(dim) {}
  int dim() const override { return dim_; }
  std::vector<Jet> jets(const Eigen::VectorXd& x, int K) const override;

 private:
  ScalarField f_;
  int dim_;
};

// Torsion-free complex connection with exact Gamma jets ([c][a][b] flat).
class ConnectionField {
 public:
  virtual ~ConnectionField() = default;
  virtual int dim() const = 0;
  virtual std::vector<Jet> gamma_jets(const Eigen::VectorXd& x, int K) const = 0;
  TensorValue christoffel_at(const Eigen::VectorXd& x) const;
};

class LeviCivitaConnection : public ConnectionField {
 public:
  explicit LeviCivitaConnection(std::shared_ptr<const MetricField> g) : g_(std::move(g)) {}
  int dim() const override { return g_->dim(); }
  std::vector<Jet> gamma_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const MetricField> g_;
};

class ChangedConnection : public ConnectionField {
 public:
  ChangedConnection(std::shared_ptr<const ConnectionField> base, std::shared_ptr<const OneForm> ups)
      : base_(std::move(base)), ups_(std::move(ups)) {}
  int dim() const override { return base_->dim(); }
  std::vector<Jet> gamma_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const ConnectionField> base_;
  std::shared_ptr<const OneForm> ups_;
};

// The Eq.-level difference tensor Q(Ups)^b_{ad} at a single point.
TensorValue cproj_difference(const Eigen::VectorXd& ups, int n);

std::shared_ptr<ConnectionField> cproj_change(std::shared_ptr<const ConnectionField> gamma,
                                              std::shared_ptr<const OneForm> ups);

// Connection correction on the density bundle L: hat nabla sigma = nabla
// sigma - Ups sigma. transport_factor integrates a parallel sigma (w.r.t.
// the changed connection, with sigma nabla-parallel) along the straight
// segment x0 + t w, t in [0, T].
class DensityChange {
 public:
  explicit DensityChange(std::shared_ptr<const OneForm> ups) : ups_(std::move(ups)) {}
  double correction(const Eigen::VectorXd& x, const Eigen::VectorXd& direction, double sigma) const;
  double transport_factor(const Eigen::VectorXd& x0, const Eigen::VectorXd& w, double T,
                          int steps = 2000) const;

 private:
  std::shared_ptr<const OneForm> ups_;
};

inline DensityChange density_change(std::shared_ptr<const OneForm> ups) { return DensityChange(std::move(ups)); }

// P from Ric per Eq. (2.8); exact assembly, no symmetry assumed on Ric.
TensorValue rho_tensor(const TensorValue& Ric, int n);

// (dP)_ab^c_d
TensorValue del_P(const TensorValue& P, int n);

// W = R - dP, slots [a][b][c][d] like R
TensorValue weyl_from(const TensorValue& R, const TensorValue& P, int n);

struct WeylPointData {
  TensorValue R, Ric, P, W;
};
WeylPointData weyl_at(const ConnectionField& conn, const Eigen::VectorXd& x, int n);
WeylPointData weyl_at(const MetricField& g, const Eigen::VectorXd& x);

struct InvarianceReport {
  double max_rel_discrepancy = 0.0;
  int n_points = 0;
  bool pass(double tol = 1e-8) const { return max_rel_discrepancy <= tol; }
};
InvarianceReport weyl_invariance_check(const MetricField& g, std::shared_ptr<const OneForm> ups,
                                       const std::vector<Eigen::VectorXd>& samples);

// F = W_ab^c_d W_ef^s_t g_cs g^ae g^bf g^dt  (>= 0, zero iff W = 0)
double weyl_norm(const MetricField& g, const Eigen::VectorXd& x);
// F normalized by the same contraction applied to R (dimensionless;
// 0 when both vanish)
double weyl_norm_relative(const MetricField& g, const Eigen::VectorXd& x);
double curvature_invariant_F(const TensorValue& T, const Eigen::MatrixXd& gv, const Eigen::MatrixXd& ginv);

}  // namespace cprojlab
