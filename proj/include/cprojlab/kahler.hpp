#pragma once

// Metric fields on a chart, Kaehler validation, Levi-Civita connection and
// curvature with the sign conventions
//   R_ab^c_d X^d = nabla_a nabla_b X^c - nabla_b nabla_a X^c,
//   Ric_ab = R_ca^c_b,   R_abcd = R_ab^e_d g_ec,   Omega_ab = J_a^c g_cb.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "cprojlab/chart.hpp"
#include "cprojlab/expr.hpp"
#include "cprojlab/jetmat.hpp"
#include "cprojlab/linalg.hpp"
#include "cprojlab/tensor.hpp"

namespace cprojlab {

class MetricField {
 public:
  explicit MetricField(Chart chart) : chart_(std::move(chart)) {}
  virtual ~MetricField() = default;

  int n() const { return chart_.n; }
  int dim() const { return chart_.dim(); }
  const Chart& chart() const { return chart_; }

  // Component jets g_ab at x to order K; exact to round-off.
  virtual JetMat jets(const Eigen::VectorXd& x, int K) const = 0;
  Eigen::MatrixXd value(const Eigen::VectorXd& x) const { return jets(x, 0).value(); }

 private:
  Chart chart_;
};

// g_ab assembled from a Kaehler potential: the normalization is fixed so
// that the potential |z|^2 gives the identity metric.
class PotentialMetric : public MetricField {
 public:
  PotentialMetric(Chart chart, ScalarField potential);
  JetMat jets(const Eigen::VectorXd& x, int K) const override;
  const ScalarField& potential() const { return pot_; }

 private:
  ScalarField pot_;
};

// Raw symmetric component input; dOmega = 0 is NOT automatic and is checked
// by kahler_validate.
class ComponentMetric : public MetricField {
 public:
  ComponentMetric(Chart chart, std::vector<std::vector<ScalarField>> comps);
  JetMat jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::vector<std::vector<ScalarField>> comps_;
};

class ScaledMetric : public MetricField {
 public:
  ScaledMetric(std::shared_ptr<const MetricField> base, double c) : MetricField(base->chart()), base_(std::move(base)), c_(c) {}
  JetMat jets(const Eigen::VectorXd& x, int K) const override { return base_->jets(x, K).scaled(c_); }

 private:
  std::shared_ptr<const MetricField> base_;
  double c_;
};

std::shared_ptr<MetricField> metric_from_potential(Chart chart, ScalarField K);

// Christoffel symbols of the Levi-Civita connection, Gamma^c_ab stored as
// TensorValue slots [c][a][b] (Up, Down, Down).
TensorValue christoffel(const MetricField& g, const Eigen::VectorXd& x);

// Jets of Gamma^c_ab to order K, flattened [c][a][b].
std::vector<Jet> christoffel_jets(const MetricField& g, const Eigen::VectorXd& x, int K);

struct CurvatureBundle {
  int n = 0;
  Eigen::MatrixXd g, ginv, J, Omega;
  TensorValue Gamma;   // [c][a][b]
  TensorValue R;       // R_ab^c_d as [a][b][c][d] (Down,Down,Up,Down)
  TensorValue R_low;   // R_abcd
  TensorValue Ric;     // Ric_ab
};

CurvatureBundle riemann(const MetricField& g, const Eigen::VectorXd& x);

// R_ab^c_e and Ric_ab assembled from Gamma jets of order >= 1 (flattened
// [c][a][b]); works for any torsion-free connection.
struct CurvaturePair {
  TensorValue R;    // [a][b][c][d]
  TensorValue Ric;  // [a][b]
};
CurvaturePair assemble_curvature(const std::vector<Jet>& gamma, int dim);

struct ChscFit {
  double mu = 0.0;
  double residual = 0.0;
};
ChscFit chsc_fit(const CurvatureBundle& curv);
ChscFit chsc_fit(const MetricField& g, const Eigen::VectorXd& x);

struct ValidationReport {
  int n_points = 0;
  int not_pd_count = 0;
  double max_J_squared = 0.0;
  double max_hermitian = 0.0;
  double max_nabla_J = 0.0;
  double max_d_omega = 0.0;
  double tol = 1e-9;
  bool pass() const {
    return not_pd_count == 0 && max_J_squared <= tol && max_hermitian <= tol && max_nabla_J <= tol &&
           max_d_omega <= tol;
  }
};

ValidationReport kahler_validate(const MetricField& g, const std::vector<Eigen::VectorXd>& samples,
                                 double tol = 1e-9);

}  // namespace cprojlab
