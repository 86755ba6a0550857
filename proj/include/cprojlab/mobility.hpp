#pragma once

// The mobility/metrisability equation machinery:
//   nabla_a A_b^c = 1/2 (g_ab Lam^c + delta_a^c Lam_b + Om_ab J_d^c Lam^d + J_a^c Lam^d Om_db)
// with Lam = gr(lambda), lambda = 1/2 tr A. Degree of mobility is computed
// by jet-rank at a base point with stabilization over consecutive Taylor
// orders. Solutions are carried either as order-K jets (solver output) or
// as globally evaluable closed forms (metric pairs, combinations).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cprojlab/kahler.hpp"

namespace cprojlab {

// ---------------------------------------------------------------------------
// field sources

// A_a^b field with exact jets; matrix element (b, a) = A_a^b, so the stored
// matrix acts on vectors as X^a -> A_a^b X^a.
class HermitianFieldSource {
 public:
  virtual ~HermitianFieldSource() = default;
  virtual int dim() const = 0;
  virtual JetMat A_jets(const Eigen::VectorXd& x, int K) const = 0;
  Eigen::MatrixXd value(const Eigen::VectorXd& x) const { return A_jets(x, 0).value(); }
};

class ConstantSource : public HermitianFieldSource {
 public:
  explicit ConstantSource(Eigen::MatrixXd A) : A_(std::move(A)) {}
  int dim() const override { return static_cast<int>(A_.rows()); }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override {
    return JetMat::from_constant(A_, JetSpace::get(static_cast<int>(x.size()), K));
  }

 private:
  Eigen::MatrixXd A_;
};

// f(x) * Id  (generic non-solution; negative controls)
class ScalarTimesIdSource : public HermitianFieldSource {
 public:
  ScalarTimesIdSource(ScalarField f, int dim) : f_(std::move(f)), dim_(dim) {}
  int dim() const override { return dim_; }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  ScalarField f_;
  int dim_;
};

class CombinationSource : public HermitianFieldSource {
 public:
  CombinationSource(std::vector<std::shared_ptr<const HermitianFieldSource>> parts, Eigen::VectorXd coeffs)
      : parts_(std::move(parts)), coeffs_(std::move(coeffs)) {}
  int dim() const override { return parts_[0]->dim(); }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::vector<std::shared_ptr<const HermitianFieldSource>> parts_;
  Eigen::VectorXd coeffs_;
};

// a A + b Id
class AffineSource : public HermitianFieldSource {
 public:
  AffineSource(std::shared_ptr<const HermitianFieldSource> base, double a, double b)
      : base_(std::move(base)), a_(a), b_(b) {}
  int dim() const override { return base_->dim(); }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const HermitianFieldSource> base_;
  double a_, b_;
};

// Closed form for a metric pair: reconstruct_metric(A, g) == gt by
// construction (round-trip contract).
class PairSolution : public HermitianFieldSource {
 public:
  PairSolution(std::shared_ptr<const MetricField> g, std::shared_ptr<const MetricField> gt);
  int dim() const override { return g_->dim(); }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const MetricField> g_, gt_;
};

// Solver output: order-K jets about x0 in scaled coordinates xi = (x-x0)/r0.
class JetSolutionSource : public HermitianFieldSource {
 public:
  JetSolutionSource(Eigen::VectorXd x0, double r0, JetMat A_xi);
  int dim() const override { return static_cast<int>(x0_.size()); }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override;
  const Eigen::VectorXd& base_point() const { return x0_; }
  double scale() const { return r0_; }
  const JetMat& jets_xi() const { return A_xi_; }

 private:
  Eigen::VectorXd x0_;
  double r0_;
  JetMat A_xi_;
};

std::shared_ptr<HermitianFieldSource> solution_from_metric_pair(std::shared_ptr<const MetricField> g,
                                                                std::shared_ptr<const MetricField> gt);

// g~_ab = sqrt(det_R A) g_ac B_b^c with B = A^{-1}
class ReconstructedMetric : public MetricField {
 public:
  ReconstructedMetric(std::shared_ptr<const HermitianFieldSource> A, std::shared_ptr<const MetricField> g)
      : MetricField(g->chart()), A_(std::move(A)), g_(std::move(g)) {}
  JetMat jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const HermitianFieldSource> A_;
  std::shared_ptr<const MetricField> g_;
};

std::shared_ptr<MetricField> reconstruct_metric(std::shared_ptr<const HermitianFieldSource> A,
                                                std::shared_ptr<const MetricField> g);

// lambda = 1/2 tr A (order K) and Lambda^a = g^{ab} d_b lambda (order K-1)
struct LambdaJets {
  Jet lambda;
  std::vector<Jet> Lambda;  // contravariant components
};
LambdaJets lambda_jets(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x, int K);
Eigen::VectorXd lambda_vector(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// residual and checks

// nabla A - RHS, slots [a][b][c] = (nabla_a A_b^c - ...), signature
// (Down, Down, Up). Throws HermitianViolation if A is not (J,g)-Hermitian
// at x beyond 1e-9 relative.
TensorValue mobility_residual(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x);
double mobility_residual_rel(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x);

struct KillingReport {
  double max_lie_g = 0.0;       // Lie derivative of g along J Lambda
  double max_lie_J = 0.0;       // Lie derivative of J along Lambda
  double max_commutator = 0.0;  // [nabla Lambda, A]
  int n_points = 0;
  bool pass(double tol = 1e-7) const {
    return max_lie_g <= tol && max_lie_J <= tol && max_commutator <= tol;
  }
};
KillingReport killing_check(const HermitianFieldSource& A, const MetricField& g,
                            const std::vector<Eigen::VectorXd>& samples);

// ---------------------------------------------------------------------------
// degree of mobility (jet-rank with stabilization)

struct DegreeDiagnostics {
  std::vector<int> orders;          // K values tried
  std::vector<int> dims;            // kernel dimension at each K
  int stabilized_order = -1;
  double gap_ratio = 0.0;
  int rows = 0, cols = 0;
  double identity_in_span_residual = 0.0;
};

struct SolutionBasis {
  std::vector<std::shared_ptr<HermitianFieldSource>> elements;  // JetSolutionSource
  std::vector<double> radii;     // validity radius (x units) per element
  Eigen::MatrixXd gram;          // of jet coefficient vectors
  Eigen::MatrixXd coefficients;  // unknown-vector per element (columns)
  Eigen::VectorXd x0;
  int order = 0;
  double scale = 0.0;
};

struct DegreeResult {
  int dimension = 0;
  SolutionBasis basis;
  DegreeDiagnostics diag;
};

DegreeResult degree_of_mobility(std::shared_ptr<const MetricField> g, const Eigen::VectorXd& x0,
                                int K_max = 5, double rank_tol = 1e-8, double r0 = 0.0);

// eta-coefficient vector of a closed-form source in the solver's unknown
// basis at (x0, order, scale); used to cross-check spans.
Eigen::VectorXd eta_coefficient_vector(const HermitianFieldSource& A, const MetricField& g,
                                       const Eigen::VectorXd& x0, int order, double r0);

// ---------------------------------------------------------------------------
// eigenstructure / regular points / property (P)

struct EigenStructure {
  Eigen::VectorXd eigenvalues;       // ascending, 2n entries
  Eigen::MatrixXd vectors;           // g-orthonormal columns
  std::vector<double> distinct;      // cluster representatives
  std::vector<int> multiplicity;     // per cluster (even)
  std::vector<int> constant_flag;    // 1 constant, 0 non-constant, -1 undecided
  std::vector<Eigen::VectorXd> gradients;  // d(rho) per cluster (covector)
  double max_eigenspace_angle = 0.0;  // non-constant pairs vs span{gr rho, J gr rho}
  int n_nonconstant = 0;
  double rho = 0.0;  // value of the tracked non-constant eigenvalue (if unique)
  int rho_cluster = -1;
};

EigenStructure eigenstructure(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x,
                              double probe_radius = 5e-3, uint64_t seed = 17);

enum class RegularFlag { Regular, NonRegular, Undecided };
RegularFlag regular_classify(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x,
                             double radius, uint64_t seed = 23);

struct PropertyPReport {
  bool passed = false;
  std::string failing_condition;
  int m = 0, mtilde = 0;
  double a = 1.0, b = 0.0;  // renormalization a A + b Id
  double rho_min = 0.0, rho_max = 0.0;
  double lemma36_max = 0.0;  // directional-derivative residual of g(Lam,Lam)
  std::shared_ptr<HermitianFieldSource> renormalized;
};

PropertyPReport property_P_check(std::shared_ptr<const HermitianFieldSource> A,
                                 std::shared_ptr<const MetricField> g,
                                 const std::vector<Eigen::VectorXd>& samples,
                                 double sample_radius, uint64_t seed = 31);

// minimizes |Lambda| over seeded domain samples with local refinement;
// returns argmin
Eigen::VectorXd find_lambda_zero(const HermitianFieldSource& A, const MetricField& g, double radius,
                                 uint64_t seed, double* min_norm = nullptr);

}  // namespace cprojlab
