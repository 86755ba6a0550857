#pragma once

// Holomorphic maps between charts and their action on metrics and
// metrisability densities:
//   pullback metric:   (phi* g)(x) = Dphi(x)^T g(phi x) Dphi(x)
//   density pullback (chart-trivialized L):
//     (phi* eta)(x) = det(Dphi)^{1/(n+1)} Dphi^{-1} eta(phi x) Dphi^{-T}
//   representation:    T_phi(eta) = (phi^{-1})* eta
// plus map classification (isometry/homothety/affine/c-projective), the
// spectral report for T_phi, and the pullback eigenvalue dynamics
//   f_k(d) = alpha^k d / (alpha^k d + beta^k (1-d))
// with the G(k) = det_R(A(k))^{-1/2} A(k)^{-1} log-slope table check.

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cprojlab/cproj.hpp"
#include "cprojlab/mobility.hpp"

namespace cprojlab {

class MapSpec {
 public:
  // (n+1)x(n+1) nonsingular complex matrix acting on the affine chart of
  // CP^n by the homogeneous-coordinate formula
  static MapSpec pgl(const Eigen::MatrixXcd& M);
  // 2n coordinate expressions, holomorphy checked on demand
  static MapSpec expr_map(std::vector<ScalarField> comps);

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  bool is_pgl() const { return pgl_.size() > 0; }
  const Eigen::MatrixXcd& matrix() const { return pgl_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  std::vector<Jet> jets(const Eigen::VectorXd& x, int K) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  MapSpec inverse() const;
  MapSpec composed(const MapSpec& inner) const;  // this after inner
  MapSpec power(int k) const;
  double holomorphy_residual(const Chart& chart, Rng& rng, int nsamples) const;

 private:
  MapSpec() = default;
  int n_ = 0;
  Eigen::MatrixXcd pgl_;
  std::vector<ScalarField> comps_;
};

class PullbackMetric : public MetricField {
 public:
  PullbackMetric(MapSpec phi, std::shared_ptr<const MetricField> base);
  JetMat jets(const Eigen::VectorXd& x, int K) const override;

 private:
  MapSpec phi_;
  std::shared_ptr<const MetricField> base_;
};

TensorValue pullback_metric(const MapSpec& phi, const MetricField& g, const Eigen::VectorXd& x);
std::shared_ptr<MetricField> pullback_metric_field(const MapSpec& phi, std::shared_ptr<const MetricField> g);

// ---------------------------------------------------------------------------
// metrisability densities in the chart trivialization of L

class DensitySource {
 public:
  virtual ~DensitySource() = default;
  virtual int dim() const = 0;
  virtual JetMat W_jets(const Eigen::VectorXd& x, int K) const = 0;
  Eigen::MatrixXd value(const Eigen::VectorXd& x) const { return W_jets(x, 0).value(); }
};

// eta_g = g^{-1} vol(g)^{1/(n+1)}
class MetricDensity : public DensitySource {
 public:
  explicit MetricDensity(std::shared_ptr<const MetricField> g) : g_(std::move(g)) {}
  int dim() const override { return g_->dim(); }
  JetMat W_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const MetricField> g_;
};

// eta of a Hermitian endomorphism field relative to g
class SolutionDensity : public DensitySource {
 public:
  SolutionDensity(std::shared_ptr<const HermitianFieldSource> A, std::shared_ptr<const MetricField> g)
      : A_(std::move(A)), g_(std::move(g)) {}
  int dim() const override { return g_->dim(); }
  JetMat W_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const HermitianFieldSource> A_;
  std::shared_ptr<const MetricField> g_;
};

class PulledBackDensity : public DensitySource {
 public:
  PulledBackDensity(MapSpec psi, std::shared_ptr<const DensitySource> base)
      : psi_(std::move(psi)), base_(std::move(base)) {}
  int dim() const override { return base_->dim(); }
  JetMat W_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  MapSpec psi_;
  std::shared_ptr<const DensitySource> base_;
};

class CombinationDensity : public DensitySource {
 public:
  CombinationDensity(std::vector<std::shared_ptr<const DensitySource>> parts, Eigen::VectorXd coeffs)
      : parts_(std::move(parts)), coeffs_(std::move(coeffs)) {}
  int dim() const override { return parts_[0]->dim(); }
  JetMat W_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::vector<std::shared_ptr<const DensitySource>> parts_;
  Eigen::VectorXd coeffs_;
};

// endomorphism of a density relative to g: A = vol(g)^{-1/(n+1)} eta g
class DensityEndomorphism : public HermitianFieldSource {
 public:
  DensityEndomorphism(std::shared_ptr<const DensitySource> eta, std::shared_ptr<const MetricField> g)
      : eta_(std::move(eta)), g_(std::move(g)) {}
  int dim() const override { return g_->dim(); }
  JetMat A_jets(const Eigen::VectorXd& x, int K) const override;

 private:
  std::shared_ptr<const DensitySource> eta_;
  std::shared_ptr<const MetricField> g_;
};

std::shared_ptr<DensitySource> pullback_density(const MapSpec& phi, std::shared_ptr<const DensitySource> eta);
std::shared_ptr<DensitySource> t_phi_density(const MapSpec& phi, std::shared_ptr<const DensitySource> eta);

// ---------------------------------------------------------------------------
// classification

enum class MapClass { Isometry, Homothety, Affine, CProjective, None };

struct ClassificationResult {
  MapClass verdict = MapClass::None;
  double isometry_residual = 0.0;
  double homothety_residual = 0.0;
  double homothety_constant = 1.0;
  double affine_residual = 0.0;      // Christoffel discrepancy
  double cproj_residual = 0.0;       // Eq.-form fit residual for Ups
  double ups_continuity = 0.0;
  std::vector<Eigen::VectorXd> ups_samples;
  std::string verdict_name() const;
};

ClassificationResult classify_map(const MapSpec& phi, std::shared_ptr<const MetricField> g,
                                  const std::vector<Eigen::VectorXd>& samples);

// ---------------------------------------------------------------------------
// the representation T_phi on a global solution basis

struct GlobalBasis {
  std::vector<std::shared_ptr<const DensitySource>> densities;
  std::vector<std::shared_ptr<const HermitianFieldSource>> endos;
  std::shared_ptr<const MetricField> g;
  Eigen::VectorXd x0;
  int jet_dimension = 0;  // dimension certified by the jet solver
  int size() const { return static_cast<int>(densities.size()); }
};

// Builds a globally evaluable basis of Sol(J,g) on a c-projectively flat
// model: eta_g plus pullbacks of eta_g under seeded PGL elements, selected
// until the jet-coefficient rank reaches the jet solver's dimension.
GlobalBasis build_global_basis(std::shared_ptr<const MetricField> g, const DegreeResult& degree,
                               uint64_t seed, double candidate_spread = 0.35,
                               double vet_radius = 2.5);

struct TPhiMatrix {
  Eigen::MatrixXd T;
  double det = 0.0;
  Eigen::VectorXcd eigenvalues;
  double expression_residual = 0.0;
};

TPhiMatrix t_phi(const MapSpec& phi, const GlobalBasis& basis, int collocation_points = 40,
                 uint64_t seed = 137, double collocation_radius = 0.45);

struct SpectralReport {
  double det = 0.0;
  Eigen::VectorXcd eigenvalues;
  bool diagonalizable = false;
  bool hypotheses_met = false;           // dim Sol == 2 and phi certified non-affine
  bool distinct_positive_real = false;   // Prop.-level flag, only when hypotheses_met
  bool negative_det = false;             // det(T_phi) < 0 flag, only when hypotheses_met
};

SpectralReport tphi_spectral_report(const TPhiMatrix& T, int sol_dimension, bool non_affine_certified);

// f_k(d) = alpha^k d / (alpha^k d + beta^k (1 - d))
double pullback_eigen_dynamics(double d, double alpha, double beta, double k);

// rho along the orbit via the trace identity rho = 1/2 tr(D) - m, checked
// against the closed-form iteration.
struct RhoOrbitReport {
  std::vector<double> direct, formula;
  double max_abs_err = 0.0;
  double alpha = 0.0, beta = 0.0;
  int m = 0, mtilde = 0;
};

struct GkReport {
  double alpha = 0.0, beta = 0.0;
  int m = 0, mtilde = 0;
  std::vector<double> ks, nu_min;
  double fitted_slope = 0.0;
  double expected_slope = 0.0;  // -(n - mt + 1) ln alpha - mt ln beta
  double rel_err = 1.0;
  double orbit_validation_residual = 0.0;
  bool pass(double tol = 0.05) const { return rel_err <= tol; }
};

// Decomposition of eta_g into two T_phi eigenvectors (alpha > beta > 0)
// with eta + eta~ = eta_g; exposed for the proof-level orbit checks.
struct EigenPairDecomposition {
  double alpha = 0.0, beta = 0.0;
  int m = 0, mtilde = 0;  // multiplicities of the constant eigenvalues 1, 0 of D
  std::shared_ptr<const DensitySource> eta_alpha, eta_beta;
  std::shared_ptr<const HermitianFieldSource> D, Dtilde;
};

EigenPairDecomposition eigen_pair_decomposition(const MapSpec& phi, const GlobalBasis& basis,
                                                const TPhiMatrix& T);

RhoOrbitReport rho_iteration_check(const MapSpec& phi, const GlobalBasis& basis,
                                   const EigenPairDecomposition& dec, const Eigen::VectorXd& x0, int k_max);

GkReport gk_asymptotics_check(const MapSpec& phi, const GlobalBasis& basis,
                              const EigenPairDecomposition& dec, const Eigen::VectorXd& x0, int k_min,
                              int k_max);

}  // namespace cprojlab
