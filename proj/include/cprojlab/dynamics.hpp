#pragma once

// Geodesic and J-planar curve integration (embedded Dormand-Prince 5(4))
// and the integrals of the geodesic flow attached to a mobility solution:
//   I_t(X) = g(det_C(A(t)) A(t)^{-1} X, X),  A(t) = t Id - A
// evaluated through the complex adjugate so that I_t is a polynomial of
// degree n-1 in t, the linear integral g(J Lambda, X), and the normalized
// family I~_t in an adapted frame under property (P).

#include <functional>
#include <string>
#include <vector>

#include "cprojlab/mobility.hpp"

namespace cprojlab {

struct CurveState {
  double t = 0.0;
  Eigen::VectorXd x, v;
};

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_steps = 2'000'000;
  double boundary_margin = 1e-9;
  double h_init = 1e-3;
  double h_min = 1e-13;
  double h_max = 0.25;
};

enum class ExitStatus { Completed, BoundaryExit, StepLimit };

struct Monitor {
  std::string name;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> fn;
};

struct CurveTrace {
  std::vector<CurveState> states;
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;  // [channel][step]
  ExitStatus status = ExitStatus::Completed;
  double energy_drift = 0.0;

  double channel_drift(int k) const;  // relative drift, 1e-12 floor
  std::string to_csv() const;
};

CurveTrace geodesic(const MetricField& g, const CurveState& s0, double T, const IntegratorConfig& cfg = {},
                    const std::vector<Monitor>& monitors = {});

CurveTrace jplanar(const MetricField& g, const CurveState& s0, const std::function<double(double)>& alpha,
                   const std::function<double(double)>& beta, double T, const IntegratorConfig& cfg = {},
                   const std::vector<Monitor>& monitors = {});

double integral_It(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& v, double t);

double integral_linear(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& v);

// g-orthonormal frame with J in standard blocks, eigenvalues per column.
struct AdaptedFrame {
  Eigen::MatrixXd F;
  Eigen::VectorXd eigs;
};
// generic frame: eigenvalues ascending
AdaptedFrame adapted_frame(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& g0);
// property-(P) ordering: [rho pair | eigenvalue-1 block (2m) | eigenvalue-0 block (2mt)]
AdaptedFrame adapted_frame_P(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& g0, int m, int mtilde,
                             double* rho_out = nullptr);

struct NormalizedIntegral {
  double I_t = 0.0;
  double I_tilde = 0.0;
  double prefactor = 1.0;
  double rho = 0.0;
  double identity_residual = 0.0;  // |I_t - pref * I~_t| / max(|I_t|, 1e-12)
};

// A must be the affinely renormalized property-(P) solution. Throws
// NotPropertyP if the spectrum at state.x is not of (P) shape and
// NonRegularPoint if rho collides with a constant eigenvalue there.
NormalizedIntegral integral_normalized(const HermitianFieldSource& A, const MetricField& g,
                                       const CurveState& s, double t, int m, int mtilde);

// Exploratory: jet-rank of the span of dI_t at a sampled state over a
// t-grid (no acceptance gating).
int integral_family_rank(const HermitianFieldSource& A, const MetricField& g, const CurveState& s,
                         const std::vector<double>& ts, double rel_tol = 1e-8);

}  // namespace cprojlab
