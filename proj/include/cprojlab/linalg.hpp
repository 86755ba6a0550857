#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cprojlab/errors.hpp"

namespace cprojlab {

struct RankResult {
  int rank = 0;
  Eigen::VectorXd singular_values;
  double gap_ratio = 0.0;  // sigma_retained_min / sigma_discarded_max, inf if nothing discarded
};

// rank = #{sigma_i >= rel_tol * sigma_max}. Throws IllConditioned if the
// retained/discarded gap ratio is below gap_floor (no clean rank decision).
RankResult numeric_rank(const Eigen::MatrixXd& M, double rel_tol, double gap_floor = 1e3);

// Orthonormal kernel basis (columns), rank decision as in numeric_rank.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& M, double rel_tol, RankResult* info = nullptr,
                             double gap_floor = 1e3);

// The standard complex structure in chart coordinates (u1,v1,...,un,vn):
// n diagonal blocks [[0,-1],[1,0]].
Eigen::MatrixXd standard_J(int n);

// J-commuting real 2n x 2n <-> complex n x n, via z_j = x_{2j-1} + i x_{2j}.
Eigen::MatrixXcd real_to_complex(const Eigen::MatrixXd& A);
Eigen::MatrixXd complex_to_real(const Eigen::MatrixXcd& C);
bool commutes_with_J(const Eigen::MatrixXd& A, double tol);

// det_C of a J-commuting real matrix; imaginary part is checked against
// tol (it must vanish for (J,g)-Hermitian input).
double det_complex(const Eigen::MatrixXd& A, double imag_tol = 1e-8);

// adj(t I - C) = sum_k t^k B_k (k = 0..m-1) and det(t I - C) coefficients
// (index k = coefficient of t^k, degree m), via Faddeev-LeVerrier.
struct AdjugatePoly {
  std::vector<Eigen::MatrixXcd> B;  // m matrices
  std::vector<std::complex<double>> charpoly;  // m+1 coefficients
};
AdjugatePoly adjugate_poly(const Eigen::MatrixXcd& C);

// Eigen-decomposition of a g-self-adjoint operator A (gA symmetric, g SPD).
// Eigenvectors are g-orthonormal columns; values ascending.
struct GEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
GEigen eigen_g_selfadjoint(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g);

// Cholesky-based positive definiteness check with the library-wide
// tolerance: smallest eigenvalue > 1e-12 * largest.
bool positive_definite(const Eigen::MatrixXd& g, double rel_tol = 1e-12);

}  // namespace cprojlab
