#include "cprojlab/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cprojlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd singular_values_of(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return Eigen::VectorXd();
  if (M.rows() * M.cols() > 64 * 64) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues();
}
}  // namespace

RankResult numeric_rank(const Eigen::MatrixXd& M, double rel_tol, double gap_floor) {
  RankResult r;
  r.singular_values = singular_values_of(M);
  const int m = static_cast<int>(r.singular_values.size());
  if (m == 0) {
    r.gap_ratio = kInf;
    return r;
  }
  const double smax = r.singular_values[0];
  if (smax == 0.0) {
    r.rank = 0;
    r.gap_ratio = kInf;
    return r;
  }
  const double thresh = rel_tol * smax;
  int rank = 0;
  while (rank < m && r.singular_values[rank] >= thresh) ++rank;
  r.rank = rank;
  if (rank == m || r.singular_values[rank] == 0.0) {
    r.gap_ratio = kInf;
  } else if (rank == 0) {
    r.gap_ratio = smax > 0 ? thresh / r.singular_values[0] : kInf;  // degenerate; smax < thresh impossible
  } else {
    r.gap_ratio = r.singular_values[rank - 1] / r.singular_values[rank];
  }
  if (r.gap_ratio < gap_floor) {
    std::ostringstream os;
    os << "numeric_rank: no clean rank decision, gap ratio " << r.gap_ratio << " < " << gap_floor
       << " (sigma_kept=" << r.singular_values[r.rank - 1] << ", sigma_dropped=" << r.singular_values[r.rank] << ")";
    throw IllConditioned(os.str());
  }
  return r;
}

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& M, double rel_tol, RankResult* info, double gap_floor) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  RankResult r;
  r.singular_values = svd.singularValues();
  const int nsv = static_cast<int>(r.singular_values.size());
  const int ncols = static_cast<int>(M.cols());
  double smax = nsv > 0 ? r.singular_values[0] : 0.0;
  int rank = 0;
  if (smax > 0.0) {
    const double thresh = rel_tol * smax;
    while (rank < nsv && r.singular_values[rank] >= thresh) ++rank;
  }
  r.rank = rank;
  if (rank == nsv || (rank < nsv && r.singular_values[rank] == 0.0)) {
    r.gap_ratio = kInf;
  } else if (rank > 0) {
    r.gap_ratio = r.singular_values[rank - 1] / r.singular_values[rank];
  } else {
    r.gap_ratio = kInf;
  }
  if (r.gap_ratio < gap_floor) {
    std::ostringstream os;
    os << "kernel_basis: no clean rank decision, gap ratio " << r.gap_ratio << " < " << gap_floor;
    throw IllConditioned(os.str());
  }
  if (info) *info = r;
  return svd.matrixV().rightCols(ncols - rank);
}

Eigen::MatrixXd standard_J(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    J(2 * j, 2 * j + 1) = -1.0;
    J(2 * j + 1, 2 * j) = 1.0;
  }
  return J;
}

Eigen::MatrixXcd real_to_complex(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows()) / 2;
  Eigen::MatrixXcd C(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      C(j, k) = std::complex<double>(A(2 * j, 2 * k), A(2 * j + 1, 2 * k));
  return C;
}

Eigen::MatrixXd complex_to_real(const Eigen::MatrixXcd& C) {
  const int n = static_cast<int>(C.rows());
  Eigen::MatrixXd A(2 * n, 2 * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double a = C(j, k).real(), b = C(j, k).imag();
      A(2 * j, 2 * k) = a;
      A(2 * j, 2 * k + 1) = -b;
      A(2 * j + 1, 2 * k) = b;
      A(2 * j + 1, 2 * k + 1) = a;
    }
  return A;
}

bool commutes_with_J(const Eigen::MatrixXd& A, double tol) {
  Eigen::MatrixXd J = standard_J(static_cast<int>(A.rows()) / 2);
  double scale = std::max(1.0, A.norm());
  return (A * J - J * A).norm() <= tol * scale;
}

double det_complex(const Eigen::MatrixXd& A, double imag_tol) {
  Eigen::MatrixXcd C = real_to_complex(A);
  std::complex<double> d = C.determinant();
  double scale = std::max(1.0, std::abs(d));
  if (std::abs(d.imag()) > imag_tol * scale)
    throw HermitianViolation("det_C has non-negligible imaginary part; input not Hermitian");
  return d.real();
}

AdjugatePoly adjugate_poly(const Eigen::MatrixXcd& C) {
  const int m = static_cast<int>(C.rows());
  AdjugatePoly out;
  out.B.resize(m);
  out.charpoly.assign(m + 1, 0.0);
  out.charpoly[m] = 1.0;
  // Faddeev-LeVerrier: M_1 = I, c_{m-k} = -tr(C M_k)/k, M_{k+1} = C M_k + c_{m-k} I
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(m, m);
  // adj(tI - C) = sum_{k=0}^{m-1} t^k M_{m-k}
  out.B[m - 1] = M;
  for (int k = 1; k <= m; ++k) {
    Eigen::MatrixXcd CM = C * M;
    std::complex<double> c = -CM.trace() / static_cast<double>(k);
    out.charpoly[m - k] = c;
    if (k < m) {
      M = CM + c * Eigen::MatrixXcd::Identity(m, m);
      out.B[m - 1 - k] = M;
    }
  }
  return out;
}

GEigen eigen_g_selfadjoint(const Eigen::MatrixXd& A, const Eigen::MatrixXd& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("metric not positive definite in eigen_g_selfadjoint");
  Eigen::MatrixXd L = llt.matrixL();
  // B = L^T A L^{-T} is symmetric when gA is symmetric
  Eigen::MatrixXd B = L.transpose() * A * L.transpose().fullPivLu().inverse();
  B = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  GEigen ge;
  ge.values = es.eigenvalues();
  ge.vectors = L.transpose().fullPivLu().solve(es.eigenvectors());
  return ge;
}

bool positive_definite(const Eigen::MatrixXd& g, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  return lo > rel_tol * std::max(hi, 0.0) && hi > 0.0;
}

}  // namespace cprojlab
