#include "doctest.h"

#include "cprojlab/chart.hpp"
#include "cprojlab/errors.hpp"
#include "cprojlab/linalg.hpp"
#include "cprojlab/tensor.hpp"

using namespace cprojlab;

TEST_CASE("trace of the identity is 2n") {
  const int d = 4;
  TensorValue delta = TensorValue::from_matrix(Eigen::MatrixXd::Identity(d, d), Slot::Up, Slot::Down);
  TensorValue tr = delta.contract(0, 1);
  CHECK(tr.rank() == 0);
  CHECK(tr.flat(0) == doctest::Approx(4.0));
}

TEST_CASE("g^ab g_bc contracts to the identity") {
  Rng rng(3);
  const int d = 4;
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  Eigen::MatrixXd g = A * A.transpose() + 2.0 * Eigen::MatrixXd::Identity(d, d);
  TensorValue up = TensorValue::from_matrix(g.inverse(), Slot::Up, Slot::Up);
  TensorValue dn = TensorValue::from_matrix(g, Slot::Down, Slot::Down);
  TensorValue prod = up.outer(dn);          // g^ab g_cd, slots [a b c d]
  TensorValue id = prod.contract(1, 2);     // g^ab g_bd
  Eigen::MatrixXd m = id.as_matrix();
  CHECK((m - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-12);
}

TEST_CASE("outer then contract of two vectors is the dot product") {
  Eigen::VectorXd v(3), w(3);
  v << 1, 2, 3;
  w << -1, 0.5, 2;
  TensorValue tv = TensorValue::from_vector(v, Slot::Up);
  TensorValue tw = TensorValue::from_vector(w, Slot::Down);
  TensorValue dot = tv.outer(tw).contract(0, 1);
  CHECK(dot.flat(0) == doctest::Approx(v.dot(w)));
}

TEST_CASE("contract rejects same-variance slots") {
  TensorValue t = TensorValue::from_matrix(Eigen::MatrixXd::Identity(3, 3), Slot::Up, Slot::Up);
  CHECK_THROWS_AS(t.contract(0, 1), SignatureError);
}

TEST_CASE("contract is linear and commutes with untouched permutations") {
  Rng rng(11);
  const int d = 3;
  TensorValue a(d, {Slot::Up, Slot::Down, Slot::Down});
  TensorValue b(d, {Slot::Up, Slot::Down, Slot::Down});
  for (int i = 0; i < a.size(); ++i) {
    a.flat(i) = rng.normal();
    b.flat(i) = rng.normal();
  }
  TensorValue lhs = (a + b * 2.0).contract(0, 1);
  TensorValue rhs = a.contract(0, 1) + b.contract(0, 1) * 2.0;
  CHECK((lhs - rhs).norm() <= 1e-14);

  // permuting the untouched slot before or after contraction is the same
  TensorValue c(d, {Slot::Up, Slot::Down, Slot::Down, Slot::Down});
  for (int i = 0; i < c.size(); ++i) c.flat(i) = rng.normal();
  TensorValue p_then_c = c.permute({0, 1, 3, 2}).contract(0, 1);
  TensorValue c_then_p = c.contract(0, 1).permute({1, 0});
  CHECK((p_then_c - c_then_p).norm() <= 1e-14);
}

TEST_CASE("numeric_rank on small examples") {
  RankResult r = numeric_rank(Eigen::MatrixXd::Identity(3, 3), 1e-8);
  CHECK(r.rank == 3);
  CHECK(std::isinf(r.gap_ratio));

  RankResult z = numeric_rank(Eigen::MatrixXd::Zero(4, 4), 1e-8);
  CHECK(z.rank == 0);

  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(2, 2);
  d2(0, 0) = 1.0;
  d2(1, 1) = 1e-12;
  RankResult r2 = numeric_rank(d2, 1e-8);
  CHECK(r2.rank == 1);
  CHECK(r2.gap_ratio == doctest::Approx(1e12).epsilon(1e-3));

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 3);
  bad(0, 0) = 1.0;
  bad(1, 1) = 3e-8;  // kept
  bad(2, 2) = 1e-9;  // dropped, but only a 30x gap to the kept one
  CHECK_THROWS_AS(numeric_rank(bad, 1e-8), IllConditioned);
}

TEST_CASE("kernel basis spans the nullspace") {
  Eigen::MatrixXd M(2, 4);
  M << 1, 0, 1, 0, 0, 1, 0, 1;
  RankResult info;
  Eigen::MatrixXd K = kernel_basis(M, 1e-10, &info);
  CHECK(info.rank == 2);
  CHECK(K.cols() == 2);
  CHECK((M * K).norm() <= 1e-12);
}

TEST_CASE("complex embedding and adjugate polynomial") {
  const int n = 3;
  Rng rng(5);
  Eigen::MatrixXcd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = std::complex<double>(rng.normal(), rng.normal());
  H = (H + H.adjoint()).eval();  // Hermitian
  Eigen::MatrixXd A = complex_to_real(H);
  CHECK(commutes_with_J(A, 1e-14));
  CHECK((real_to_complex(A) - H).norm() <= 1e-14);
  // det_C is real for Hermitian input
  double dc = det_complex(A);
  CHECK(dc == doctest::Approx(H.determinant().real()));

  AdjugatePoly ap = adjugate_poly(H);
  for (double t : {0.0, 0.7, -1.3, 2.2}) {
    Eigen::MatrixXcd M = t * Eigen::MatrixXcd::Identity(n, n) - H;
    Eigen::MatrixXcd adj = Eigen::MatrixXcd::Zero(n, n);
    double tp = 1.0;
    for (int k = 0; k < n; ++k) {
      adj += tp * ap.B[k];
      tp *= t;
    }
    std::complex<double> det = 0.0;
    tp = 1.0;
    for (int k = 0; k <= n; ++k) {
      det += tp * ap.charpoly[k];
      tp *= t;
    }
    CHECK((M * adj - det * Eigen::MatrixXcd::Identity(n, n)).norm() <= 1e-10);
  }
}

TEST_CASE("eigen_g_selfadjoint returns g-orthonormal eigenvectors") {
  Rng rng(9);
  const int d = 4;
  Eigen::MatrixXd B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = rng.normal();
  Eigen::MatrixXd g = B * B.transpose() + 3.0 * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd S(d, d);  // random symmetric
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S(i, j) = rng.normal();
  S = (0.5 * (S + S.transpose())).eval();
  Eigen::MatrixXd A = g.inverse() * S;  // gA = S symmetric
  GEigen ge = eigen_g_selfadjoint(A, g);
  CHECK((ge.vectors.transpose() * g * ge.vectors - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-9);
  CHECK((A * ge.vectors - ge.vectors * ge.values.asDiagonal().toDenseMatrix()).norm() <= 1e-9);
}
