#include <cmath>

#include "doctest.h"

#include "cprojlab/errors.hpp"
#include "cprojlab/kahler.hpp"

using namespace cprojlab;

namespace {

ScalarField norm2(int n) {
  ScalarField s = ScalarField::constant(0.0);
  for (int i = 0; i < 2 * n; ++i) s = s + pow(ScalarField::var(i), 2);
  return s;
}

std::shared_ptr<MetricField> flat_metric(int n) {
  return metric_from_potential(Chart(n, 10.0), norm2(n));
}

std::shared_ptr<MetricField> fs_metric(int n, double c = 1.0) {
  Chart chart(n, 3.0, 3.0);
  return metric_from_potential(chart, c * log(1.0 + norm2(n)));
}

std::vector<Eigen::VectorXd> ball_samples(int dim, double r, int count, uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) out.push_back(rng.point_in_ball(dim, r));
  return out;
}

}  // namespace

TEST_CASE("flat potential |z|^2 gives the identity metric") {
  auto g = flat_metric(2);
  Rng rng(1);
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd x = rng.point_in_ball(4, 5.0);
    CHECK((g->value(x) - Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-14);
  }
}

TEST_CASE("Fubini-Study metric at the origin is c*Id") {
  for (double c : {1.0, 2.0}) {
    auto g = fs_metric(2, c);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    CHECK((g->value(x) - c * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-13);
  }
}

TEST_CASE("scaling the potential scales the metric") {
  auto g1 = fs_metric(2, 1.0);
  auto g3 = fs_metric(2, 3.0);
  Rng rng(2);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CHECK((3.0 * g1->value(x) - g3->value(x)).norm() <= 1e-12);
}

TEST_CASE("kahler_validate on flat and FS") {
  auto samples = ball_samples(4, 1.0, 100, 42);
  auto rep_flat = kahler_validate(*flat_metric(2), samples);
  CHECK(rep_flat.pass());
  CHECK(rep_flat.max_hermitian <= 1e-14);

  auto rep_fs = kahler_validate(*fs_metric(2), samples);
  CHECK(rep_fs.pass());
  CHECK(rep_fs.max_nabla_J <= 1e-9);
  CHECK(rep_fs.max_d_omega <= 1e-9);
}

TEST_CASE("kahler_validate flags a non-Hermitian perturbation") {
  const int n = 2;
  Chart chart(n, 3.0, 3.0);
  // flat metric plus a 1e-3 * (du1 ox du1 - dv1 ox dv1) perturbation,
  // which breaks J-Hermitian symmetry
  std::vector<std::vector<ScalarField>> comps(4, std::vector<ScalarField>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) comps[i][j] = ScalarField::constant(i == j ? 1.0 : 0.0);
  comps[0][0] = comps[0][0] + 1e-3;
  comps[1][1] = comps[1][1] - 1e-3;
  ComponentMetric g(chart, comps);
  auto samples = ball_samples(4, 1.0, 20, 7);
  auto rep = kahler_validate(g, samples);
  CHECK_FALSE(rep.pass());
  CHECK(rep.max_hermitian >= 1e-4);
  CHECK(rep.max_hermitian <= 5e-3);
}

TEST_CASE("Christoffel symbols: flat, FS origin, scale invariance") {
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(4);
  Rng rng(3);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);

  TensorValue gflat = christoffel(*flat_metric(2), x);
  CHECK(gflat.max_abs() <= 1e-14);

  TensorValue gfs0 = christoffel(*fs_metric(2), origin);
  CHECK(gfs0.max_abs() <= 1e-13);

  TensorValue g1 = christoffel(*fs_metric(2, 1.0), x);
  TensorValue g2 = christoffel(*fs_metric(2, 2.0), x);
  CHECK((g1 - g2).max_abs() <= 1e-11);
}

TEST_CASE("nabla g = 0 at sampled points") {
  auto g = fs_metric(2);
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x = rng.point_in_ball(4, 1.2);
    JetMat gj = g->jets(x, 1);
    TensorValue Gm = christoffel(*g, x);
    const int d = 4;
    double worst = 0.0;
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double v = gj(a, b).partial1(c);
          for (int e = 0; e < d; ++e)
            v -= Gm.at({e, c, a}) * gj(e, b).value() + Gm.at({e, c, b}) * gj(a, e).value();
          worst = std::max(worst, std::abs(v));
        }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("curvature: flat vanishes, FS matches the constant-HSC model") {
  Rng rng(5);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CurvatureBundle flat = riemann(*flat_metric(2), x);
  CHECK(flat.R.max_abs() <= 1e-13);

  // first Bianchi and antisymmetry on FS
  CurvatureBundle fs = riemann(*fs_metric(2), x);
  const int d = 4;
  double bianchi = 0.0, antisym = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          bianchi = std::max(bianchi, std::abs(fs.R.at({a, b, c, e}) + fs.R.at({b, e, c, a}) +
                                               fs.R.at({e, a, c, b})));
          antisym = std::max(antisym, std::abs(fs.R.at({a, b, c, e}) + fs.R.at({b, a, c, e})));
        }
  CHECK(bianchi <= 1e-10);
  CHECK(antisym <= 1e-10);

  ChscFit fit = chsc_fit(fs);
  CHECK(fit.residual <= 1e-8);
  CHECK(fit.mu != 0.0);
}

TEST_CASE("chsc_fit: mu constant across points and scales as 1/c") {
  auto g1 = fs_metric(2, 1.0);
  auto g2 = fs_metric(2, 2.0);
  Rng rng(6);
  double mu0 = chsc_fit(*g1, Eigen::VectorXd::Zero(4)).mu;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
    ChscFit f1 = chsc_fit(*g1, x);
    CHECK(f1.residual <= 1e-8);
    CHECK(std::abs(f1.mu - mu0) / std::abs(mu0) <= 1e-8);
  }
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CHECK(chsc_fit(*g2, x).mu == doctest::Approx(mu0 / 2.0).epsilon(1e-8));

  ChscFit flat_fit = chsc_fit(*flat_metric(2), x);
  CHECK(flat_fit.mu == 0.0);
  CHECK(flat_fit.residual <= 1e-12);
}

TEST_CASE("FS x FS product is Kaehler but not constant HSC") {
  // n = 2 product of two one-dimensional FS factors
  Chart chart(2, 3.0, 3.0);
  ScalarField z1 = pow(ScalarField::var(0), 2) + pow(ScalarField::var(1), 2);
  ScalarField z2 = pow(ScalarField::var(2), 2) + pow(ScalarField::var(3), 2);
  auto g = metric_from_potential(chart, log(1.0 + z1) + log(1.0 + z2));
  auto samples = ball_samples(4, 1.0, 30, 8);
  CHECK(kahler_validate(*g, samples).pass());
  Rng rng(9);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CurvatureBundle cb = riemann(*g, x);
  CHECK(cb.R.max_abs() > 1e-3);
  ChscFit fit = chsc_fit(cb);
  CHECK(fit.residual > 1e-3);
}

TEST_CASE("Ricci is symmetric and J-Hermitian for Kaehler inputs") {
  auto g = fs_metric(2);
  Rng rng(10);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CurvatureBundle cb = riemann(*g, x);
  Eigen::MatrixXd ric = cb.Ric.as_matrix();
  CHECK((ric - ric.transpose()).norm() / ric.norm() <= 1e-10);
  CHECK((cb.J.transpose() * ric * cb.J - ric).norm() / ric.norm() <= 1e-10);
}

TEST_CASE("Kaehler symmetry R(JX,JY) = R(X,Y) in the first two slots") {
  auto g = fs_metric(2);
  Rng rng(11);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CurvatureBundle cb = riemann(*g, x);
  const int d = 4;
  double worst = 0.0;
  for (int c = 0; c < d; ++c)
    for (int e = 0; e < d; ++e)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double v = 0.0;
          for (int ap = 0; ap < d; ++ap)
            for (int bp = 0; bp < d; ++bp) v += cb.J(ap, a) * cb.J(bp, b) * cb.R.at({ap, bp, c, e});
          worst = std::max(worst, std::abs(v - cb.R.at({a, b, c, e})));
        }
  CHECK(worst / cb.R.max_abs() <= 1e-10);
}

TEST_CASE("christoffel rejects non-positive-definite input") {
  Chart chart(2, 10.0);
  std::vector<std::vector<ScalarField>> comps(4, std::vector<ScalarField>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) comps[i][j] = ScalarField::constant(i == j ? (i < 2 ? 1.0 : -1.0) : 0.0);
  ComponentMetric g(chart, comps);
  CHECK_THROWS_AS(christoffel(g, Eigen::VectorXd::Zero(4)), NotPositiveDefinite);
}
