#include <cmath>

#include "doctest.h"

#include "cprojlab/cproj.hpp"
#include "cprojlab/errors.hpp"

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
  return metric_from_potential(Chart(n, 3.0, 3.0), c * log(1.0 + norm2(n)));
}

std::vector<Eigen::VectorXd> ball_samples(int dim, double r, int count, uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) out.push_back(rng.point_in_ball(dim, r));
  return out;
}

std::shared_ptr<OneForm> poly_oneform(int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<ScalarField> comps;
  for (int a = 0; a < dim; ++a) {
    ScalarField f = ScalarField::constant(rng.uniform(-0.3, 0.3));
    for (int i = 0; i < dim; ++i) f = f + rng.uniform(-0.3, 0.3) * ScalarField::var(i);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        f = f + rng.uniform(-0.2, 0.2) * (ScalarField::var(i) * ScalarField::var(j));
    comps.push_back(f);
  }
  return std::make_shared<ComponentOneForm>(std::move(comps));
}

}  // namespace

TEST_CASE("cproj_change with zero one-form leaves the connection unchanged") {
  auto g = fs_metric(2);
  auto lc = std::make_shared<LeviCivitaConnection>(g);
  std::vector<ScalarField> zero(4, ScalarField::constant(0.0));
  auto changed = cproj_change(lc, std::make_shared<ComponentOneForm>(zero));
  Rng rng(1);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  TensorValue a = lc->christoffel_at(x);
  TensorValue b = changed->christoffel_at(x);
  CHECK((a - b).max_abs() <= 1e-15);
}

TEST_CASE("difference tensor matches Eq.-level expression on a flat chart") {
  auto g = flat_metric(2);
  auto lc = std::make_shared<LeviCivitaConnection>(g);
  std::vector<ScalarField> comps = {ScalarField::constant(1.0), ScalarField::constant(0.0),
                                    ScalarField::constant(0.0), ScalarField::constant(0.0)};
  auto changed = cproj_change(lc, std::make_shared<ComponentOneForm>(comps));
  Rng rng(2);
  Eigen::VectorXd x = rng.point_in_ball(4, 2.0);
  TensorValue diff = changed->christoffel_at(x) - lc->christoffel_at(x);
  Eigen::VectorXd ups(4);
  ups << 1.0, 0.0, 0.0, 0.0;
  TensorValue expect = cproj_difference(ups, 2);
  CHECK((diff - expect).max_abs() <= 1e-14);
  // torsion-free: symmetric in the lower indices
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(diff.at({c, a, b}) == doctest::Approx(diff.at({c, b, a})));
}

TEST_CASE("applying Upsilon then -Upsilon recovers the connection") {
  auto g = fs_metric(2);
  auto lc = std::make_shared<LeviCivitaConnection>(g);
  auto ups = poly_oneform(4, 77);
  Rng rng(3);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  struct NegForm : OneForm {
    std::shared_ptr<const OneForm> base;
    int dim() const override { return base->dim(); }
    std::vector<Jet> jets(const Eigen::VectorXd& x, int K) const override {
      auto j = base->jets(x, K);
      for (auto& c : j) c = -c;
      return j;
    }
  };
  auto negf = std::make_shared<NegForm>();
  negf->base = ups;
  auto once = cproj_change(lc, ups);
  auto back = cproj_change(once, negf);
  TensorValue a = lc->christoffel_at(x);
  TensorValue b = back->christoffel_at(x);
  CHECK((a - b).max_abs() <= 1e-12);
}

TEST_CASE("changed connection stays complex (nabla J = 0)") {
  auto g = fs_metric(2);
  auto lc = std::make_shared<LeviCivitaConnection>(g);
  auto changed = cproj_change(lc, poly_oneform(4, 5));
  Rng rng(4);
  const Eigen::MatrixXd J = standard_J(2);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
    TensorValue G = changed->christoffel_at(x);
    for (int a = 0; a < 4; ++a) {
      Eigen::MatrixXd Ga(4, 4);
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b) Ga(c, b) = G.at({c, a, b});
      CHECK((Ga * J - J * Ga).norm() <= 1e-12);
    }
  }
}

TEST_CASE("density change: zero form, ODE transport, linearity") {
  std::vector<ScalarField> zero(4, ScalarField::constant(0.0));
  DensityChange d0(std::make_shared<ComponentOneForm>(zero));
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd w(4);
  w << 1.0, 0.5, -0.25, 0.0;
  CHECK(d0.transport_factor(x0, w, 2.0) == doctest::Approx(1.0));

  // constant Upsilon: parallel sigma becomes sigma * exp(Ups . x) along lines
  Eigen::VectorXd uc(4);
  uc << 0.3, -0.1, 0.2, 0.05;
  std::vector<ScalarField> cf;
  for (int i = 0; i < 4; ++i) cf.push_back(ScalarField::constant(uc[i]));
  DensityChange dc(std::make_shared<ComponentOneForm>(cf));
  double T = 1.7;
  CHECK(dc.transport_factor(x0, w, T) == doctest::Approx(std::exp(uc.dot(w) * T)).epsilon(1e-10));

  // linearity of the correction in Upsilon
  DensityChange d2(std::make_shared<ComponentOneForm>(
      std::vector<ScalarField>{ScalarField::constant(2 * uc[0]), ScalarField::constant(2 * uc[1]),
                               ScalarField::constant(2 * uc[2]), ScalarField::constant(2 * uc[3])}));
  CHECK(d2.correction(x0, w, 1.0) == doctest::Approx(2.0 * dc.correction(x0, w, 1.0)));
}

TEST_CASE("rho tensor: flat zero; Kaehler input gives Ric/(n+1), both assembly routes agree") {
  Rng rng(6);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CurvatureBundle flat = riemann(*flat_metric(2), x);
  TensorValue pflat = rho_tensor(flat.Ric, 2);
  CHECK(pflat.max_abs() <= 1e-13);

  CurvatureBundle fs = riemann(*fs_metric(2), Eigen::VectorXd::Zero(4));
  TensorValue p = rho_tensor(fs.Ric, 2);
  TensorValue expect = fs.Ric * (1.0 / 3.0);
  CHECK((p - expect).max_abs() <= 1e-12);

  // symmetric J-Hermitian synthetic input: correction vanishes identically
  Eigen::MatrixXd S(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) S(i, j) = rng.normal();
  S = (0.5 * (S + S.transpose())).eval();
  Eigen::MatrixXd J = standard_J(2);
  S = (0.5 * (S + J.transpose() * S * J)).eval();  // J-Hermitian part
  TensorValue ric = TensorValue::from_matrix(S, Slot::Down, Slot::Down);
  TensorValue p2 = rho_tensor(ric, 2);
  CHECK((p2 - ric * (1.0 / 3.0)).max_abs() <= 1e-13);
}

TEST_CASE("Weyl tensor: flat and FS vanish, product does not") {
  Rng rng(7);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  WeylPointData flat = weyl_at(*flat_metric(2), x);
  CHECK(flat.W.max_abs() <= 1e-13);

  auto fs = fs_metric(2);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd y = rng.point_in_ball(4, 1.2);
    WeylPointData w = weyl_at(*fs, y);
    CHECK(w.W.norm() / w.R.norm() <= 1e-8);
    // reconstruction R = W + dP
    TensorValue recon = w.W + del_P(w.P, 2);
    CHECK((recon - w.R).norm() / w.R.norm() <= 1e-12);
  }

  Chart chart(2, 3.0, 3.0);
  ScalarField z1 = pow(ScalarField::var(0), 2) + pow(ScalarField::var(1), 2);
  ScalarField z2 = pow(ScalarField::var(2), 2) + pow(ScalarField::var(3), 2);
  auto prod = metric_from_potential(chart, log(1.0 + z1) + log(1.0 + z2));
  Eigen::VectorXd y = rng.point_in_ball(4, 1.0);
  WeylPointData wp = weyl_at(*prod, y);
  CHECK(wp.W.max_abs() > 1e-3);
}

TEST_CASE("Weyl is trace-free and J-compatible") {
  auto fsxfs = [] {
    Chart chart(2, 3.0, 3.0);
    ScalarField z1 = pow(ScalarField::var(0), 2) + pow(ScalarField::var(1), 2);
    ScalarField z2 = pow(ScalarField::var(2), 2) + pow(ScalarField::var(3), 2);
    return metric_from_potential(chart, log(1.0 + z1) + 2.0 * log(1.0 + z2));
  }();
  Rng rng(8);
  const Eigen::MatrixXd J = standard_J(2);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
    WeylPointData w = weyl_at(*fsxfs, x);
    double scale = w.W.norm();
    // trace over (a,c)
    for (int b = 0; b < 4; ++b)
      for (int e = 0; e < 4; ++e) {
        double tr = 0.0;
        for (int a = 0; a < 4; ++a) tr += w.W.at({a, b, a, e});
        CHECK(std::abs(tr) / scale <= 1e-10);
      }
    // antisymmetry in (a,b)
    CHECK((w.W + w.W.permute({1, 0, 2, 3})).norm() / scale <= 1e-12);
    // J-compatibility in the first two slots
    double worst = 0.0;
    for (int c = 0; c < 4; ++c)
      for (int e = 0; e < 4; ++e)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            double v = 0.0;
            for (int ap = 0; ap < 4; ++ap)
              for (int bp = 0; bp < 4; ++bp) v += J(ap, a) * J(bp, b) * w.W.at({ap, bp, c, e});
            worst = std::max(worst, std::abs(v - w.W.at({a, b, c, e})));
          }
    CHECK(worst / scale <= 1e-10);
  }
}

TEST_CASE("Weyl invariance under c-projective connection change") {
  auto fs = fs_metric(2);
  auto flat = flat_metric(2);
  auto samples = ball_samples(4, 1.0, 20, 99);
  // zero one-form: both connections coincide, discrepancy identically 0
  std::vector<ScalarField> zero(4, ScalarField::constant(0.0));
  auto rep0 = weyl_invariance_check(*fs, std::make_shared<ComponentOneForm>(zero), samples);
  CHECK(rep0.max_rel_discrepancy == 0.0);
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    auto rep_fs = weyl_invariance_check(*fs, poly_oneform(4, seed), samples);
    CHECK(rep_fs.pass(1e-8));
    auto rep_flat = weyl_invariance_check(*flat, poly_oneform(4, seed + 100), samples);
    CHECK(rep_flat.pass(1e-8));
  }
  // exact differential too (Ups = d(u1 v2))
  auto dform = std::make_shared<ExactOneForm>(ScalarField::var(0) * ScalarField::var(3), 4);
  CHECK(weyl_invariance_check(*fs, dform, samples).pass(1e-8));
}

TEST_CASE("weyl_norm: zero on flat/FS, positive on products, scale-invariant W") {
  Rng rng(10);
  Eigen::VectorXd x = rng.point_in_ball(4, 1.0);
  CHECK(weyl_norm(*flat_metric(2), x) <= 1e-18);
  CHECK(weyl_norm_relative(*fs_metric(2), x) <= 1e-16);

  Chart chart(2, 3.0, 3.0);
  ScalarField z1 = pow(ScalarField::var(0), 2) + pow(ScalarField::var(1), 2);
  ScalarField z2 = pow(ScalarField::var(2), 2) + pow(ScalarField::var(3), 2);
  auto prod = metric_from_potential(chart, log(1.0 + z1) + log(1.0 + z2));
  CHECK(weyl_norm(*prod, x) > 0.0);
  CHECK(weyl_norm_relative(*prod, x) > 1e-4);

  // scaling g -> c g leaves W (index structure ab^c_d) unchanged
  auto fs1 = fs_metric(2, 1.0);
  auto fs3 = fs_metric(2, 3.0);
  WeylPointData w1 = weyl_at(*fs1, x);
  WeylPointData w3 = weyl_at(*fs3, x);
  CHECK((w1.W - w3.W).max_abs() <= 1e-12);
}
