#include <cmath>

#include "doctest.h"

#include "cprojlab/errors.hpp"
#include "cprojlab/models.hpp"
#include "cprojlab/transform.hpp"

using namespace cprojlab;

namespace {

struct Fixture {
  Model fs = fubini_study_model(2, 1.0);
  std::shared_ptr<const MetricField> g{fs.metric};
  Model fl = flat_model(2);
  std::shared_ptr<const MetricField> gflat{fl.metric};

  MapSpec unitary(double th = 0.7) const {
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(3, 3);
    U(0, 0) = std::complex<double>(std::cos(th), std::sin(th));
    U(1, 1) = std::cos(th);
    U(1, 2) = -std::sin(th);
    U(2, 1) = std::sin(th);
    U(2, 2) = std::cos(th);
    return MapSpec::pgl(U);
  }
  MapSpec diag211() const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(3, 3);
    M(0, 0) = 2.0;
    return MapSpec::pgl(M);
  }
  MapSpec zoom2() const {  // z -> 2z, the inverse class of diag211
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(3, 3);
    M(1, 1) = 2.0;
    M(2, 2) = 2.0;
    return MapSpec::pgl(M);
  }
  std::vector<Eigen::VectorXd> samples(int count = 12, double r = 0.8, uint64_t seed = 3) const {
    Rng rng(seed);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < count; ++i) out.push_back(rng.point_in_ball(4, r));
    return out;
  }
};

}  // namespace

TEST_CASE("MapSpec: PGL action, jacobian, inverse, holomorphy") {
  Fixture fx;
  MapSpec phi = fx.diag211();
  Eigen::VectorXd x = (Eigen::VectorXd(4) << 0.4, -0.2, 0.6, 0.1).finished();
  CHECK((phi.apply(x) - 0.5 * x).norm() <= 1e-14);
  CHECK((phi.inverse().apply(x) - 2.0 * x).norm() <= 1e-14);
  CHECK((phi.jacobian(x) - 0.5 * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-13);
  Rng rng(5);
  CHECK(phi.holomorphy_residual(fx.g->chart(), rng, 10) <= 1e-12);
  CHECK(fx.unitary().holomorphy_residual(fx.g->chart(), rng, 10) <= 1e-12);

  // a non-holomorphic expression map is detected by classify_map
  std::vector<ScalarField> conj = {ScalarField::var(0), -1.0 * ScalarField::var(1), ScalarField::var(2),
                                   ScalarField::var(3)};
  MapSpec bad = MapSpec::expr_map(conj);
  CHECK(bad.holomorphy_residual(fx.g->chart(), rng, 10) > 1e-2);
  CHECK_THROWS_AS(classify_map(bad, fx.g, fx.samples()), NotHolomorphic);

  // singular matrix rejected
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(3, 3);
  S(0, 0) = 1.0;
  CHECK_THROWS_AS(MapSpec::pgl(S), DegenerateInput);

  // hyperplane at infinity raises DomainError
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(3, 3);
  W(0, 0) = 0.0;
  W(0, 1) = 1.0;
  W(1, 0) = 1.0;
  W(1, 1) = 0.0;
  MapSpec swap = MapSpec::pgl(W);  // [Z0:Z1:Z2] -> [Z1:Z0:Z2], z1 = 0 -> infinity
  Eigen::VectorXd zx = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(swap.apply(zx), DomainError);
}

TEST_CASE("pullback metric: identity, linear scaling, unitary isometry") {
  Fixture fx;
  MapSpec id = MapSpec::pgl(Eigen::MatrixXcd::Identity(3, 3));
  Eigen::VectorXd x = (Eigen::VectorXd(4) << 0.3, 0.2, -0.1, 0.5).finished();
  CHECK((pullback_metric(id, *fx.g, x).as_matrix() - fx.g->value(x)).norm() <= 1e-13);

  std::vector<ScalarField> two_z;
  for (int i = 0; i < 4; ++i) two_z.push_back(2.0 * ScalarField::var(i));
  MapSpec phi2z = MapSpec::expr_map(two_z);
  CHECK((pullback_metric(phi2z, *fx.gflat, x).as_matrix() - 4.0 * Eigen::MatrixXd::Identity(4, 4)).norm() <=
        1e-13);

  MapSpec U = fx.unitary();
  for (const auto& y : fx.samples(8, 1.0, 9)) {
    Eigen::MatrixXd pb = pullback_metric(U, *fx.g, y).as_matrix();
    CHECK((pb - fx.g->value(y)).norm() / fx.g->value(y).norm() <= 1e-10);
  }

  // pullback metrics stay Kaehler-valid
  auto pb = pullback_metric_field(fx.diag211(), fx.g);
  CHECK(kahler_validate(*pb, fx.samples(20, 1.0, 10)).pass());
}

TEST_CASE("pullback density: round trip and two-path consistency") {
  Fixture fx;
  auto eta_g = std::make_shared<MetricDensity>(fx.g);
  MapSpec phi = fx.diag211();

  // round trip with phi^{-1}
  auto once = pullback_density(phi, eta_g);
  auto back = pullback_density(phi.inverse(), once);
  Eigen::VectorXd x = (Eigen::VectorXd(4) << 0.25, -0.15, 0.3, 0.1).finished();
  CHECK((back->value(x) - eta_g->value(x)).norm() / eta_g->value(x).norm() <= 1e-10);

  // two-path consistency: eta route vs metric route
  // (phi* eta_g) as an endomorphism w.r.t. g == solution_from_metric_pair(g, phi* g)
  auto eta_pulled = pullback_density(phi, eta_g);
  DensityEndomorphism A_eta(eta_pulled, fx.g);
  auto A_pair = solution_from_metric_pair(fx.g, pullback_metric_field(phi, fx.g));
  for (const auto& y : fx.samples(6, 1.0, 12)) {
    Eigen::MatrixXd a1 = A_eta.value(y);
    Eigen::MatrixXd a2 = A_pair->value(y);
    CHECK((a1 - a2).norm() / a2.norm() <= 1e-10);
  }

  // unitary fixes eta of the FS metric
  auto fixed = pullback_density(fx.unitary(), eta_g);
  for (const auto& y : fx.samples(6, 1.0, 13))
    CHECK((fixed->value(y) - eta_g->value(y)).norm() / eta_g->value(y).norm() <= 1e-10);

  // flat chart, z -> 2z: the pulled-back density is a constant multiple of Id
  auto eta_flat = std::make_shared<MetricDensity>(fx.gflat);
  std::vector<ScalarField> two_z;
  for (int i = 0; i < 4; ++i) two_z.push_back(2.0 * ScalarField::var(i));
  auto pulled_flat = pullback_density(MapSpec::expr_map(two_z), eta_flat);
  DensityEndomorphism A_flat(pulled_flat, fx.gflat);
  Eigen::MatrixXd a = A_flat.value(x);
  CHECK((a - a(0, 0) * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-12 * std::abs(a(0, 0)));
}

TEST_CASE("classify_map: the nested chain of verdicts") {
  Fixture fx;
  auto samples = fx.samples();

  auto iso = classify_map(fx.unitary(), fx.g, samples);
  CHECK(iso.verdict == MapClass::Isometry);
  // monotonicity: an isometry also passes every weaker level
  CHECK(iso.homothety_residual <= 1e-8);
  CHECK(std::abs(iso.homothety_constant - 1.0) <= 1e-8);
  CHECK(iso.affine_residual <= 1e-8);
  CHECK(iso.cproj_residual <= 1e-7);

  std::vector<ScalarField> two_z;
  for (int i = 0; i < 4; ++i) two_z.push_back(2.0 * ScalarField::var(i));
  auto hom = classify_map(MapSpec::expr_map(two_z), fx.gflat, samples);
  CHECK(hom.verdict == MapClass::Homothety);
  CHECK(hom.homothety_constant == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(hom.affine_residual <= 1e-8);

  auto cpr = classify_map(fx.diag211(), fx.g, samples);
  CHECK(cpr.verdict == MapClass::CProjective);
  CHECK(cpr.affine_residual > 1e-3);   // non-affine witness
  CHECK(cpr.cproj_residual <= 1e-7);
}

TEST_CASE("t_phi: identity, representation law, inverse, unitary stabilizer") {
  Fixture fx;
  Eigen::VectorXd x0 = (Eigen::VectorXd(4) << 0.12, -0.08, 0.2, 0.15).finished();
  auto deg = degree_of_mobility(fx.g, x0, 5);
  REQUIRE(deg.dimension == 9);
  auto basis = build_global_basis(fx.g, deg, 1234);

  auto Tid = t_phi(MapSpec::pgl(Eigen::MatrixXcd::Identity(3, 3)), basis);
  CHECK((Tid.T - Eigen::MatrixXd::Identity(9, 9)).norm() <= 1e-7);

  MapSpec U = fx.unitary(), D = fx.diag211();
  auto TU = t_phi(U, basis);
  auto TD = t_phi(D, basis);
  CHECK((TU.T * Eigen::VectorXd::Unit(9, 0) - Eigen::VectorXd::Unit(9, 0)).norm() <= 1e-8);

  // representation law on three pairs
  std::vector<std::pair<MapSpec, MapSpec>> pairs = {
      {D, U}, {U, D}, {fx.unitary(0.3), D}};
  for (auto& [a, b] : pairs) {
    auto Tab = t_phi(a.composed(b), basis);
    auto Ta = t_phi(a, basis);
    auto Tb = t_phi(b, basis);
    CHECK((Tab.T - Ta.T * Tb.T).norm() <= 1e-7);
  }

  auto TDinv = t_phi(D.inverse(), basis);
  CHECK((TDinv.T * TD.T - Eigen::MatrixXd::Identity(9, 9)).norm() <= 1e-7);

  // phi and phi^2 instance of the law
  auto TD2 = t_phi(D.power(2), basis);
  CHECK((TD2.T - TD.T * TD.T).norm() <= 1e-7);
}

TEST_CASE("tphi_spectral_report flags") {
  TPhiMatrix T;
  T.T = Eigen::MatrixXd::Identity(2, 2);
  T.det = 1.0;
  T.eigenvalues = Eigen::VectorXcd::Ones(2);
  auto rep = tphi_spectral_report(T, 2, false);
  CHECK_FALSE(rep.hypotheses_met);

  TPhiMatrix T2;
  T2.T = (Eigen::MatrixXd(2, 2) << 3.0, 0.0, 0.0, 0.5).finished();
  T2.det = 1.5;
  T2.eigenvalues.resize(2);
  T2.eigenvalues << std::complex<double>(3.0, 0.0), std::complex<double>(0.5, 0.0);
  auto rep2 = tphi_spectral_report(T2, 2, true);
  CHECK(rep2.hypotheses_met);
  CHECK(rep2.distinct_positive_real);
  CHECK_FALSE(rep2.negative_det);
  CHECK(rep2.diagonalizable);

  // 9-dimensional input: hypotheses not met, report only
  TPhiMatrix T9;
  T9.T = Eigen::MatrixXd::Identity(9, 9);
  T9.det = 1.0;
  T9.eigenvalues = Eigen::VectorXcd::Ones(9);
  CHECK_FALSE(tphi_spectral_report(T9, 9, true).hypotheses_met);
}

TEST_CASE("pullback_eigen_dynamics: formula properties") {
  CHECK(pullback_eigen_dynamics(0.37, 2.0, 1.0, 0.0) == doctest::Approx(0.37));
  CHECK(pullback_eigen_dynamics(0.5, 2.0, 1.0, 1.0) == doctest::Approx(2.0 / 3.0));
  for (double k : {-3.0, 0.0, 2.0, 7.0}) {
    CHECK(pullback_eigen_dynamics(0.0, 2.0, 1.0, k) == 0.0);
    CHECK(pullback_eigen_dynamics(1.0, 2.0, 1.0, k) == 1.0);
  }
  // monotone in k, limits 1 and 0
  double prev = pullback_eigen_dynamics(0.2, 3.0, 0.8, -30.0);
  for (double k = -29; k <= 30; k += 1) {
    double cur = pullback_eigen_dynamics(0.2, 3.0, 0.8, k);
    CHECK(cur >= prev);
    prev = cur;
  }
  CHECK(pullback_eigen_dynamics(0.2, 3.0, 0.8, 200.0) == doctest::Approx(1.0));
  CHECK(pullback_eigen_dynamics(0.2, 3.0, 0.8, -200.0) == doctest::Approx(0.0).epsilon(1e-12));
  // semigroup identity f_{k+j} = f_k o f_j
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    double d = rng.uniform(0.01, 0.99), al = rng.uniform(1.1, 3.0), be = rng.uniform(0.2, 1.0);
    double k = rng.uniform(-4, 4), j = rng.uniform(-4, 4);
    double lhs = pullback_eigen_dynamics(d, al, be, k + j);
    double rhs = pullback_eigen_dynamics(pullback_eigen_dynamics(d, al, be, j), al, be, k);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("rho iteration and G(k) slopes on CP2") {
  Fixture fx;
  Eigen::VectorXd x0 = (Eigen::VectorXd(4) << 0.12, -0.08, 0.2, 0.15).finished();
  auto deg = degree_of_mobility(fx.g, x0, 5);
  auto basis = build_global_basis(fx.g, deg, 1234);

  MapSpec phi = fx.zoom2();  // orbit phi^{-k} contracts into the chart
  auto T = t_phi(phi, basis);
  auto dec = eigen_pair_decomposition(phi, basis, T);
  CHECK(dec.alpha > dec.beta);
  CHECK(dec.beta > 0.0);
  CHECK(dec.m + dec.mtilde == 1);

  Eigen::VectorXd xm = (Eigen::VectorXd(4) << 0.31, 0.17, -0.25, 0.09).finished();
  auto rho = rho_iteration_check(phi, basis, dec, xm, 8);
  CHECK(rho.max_abs_err <= 1e-8);

  auto gk = gk_asymptotics_check(phi, basis, dec, xm, 3, 8);
  CHECK(gk.pass(0.05));
  CHECK(gk.orbit_validation_residual <= 1e-7);

  // alpha = beta degeneracy: a homothety-like action on the subspace gives
  // equal slopes (flat statement: dec must fail to split eta_g)
  MapSpec hom = MapSpec::pgl(2.0 * Eigen::MatrixXcd::Identity(3, 3));
  auto Th = t_phi(hom, basis);
  CHECK_THROWS_AS(eigen_pair_decomposition(hom, basis, Th), DegenerateInput);

  // k -> -k swap: A_phi(-k) = A_{phi^{-1}}(k), so the inverse map in its own
  // +k window reproduces the same eigenvalue data row-swapped
  MapSpec phi_inv = phi.inverse();
  auto Ti = t_phi(phi_inv, basis);
  auto dec_i = eigen_pair_decomposition(phi_inv, basis, Ti);
  CHECK(dec_i.alpha == doctest::Approx(1.0 / dec.beta).epsilon(1e-8));
  CHECK(dec_i.beta == doctest::Approx(1.0 / dec.alpha).epsilon(1e-8));
  CHECK(dec_i.m == dec.mtilde);
  CHECK(dec_i.mtilde == dec.m);
  // the same identity at the level of A(k) values
  Eigen::MatrixXd Ak_inv = std::pow(dec_i.alpha, 3) * dec_i.D->value(xm) +
                           std::pow(dec_i.beta, 3) * dec_i.Dtilde->value(xm);
  Eigen::MatrixXd Ak_neg = std::pow(dec.alpha, -3) * dec.D->value(xm) +
                           std::pow(dec.beta, -3) * dec.Dtilde->value(xm);
  CHECK((Ak_inv - Ak_neg).norm() / Ak_neg.norm() <= 1e-9);
}

TEST_CASE("Weyl norm is invariant under c-projective pullback") {
  Fixture fx;
  MapSpec phi = fx.diag211();
  auto pb = pullback_metric_field(phi, fx.g);
  for (const auto& x : fx.samples(6, 1.0, 31)) {
    double w0 = weyl_norm_relative(*fx.g, x);
    double w1 = weyl_norm_relative(*pb, x);
    CHECK(std::abs(w1 - w0) <= 1e-7);
  }
  // and on a non-flat model through an isometry-free check: product metric
  Model prod = product_model({{FactorSpec::FS, 1, 1.0}, {FactorSpec::FS, 1, 1.0}});
  for (const auto& x : fx.samples(4, 1.0, 32)) {
    CHECK(weyl_norm_relative(*prod.metric, x) > 1e-4);
  }
}
