#include <cmath>

#include "doctest.h"

#include "cprojlab/dynamics.hpp"
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
  MapSpec phiD = MapSpec::pgl([] {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(3, 3);
    M(0, 0) = 2.0;
    return M;
  }());
  std::shared_ptr<const HermitianFieldSource> A = solution_from_metric_pair(g, pullback_metric_field(phiD, g));
};

}  // namespace

TEST_CASE("flat geodesics are straight lines") {
  Fixture fx;
  CurveState s0{0.0, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Unit(4, 0)};
  auto tr = geodesic(*fx.gflat, s0, 3.0, {});
  CHECK(tr.status == ExitStatus::Completed);
  for (const auto& st : tr.states) {
    Eigen::VectorXd expect = s0.x + st.t * s0.v;
    CHECK((st.x - expect).norm() <= 1e-12);
  }
}

TEST_CASE("FS geodesic: energy drift and complex-line symmetry") {
  Fixture fx;
  Eigen::VectorXd v = Eigen::VectorXd::Unit(4, 0);
  CurveState s0{0.0, Eigen::VectorXd::Zero(4), v};
  IntegratorConfig cfg;
  auto tr = geodesic(*fx.g, s0, 1.2, cfg);
  CHECK(tr.status == ExitStatus::Completed);
  CHECK(tr.energy_drift <= 1e-8);
  // the torus symmetry fixes the z1 complex line
  for (const auto& st : tr.states) {
    CHECK(std::abs(st.x[2]) <= 1e-7);
    CHECK(std::abs(st.x[3]) <= 1e-7);
  }
  // longer run for the stated drift bound
  auto tr5 = geodesic(*fx.g, CurveState{0.0, Eigen::VectorXd::Zero(4), 0.2 * v}, 5.0, cfg);
  CHECK(tr5.energy_drift <= 1e-8);
}

TEST_CASE("geodesic reports boundary exit") {
  Fixture fx;
  CurveState s0{0.0, (Eigen::VectorXd(4) << 9.0, 0, 0, 0).finished(), Eigen::VectorXd::Unit(4, 0)};
  auto tr = geodesic(*fx.gflat, s0, 10.0, {});
  CHECK(tr.status == ExitStatus::BoundaryExit);
  CHECK(tr.states.back().x[0] < 10.0);
}

TEST_CASE("jplanar with alpha=beta=0 reproduces the geodesic") {
  Fixture fx;
  Rng rng(4);
  Eigen::VectorXd x0 = rng.point_in_ball(4, 0.3);
  Eigen::VectorXd v0 = rng.unit_vec(4);
  CurveState s0{0.0, x0, v0};
  auto zero = [](double) { return 0.0; };
  auto tg = geodesic(*fx.g, s0, 1.0, {});
  auto tj = jplanar(*fx.g, s0, zero, zero, 1.0, {});
  CHECK((tg.states.back().x - tj.states.back().x).norm() <= 1e-12);
}

TEST_CASE("flat jplanar circle: confinement and closed form") {
  Fixture fx;
  CurveState s0{0.0, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Unit(4, 0)};
  auto tr = jplanar(*fx.gflat, s0, [](double) { return 0.0; }, [](double) { return 1.0; }, 6.0, {});
  CHECK(tr.status == ExitStatus::Completed);
  for (const auto& st : tr.states) {
    CHECK(std::abs(st.x[2]) <= 1e-9);
    CHECK(std::abs(st.x[3]) <= 1e-9);
    CHECK(std::abs(st.x[0] - std::sin(st.t)) <= 1e-8);
    CHECK(std::abs(st.x[1] - (1.0 - std::cos(st.t))) <= 1e-8);
  }
}

TEST_CASE("FS jplanar curves stay on the initial complex line") {
  Fixture fx;
  Rng rng(17);
  const Eigen::MatrixXd J = standard_J(2);
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd v = rng.unit_vec(4);
    v *= 0.15;
    double al = rng.uniform(-1, 1), be = rng.uniform(-1, 1);
    auto tr = jplanar(*fx.g, CurveState{0.0, Eigen::VectorXd::Zero(4), v},
                      [=](double) { return al; }, [=](double) { return be; }, 2.0, {});
    Eigen::VectorXd e1 = v.normalized(), e2 = (J * v).normalized();
    for (const auto& st : tr.states) {
      Eigen::VectorXd w = st.x - e1 * e1.dot(st.x) - e2 * e2.dot(st.x);
      CHECK(w.norm() <= 1e-6);
    }
  }
}

TEST_CASE("jplanar reparameterization invariance") {
  Fixture fx;
  Rng rng(23);
  Eigen::VectorXd v = rng.unit_vec(4) * 0.2;
  double al = 0.4, be = -0.7, c = 1.7;
  auto t1 = jplanar(*fx.g, CurveState{0.0, Eigen::VectorXd::Zero(4), v},
                    [=](double) { return al; }, [=](double) { return be; }, 1.0, {});
  // gamma~(t) = gamma(c t): initial speed c v, time 1/c, alpha, beta scaled by c
  auto t2 = jplanar(*fx.g, CurveState{0.0, Eigen::VectorXd::Zero(4), c * v},
                    [=](double t) { return c * al; }, [=](double t) { return c * be; }, 1.0 / c, {});
  CHECK((t1.states.back().x - t2.states.back().x).norm() <= 1e-8);
}

TEST_CASE("I_t: identity solution and polynomial structure") {
  Fixture fx;
  ConstantSource id(Eigen::MatrixXd::Identity(4, 4));
  Rng rng(5);
  Eigen::VectorXd x = rng.point_in_ball(4, 0.5);
  Eigen::VectorXd v = rng.unit_vec(4);
  Eigen::MatrixXd g0 = fx.g->value(x);
  v /= std::sqrt(v.dot(g0 * v));
  // A = Id, n = 2: I_t = (t-1) g(X,X) = t - 1 for unit X
  for (double t : {0.0, 0.5, 1.0, 2.0, -1.0})
    CHECK(integral_It(id, *fx.g, x, v, t) == doctest::Approx(t - 1.0).epsilon(1e-12));

  // polynomial of degree n-1: value at eigenvalues of A is finite, and a
  // degree-(n-1) interpolation through n points reproduces fresh t's
  auto& A = *fx.A;
  Eigen::VectorXd ev = eigen_g_selfadjoint(A.value(x), g0).values;
  CHECK(std::isfinite(integral_It(A, *fx.g, x, v, ev[0])));
  double t0 = 0.2, t1 = 0.9;
  double f0 = integral_It(A, *fx.g, x, v, t0);
  double f1 = integral_It(A, *fx.g, x, v, t1);
  for (double tf : {1.7, -0.4, 0.55}) {
    double interp = f0 + (f1 - f0) * (tf - t0) / (t1 - t0);
    CHECK(std::abs(interp - integral_It(A, *fx.g, x, v, tf)) <= 1e-10 * std::max(1.0, std::abs(interp)));
  }
}

TEST_CASE("conservation of I_t and the linear integral along geodesics") {
  Fixture fx;
  Rng rng(7);
  IntegratorConfig cfg;
  for (int run = 0; run < 3; ++run) {
    Eigen::VectorXd xs = rng.point_in_ball(4, 0.2);
    Eigen::VectorXd v0 = rng.unit_vec(4);
    Eigen::MatrixXd g0 = fx.g->value(xs);
    v0 /= std::sqrt(v0.dot(g0 * v0));
    std::vector<Monitor> mons;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
      mons.push_back({"It", [&, t](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
                        return integral_It(*fx.A, *fx.g, x, v, t);
                      }});
    mons.push_back({"lin", [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
                      return integral_linear(*fx.A, *fx.g, x, v);
                    }});
    auto tr = geodesic(*fx.g, {0.0, xs, v0}, 1.0, cfg, mons);
    REQUIRE(tr.status == ExitStatus::Completed);
    for (size_t k = 1; k < tr.channel_names.size(); ++k) CHECK(tr.channel_drift((int)k) <= 1e-7);
  }
  // identity solution: linear integral vanishes identically
  ConstantSource id(Eigen::MatrixXd::Identity(4, 4));
  Eigen::VectorXd x = rng.point_in_ball(4, 0.5);
  CHECK(std::abs(integral_linear(id, *fx.g, x, rng.unit_vec(4))) <= 1e-14);
}

TEST_CASE("linear integral of a flat-space solution with nonzero Lambda, T = 5") {
  Fixture fx;
  Eigen::VectorXd x0(4);
  x0 << 0.4, -0.1, 0.25, 0.3;
  auto res = degree_of_mobility(fx.gflat, x0, 5);
  std::shared_ptr<const HermitianFieldSource> elem;
  for (int j = 0; j < res.dimension; ++j)
    if (lambda_vector(*res.basis.elements[j], *fx.gflat, x0).norm() > 0.05) {
      elem = res.basis.elements[j];
      break;
    }
  REQUIRE(elem);
  // flat-space solutions are exact polynomials, so the jet is valid along
  // the whole trace
  Rng rng(37);
  Eigen::VectorXd v0 = rng.unit_vec(4) * 0.5;
  std::vector<Monitor> mons{{"lin", [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
                               return integral_linear(*elem, *fx.gflat, x, v);
                             }}};
  auto tr = geodesic(*fx.gflat, {0.0, x0, v0}, 5.0, {}, mons);
  REQUIRE(tr.status == ExitStatus::Completed);
  CHECK(tr.channel_drift(1) <= 1e-9);
}

TEST_CASE("non-solution A breaks conservation (negative control)") {
  Fixture fx;
  auto bad = std::make_shared<ScalarTimesIdSource>(
      1.0 + pow(ScalarField::var(0), 2) + pow(ScalarField::var(3), 2), 4);
  Rng rng(19);
  Eigen::VectorXd xs = rng.point_in_ball(4, 0.2);
  Eigen::VectorXd v0 = rng.unit_vec(4);
  Eigen::MatrixXd g0 = fx.g->value(xs);
  v0 /= std::sqrt(v0.dot(g0 * v0));
  std::vector<Monitor> mons{{"I0", [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
                               return integral_It(*bad, *fx.g, x, v, 0.0);
                             }}};
  auto tr = geodesic(*fx.g, {0.0, xs, v0}, 1.0, {}, mons);
  CHECK(tr.channel_drift(1) > 1e-3);
}

TEST_CASE("normalized integrals under property (P)") {
  Fixture fx;
  Rng rng(11);
  std::vector<Eigen::VectorXd> samples;
  for (int i = 0; i < 12; ++i) samples.push_back(rng.point_in_ball(4, 1.0));
  auto prep = property_P_check(fx.A, fx.g, samples, 1.0, 77);
  REQUIRE(prep.passed);
  auto Ar = prep.renormalized;

  // factorization I_t = prefactor * I~_t at random states and t
  Rng r2(13);
  for (int i = 0; i < 5; ++i) {
    CurveState s{0.0, r2.point_in_ball(4, 0.9), r2.unit_vec(4)};
    double t = r2.uniform(-1.5, 2.0);
    auto ni = integral_normalized(*Ar, *fx.g, s, t, prep.m, prep.mtilde);
    CHECK(ni.identity_residual <= 1e-9);
  }

  // velocity ~ Lambda: I~_1 vanishes when m >= 1 (and I~_0 when mt >= 1)
  Eigen::VectorXd xr = r2.point_in_ball(4, 0.7);
  Eigen::VectorXd Lam = lambda_vector(*Ar, *fx.g, xr);
  REQUIRE(Lam.norm() > 1e-3);
  Eigen::MatrixXd g0 = fx.g->value(xr);
  CurveState s0{0.0, xr, Lam / std::sqrt(Lam.dot(g0 * Lam))};
  if (prep.m >= 1) {
    auto ni = integral_normalized(*Ar, *fx.g, s0, 1.0, prep.m, prep.mtilde);
    CHECK(std::abs(ni.I_tilde) <= 1e-9);
  }
  if (prep.mtilde >= 1) {
    auto ni = integral_normalized(*Ar, *fx.g, s0, 0.0, prep.m, prep.mtilde);
    CHECK(std::abs(ni.I_tilde) <= 1e-9);
  }

  // a geodesic started along Lambda keeps its velocity along Lambda
  auto tr = geodesic(*fx.g, s0, 1.0, {});
  for (const auto& st : tr.states) {
    Eigen::VectorXd L = lambda_vector(*Ar, *fx.g, st.x);
    if (L.norm() <= 1e-6) continue;
    Eigen::MatrixXd gg = fx.g->value(st.x);
    double c = std::abs(st.v.dot(gg * L)) / std::sqrt(st.v.dot(gg * st.v) * L.dot(gg * L));
    CHECK(std::acos(std::min(1.0, c)) <= 1e-5);
  }

  // error paths
  ConstantSource id(Eigen::MatrixXd::Identity(4, 4));
  CHECK_THROWS(integral_normalized(id, *fx.g, s0, 0.3, prep.m, prep.mtilde));
  CurveState scrit{0.0, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Unit(4, 0)};
  CHECK_THROWS_AS(integral_normalized(*Ar, *fx.g, scrit, 0.3, prep.m, prep.mtilde), NonRegularPoint);
}

TEST_CASE("trace CSV serialization") {
  Fixture fx;
  CurveState s0{0.0, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Unit(4, 0)};
  auto tr = geodesic(*fx.gflat, s0, 0.5, {});
  std::string csv = tr.to_csv();
  CHECK(csv.rfind("t,x1,x2,x3,x4,v1,v2,v3,v4,channel_energy", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(tr.states.size()) + 1);
}

TEST_CASE("exploratory integral family rank matches the minimal polynomial degree") {
  Fixture fx;
  Rng rng(29);
  CurveState s{0.0, rng.point_in_ball(4, 0.8), rng.unit_vec(4)};
  int rank = integral_family_rank(*fx.A, *fx.g, s, {0.0, 0.3, 0.7, 1.3});
  // two distinct eigenvalues at a generic point -> two independent integrals
  CHECK(rank == 2);
}
