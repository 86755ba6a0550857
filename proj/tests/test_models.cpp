#include "doctest.h"

#include "cprojlab/cproj.hpp"
#include "cprojlab/errors.hpp"
#include "cprojlab/mobility.hpp"
#include "cprojlab/models.hpp"

using namespace cprojlab;

namespace {
std::vector<Eigen::VectorXd> model_samples(const Model& m, int count, uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) out.push_back(rng.point_in_ball(m.chart.dim(), m.sample_radius));
  return out;
}
}  // namespace

TEST_CASE("catalog models validate as Kaehler at seeded points") {
  for (const char* spec : {"flat:n=2", "fs:n=2,c=1", "fs:n=2,c=2", "fs:n=3,c=1",
                           "fs_pert:n=2,eps=0.1,seed=7", "prod:fs1,c=1|fs1,c=1", "prod:flat,n=1|fs1,c=2"}) {
    Model m = parse_model(spec);
    auto rep = kahler_validate(*m.metric, model_samples(m, 100, 42));
    INFO(spec);
    CHECK(rep.pass());
  }
}

TEST_CASE("flat model: identity metric, zero curvature") {
  Model m = flat_model(2);
  Rng rng(1);
  Eigen::VectorXd x = rng.point_in_ball(4, 3.0);
  CHECK((m.metric->value(x) - Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-13);
  CHECK(riemann(*m.metric, x).R.max_abs() <= 1e-13);
}

TEST_CASE("fs model: g(0) = c Id, W vanishes, scale relations") {
  Model m1 = fubini_study_model(2, 1.0);
  Model m2 = fubini_study_model(2, 2.0);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK((m2.metric->value(zero) - 2.0 * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-13);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x = rng.point_in_ball(4, 1.2);
    CHECK(weyl_norm_relative(*m1.metric, x) <= 1e-16);
    ChscFit f1 = chsc_fit(*m1.metric, x);
    ChscFit f2 = chsc_fit(*m2.metric, x);
    CHECK(f1.residual <= 1e-8);
    CHECK(f2.mu == doctest::Approx(f1.mu / 2.0).epsilon(1e-10));
    // identical Christoffels under scaling
    CHECK((christoffel(*m1.metric, x) - christoffel(*m2.metric, x)).max_abs() <= 1e-10);
  }
}

TEST_CASE("fs_perturbed: eps=0 limit equals FS; generic case loses mobility and flatness") {
  // eps = 0 is outside the contract; compare a tiny eps to FS instead
  Model fs = fubini_study_model(2, 1.0);
  Model tiny = fs_perturbed_model(2, 1e-6, 7);
  Eigen::VectorXd x = (Eigen::VectorXd(4) << 0.2, -0.1, 0.3, 0.15).finished();
  CHECK((tiny.metric->value(x) - fs.metric->value(x)).norm() <= 1e-4);

  Model m = fs_perturbed_model(2, 0.1, 7);
  CHECK(m.sample_radius > 0.05);
  double w = 0.0;
  Rng rng(3);
  for (int i = 0; i < 10; ++i) w = std::max(w, weyl_norm_relative(*m.metric, rng.point_in_ball(4, m.sample_radius)));
  CHECK(w > 1e-4);

  Eigen::VectorXd x0 = (Eigen::VectorXd(4) << 0.1, -0.2, 0.05, 0.3).finished();
  CHECK(degree_of_mobility(m.metric, x0, 5).dimension == 1);
}

TEST_CASE("products: flat x flat is flat; FS x FS is Kaehler but not constant HSC") {
  Model ff = product_model({{FactorSpec::Flat, 1}, {FactorSpec::Flat, 1}});
  Rng rng(4);
  Eigen::VectorXd x = rng.point_in_ball(4, 2.0);
  CHECK((ff.metric->value(x) - Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-13);

  Model fsfs = product_model({{FactorSpec::FS, 1, 1.0}, {FactorSpec::FS, 1, 1.0}});
  Eigen::VectorXd y = rng.point_in_ball(4, 1.0);
  CurvatureBundle cb = riemann(*fsfs.metric, y);
  // block-diagonal metric and curvature across the two factors
  Eigen::MatrixXd gv = fsfs.metric->value(y);
  CHECK(gv.block(0, 2, 2, 2).norm() <= 1e-13);
  double cross = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 2; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int e = 0; e < 4; ++e) cross = std::max(cross, std::abs(cb.R_low.at({a, b, c, e})));
  CHECK(cb.R.max_abs() > 1e-3);
  CHECK(chsc_fit(cb).residual > 1e-3);

  // mixed product: degree recorded, no value asserted a priori
  Model mixed = product_model({{FactorSpec::Flat, 1}, {FactorSpec::FS, 1, 1.0}});
  Eigen::VectorXd x0 = (Eigen::VectorXd(4) << 0.1, -0.2, 0.05, 0.3).finished();
  auto deg = degree_of_mobility(mixed.metric, x0, 5);
  CHECK(deg.dimension >= 1);
  CHECK(deg.dimension <= 9);
}

TEST_CASE("model parsing errors") {
  CHECK_THROWS_AS(parse_model("nope:n=2"), ManifestError);
  CHECK_THROWS_AS(parse_model("flat:n"), ManifestError);
  CHECK_THROWS_AS(parse_model("flat:n=1"), DomainError);
  CHECK_THROWS_AS(parse_model("fs:n=5,c=1"), DomainError);
  CHECK_THROWS_AS(parse_model("fs_pert:n=2,eps=0.5,seed=1"), DomainError);
}
