#include "cprojlab/chart.hpp"

#include <cmath>

namespace cprojlab {

Chart::Chart(int n_, double box_halfwidth, double ball_radius) : n(n_), radius(ball_radius) {
  if (n < 1) throw DomainError("chart requires n >= 1");
  lo = Eigen::VectorXd::Constant(2 * n, -box_halfwidth);
  hi = Eigen::VectorXd::Constant(2 * n, box_halfwidth);
}

bool Chart::interior(const Eigen::VectorXd& x, double margin) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(x[i] > lo[i] + margin && x[i] < hi[i] - margin)) return false;
  if (std::isfinite(radius) && !(x.norm() < radius - margin)) return false;
  return true;
}

void Chart::require_interior(const Eigen::VectorXd& x, const std::string& what) const {
  if (!interior(x)) throw DomainError(what + ": point outside chart domain");
}

uint64_t Rng::next_u64() {
  s_ += 0x9e3779b97f4a7c15ULL;
  uint64_t z = s_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double th = 2.0 * M_PI * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

Eigen::VectorXd Rng::normal_vec(int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd Rng::unit_vec(int dim) {
  Eigen::VectorXd v = normal_vec(dim);
  double nv = v.norm();
  while (nv < 1e-12) {
    v = normal_vec(dim);
    nv = v.norm();
  }
  return v / nv;
}

Eigen::VectorXd Rng::point_in_ball(int dim, double radius) {
  while (true) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(-1.0, 1.0);
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

Eigen::VectorXd Rng::point_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Eigen::VectorXd v(lo.size());
  for (int i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
  return v;
}

}  // namespace cprojlab
