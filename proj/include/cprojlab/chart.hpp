#pragma once

#include <limits>
#include <string>

#include <Eigen/Dense>

#include "cprojlab/errors.hpp"

namespace cprojlab {

// Coordinate chart on R^{2n}, real coordinates (u1,v1,...,un,vn) with
// z_j = u_j + i v_j. The domain is an axis-aligned box, optionally cut to a
// centered ball (|x| < radius) for single-chart models of CP^n.
struct Chart {
  int n = 0;  // complex dimension, n >= 2
  Eigen::VectorXd lo, hi;
  double radius = std::numeric_limits<double>::infinity();

  Chart() = default;
  Chart(int n_, double box_halfwidth, double ball_radius = std::numeric_limits<double>::infinity());

  int dim() const { return 2 * n; }
  bool interior(const Eigen::VectorXd& x, double margin = 0.0) const;
  void require_interior(const Eigen::VectorXd& x, const std::string& what) const;
};

// Deterministic, platform-independent generator (SplitMix64 core). All
// seeded sampling in the library and the CLI goes through this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : s_(seed) {}

  uint64_t next_u64();
  double uniform();                     // [0,1)
  double uniform(double a, double b);
  double normal();
  Eigen::VectorXd normal_vec(int dim);
  Eigen::VectorXd unit_vec(int dim);
  // uniform in the centered ball of the given radius (rejection from box)
  Eigen::VectorXd point_in_ball(int dim, double radius);
  Eigen::VectorXd point_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

 private:
  uint64_t s_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cprojlab
