#pragma once

// Built-in manifolds: flat C^n, CP^n with c * g_FS on the affine chart,
// seeded perturbations of FS, and potential-sum products. Addressable by
// name strings like "fs:n=2,c=1", "flat:n=2", "fs_pert:n=2,eps=0.1,seed=7",
// "prod:fs1,c=1|fs1,c=1".

#include <memory>
#include <string>
#include <vector>

#include "cprojlab/kahler.hpp"

namespace cprojlab {

struct Model {
  std::string name;
  Chart chart;
  std::shared_ptr<MetricField> metric;
  double sample_radius = 1.0;   // seeded sampling stays inside this ball
  int n = 0;
  double scale = 1.0;
  double eps = 0.0;
  uint64_t seed = 0;
  std::string perturbation;     // expression text, for reproducibility
};

ScalarField squared_norm_field(int n);

Model flat_model(int n);
Model fubini_study_model(int n, double c);
Model fs_perturbed_model(int n, double eps, uint64_t seed);
// product from factor potentials; factors may have n = 1 (FS factors of a
// product only; standalone models require n >= 2)
struct FactorSpec {
  enum Kind { Flat, FS } kind;
  int n = 1;
  double c = 1.0;
};
Model product_model(const std::vector<FactorSpec>& factors);

Model parse_model(const std::string& spec);

// variable-shifted copy of an expression (x_i -> x_{i+offset})
ScalarField shift_vars(const ScalarField& f, int offset, int new_nvars);

}  // namespace cprojlab
