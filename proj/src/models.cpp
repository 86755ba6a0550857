#include "cprojlab/models.hpp"

#include <map>
#include <sstream>

#include "cprojlab/errors.hpp"

namespace cprojlab {

ScalarField squared_norm_field(int n) {
  ScalarField s = ScalarField::constant(0.0);
  for (int i = 0; i < 2 * n; ++i) s = s + pow(ScalarField::var(i), 2);
  return s;
}

Model flat_model(int n) {
  if (n < 2 || n > 6) throw DomainError("flat: 2 <= n <= 6");
  Model m;
  m.name = "flat:n=" + std::to_string(n);
  m.n = n;
  m.chart = Chart(n, 10.0);
  m.metric = metric_from_potential(m.chart, squared_norm_field(n));
  m.sample_radius = 5.0;
  return m;
}

Model fubini_study_model(int n, double c) {
  if (n < 2 || n > 4) throw DomainError("fs: 2 <= n <= 4");
  if (!(c > 0.0)) throw DomainError("fs: scale c must be positive");
  Model m;
  std::ostringstream nm;
  nm << "fs:n=" << n << ",c=" << c;
  m.name = nm.str();
  m.n = n;
  m.scale = c;
  m.chart = Chart(n, 3.0, 3.0);
  m.metric = metric_from_potential(m.chart, c * log(1.0 + squared_norm_field(n)));
  m.sample_radius = 1.2;
  return m;
}

Model fs_perturbed_model(int n, double eps, uint64_t seed) {
  if (n < 2 || n > 4) throw DomainError("fs_pert: 2 <= n <= 4");
  if (!(eps > 0.0 && eps <= 0.3)) throw DomainError("fs_pert: eps in (0, 0.3]");
  Model m;
  std::ostringstream nm;
  nm << "fs_pert:n=" << n << ",eps=" << eps << ",seed=" << seed;
  m.name = nm.str();
  m.n = n;
  m.eps = eps;
  m.seed = seed;
  m.chart = Chart(n, 3.0, 3.0);

  // seeded low-degree polynomial; monomials u_i^2 u_j^2 with mixed complex
  // directions are never pluriharmonic, so the gauge degeneracy is broken
  Rng rng(seed);
  const int d = 2 * n;
  ScalarField p = ScalarField::constant(0.0);
  std::ostringstream ptxt;
  bool firstterm = true;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      if (i / 2 == j / 2) continue;  // stay off the same complex direction
      double c = rng.uniform(-1.0, 1.0);
      if (std::abs(c) < 0.4) continue;
      p = p + c * (pow(ScalarField::var(i), 2) * pow(ScalarField::var(j), 2));
      ptxt << (firstterm ? "" : " + ") << c << "*x" << i + 1 << "^2*x" << j + 1 << "^2";
      firstterm = false;
    }
  if (firstterm) {
    p = pow(ScalarField::var(0), 2) * pow(ScalarField::var(3), 2);
    ptxt << "x1^2*x4^2";
  }
  m.perturbation = ptxt.str();
  auto metric = metric_from_potential(m.chart, log(1.0 + squared_norm_field(n)) + eps * p);

  // shrink the sampling radius until the metric is positive definite at
  // seeded samples (reported through Model::sample_radius)
  double r = 1.2;
  Rng check(seed + 1);
  while (r > 0.05) {
    bool ok = true;
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd x = check.point_in_ball(d, r);
      if (!positive_definite(metric->value(x))) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    r *= 0.8;
  }
  m.sample_radius = r;
  m.metric = metric;
  return m;
}

Model product_model(const std::vector<FactorSpec>& factors) {
  int total_n = 0;
  for (const auto& f : factors) total_n += f.n;
  if (total_n < 2 || total_n > 6) throw DomainError("product: total n must be in [2, 6]");
  ScalarField pot = ScalarField::constant(0.0);
  int offset = 0;
  std::ostringstream nm;
  nm << "prod:";
  double min_radius = 1e9;
  bool any_fs = false;
  for (size_t k = 0; k < factors.size(); ++k) {
    const auto& f = factors[k];
    ScalarField factor_pot;
    if (f.kind == FactorSpec::Flat) {
      factor_pot = squared_norm_field(f.n);
      nm << (k ? "|" : "") << "flat,n=" << f.n;
      min_radius = std::min(min_radius, 5.0);
    } else {
      factor_pot = f.c * log(1.0 + squared_norm_field(f.n));
      nm << (k ? "|" : "") << "fs" << f.n << ",c=" << f.c;
      min_radius = std::min(min_radius, 1.2);
      any_fs = true;
    }
    pot = pot + shift_vars(factor_pot, offset);
    offset += 2 * f.n;
  }
  Model m;
  m.name = nm.str();
  m.n = total_n;
  m.chart = any_fs ? Chart(total_n, 3.0, 3.0) : Chart(total_n, 10.0);
  m.metric = metric_from_potential(m.chart, pot);
  m.sample_radius = std::min(min_radius, any_fs ? 1.2 : 5.0);
  return m;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& s) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ManifestError("model parameter '" + item + "' is not key=value");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

int geti(const std::map<std::string, std::string>& kv, const std::string& k, int dflt = -1) {
  auto it = kv.find(k);
  if (it == kv.end()) {
    if (dflt >= 0) return dflt;
    throw ManifestError("missing model parameter '" + k + "'");
  }
  return std::stoi(it->second);
}

double getd(const std::map<std::string, std::string>& kv, const std::string& k, double dflt) {
  auto it = kv.find(k);
  return it == kv.end() ? dflt : std::stod(it->second);
}

}  // namespace

Model parse_model(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "flat") {
    auto kv = parse_kv(rest);
    return flat_model(geti(kv, "n"));
  }
  if (head == "fs") {
    auto kv = parse_kv(rest);
    return fubini_study_model(geti(kv, "n"), getd(kv, "c", 1.0));
  }
  if (head == "fs_pert") {
    auto kv = parse_kv(rest);
    return fs_perturbed_model(geti(kv, "n"), getd(kv, "eps", 0.1),
                              static_cast<uint64_t>(geti(kv, "seed", 7)));
  }
  if (head == "prod") {
    std::vector<FactorSpec> factors;
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, '|')) {
      FactorSpec f;
      if (part.rfind("fs1", 0) == 0) {
        f.kind = FactorSpec::FS;
        f.n = 1;
        auto comma = part.find(',');
        if (comma != std::string::npos) {
          auto kv = parse_kv(part.substr(comma + 1));
          f.c = getd(kv, "c", 1.0);
        }
      } else if (part.rfind("fs", 0) == 0) {
        auto comma = part.find(',');
        auto kv = parse_kv(comma == std::string::npos ? "" : part.substr(comma + 1));
        f.kind = FactorSpec::FS;
        f.n = geti(kv, "n", 1);
        f.c = getd(kv, "c", 1.0);
      } else if (part.rfind("flat", 0) == 0) {
        auto comma = part.find(',');
        auto kv = parse_kv(comma == std::string::npos ? "" : part.substr(comma + 1));
        f.kind = FactorSpec::Flat;
        f.n = geti(kv, "n", 1);
      } else {
        throw ManifestError("unknown product factor '" + part + "'");
      }
      factors.push_back(f);
    }
    return product_model(factors);
  }
  throw ManifestError("unknown model '" + head + "'");
}

}  // namespace cprojlab
