#include "cprojlab/kahler.hpp"

#include <cmath>

#include "cprojlab/errors.hpp"

namespace cprojlab {

PotentialMetric::PotentialMetric(Chart chart, ScalarField potential)
    : MetricField(std::move(chart)), pot_(std::move(potential)) {
  if (pot_.max_var() >= dim()) throw DomainError("potential uses coordinates beyond the chart dimension");
}

JetMat PotentialMetric::jets(const Eigen::VectorXd& x, int K) const {
  chart().require_interior(x, "PotentialMetric::jets");
  const int d = dim();
  const int nn = n();
  Jet kj = pot_.jet(x, K + 2);
  // second partial jets, order K
  std::vector<std::vector<Jet>> d2(d, std::vector<Jet>(d));
  for (int i = 0; i < d; ++i) {
    Jet di = kj.derivative(i);
    for (int j = i; j < d; ++j) d2[i][j] = di.derivative(j);
  }
  auto D2 = [&](int i, int j) -> const Jet& { return i <= j ? d2[i][j] : d2[j][i]; };
  auto sp = JetSpace::get(d, K);
  JetMat g(d, d, sp);
  for (int j = 0; j < nn; ++j)
    for (int k = 0; k < nn; ++k) {
      const int uj = 2 * j, vj = 2 * j + 1, uk = 2 * k, vk = 2 * k + 1;
      Jet a = (D2(uj, uk) + D2(vj, vk)) * 0.25;   // Re d^2K/dz_j dzbar_k
      Jet b = (D2(uj, vk) - D2(vj, uk)) * 0.25;   // Im d^2K/dz_j dzbar_k
      g(uj, uk) = a;
      g(vj, vk) = a;
      g(uj, vk) = b;
      g(vj, uk) = -b;
    }
  return g;
}

ComponentMetric::ComponentMetric(Chart chart, std::vector<std::vector<ScalarField>> comps)
    : MetricField(std::move(chart)), comps_(std::move(comps)) {
  const int d = dim();
  if (static_cast<int>(comps_.size()) != d) throw DomainError("component metric: wrong dimension");
  for (auto& row : comps_)
    if (static_cast<int>(row.size()) != d) throw DomainError("component metric: wrong dimension");
}

JetMat ComponentMetric::jets(const Eigen::VectorXd& x, int K) const {
  chart().require_interior(x, "ComponentMetric::jets");
  const int d = dim();
  JetMat g(d, d, JetSpace::get(d, K));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = comps_[i][j].jet(x, K);
  return g;
}

std::shared_ptr<MetricField> metric_from_potential(Chart chart, ScalarField K) {
  return std::make_shared<PotentialMetric>(std::move(chart), std::move(K));
}

namespace {

void require_pd(const Eigen::MatrixXd& gv, const char* where) {
  if (!positive_definite(gv)) throw NotPositiveDefinite(std::string(where) + ": metric not positive definite");
}

}  // namespace

std::vector<Jet> christoffel_jets(const MetricField& g, const Eigen::VectorXd& x, int K) {
  const int d = g.dim();
  JetMat gj = g.jets(x, K + 1);
  require_pd(gj.value(), "christoffel");
  JetMat ginv = gj.inverse();
  // dg[c][a][b] = d_c g_ab, order K
  std::vector<Jet> dg(static_cast<size_t>(d) * d * d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      for (int c = 0; c < d; ++c) {
        Jet der = gj(a, b).derivative(c);
        dg[(static_cast<size_t>(c) * d + a) * d + b] = der;
        dg[(static_cast<size_t>(c) * d + b) * d + a] = der;
      }
    }
  auto DG = [&](int c, int a, int b) -> const Jet& { return dg[(static_cast<size_t>(c) * d + a) * d + b]; };
  auto spK = JetSpace::get(d, K);
  std::vector<Jet> gamma(static_cast<size_t>(d) * d * d, Jet(spK, 0.0));
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        Jet s(spK, 0.0);
        for (int e = 0; e < d; ++e) {
          Jet t = DG(a, e, b) + DG(b, e, a) - DG(e, a, b);
          s += ginv(c, e).truncated(K) * t;
        }
        s *= 0.5;
        gamma[(static_cast<size_t>(c) * d + a) * d + b] = s;
        gamma[(static_cast<size_t>(c) * d + b) * d + a] = s;
      }
  return gamma;
}

TensorValue christoffel(const MetricField& g, const Eigen::VectorXd& x) {
  const int d = g.dim();
  auto gamma = christoffel_jets(g, x, 0);
  TensorValue G(d, {Slot::Up, Slot::Down, Slot::Down});
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) G.at({c, a, b}) = gamma[(static_cast<size_t>(c) * d + a) * d + b].value();
  return G;
}

CurvaturePair assemble_curvature(const std::vector<Jet>& gamma, int d) {
  CurvaturePair out;
  // R_ab^c_e = d_a Gamma^c_be - d_b Gamma^c_ae + Gamma^c_af Gamma^f_be - Gamma^c_bf Gamma^f_ae
  out.R = TensorValue(d, {Slot::Down, Slot::Down, Slot::Up, Slot::Down});
  auto G = [&](int c, int a, int b) { return gamma[(static_cast<size_t>(c) * d + a) * d + b].value(); };
  auto dG = [&](int e, int c, int a, int b) { return gamma[(static_cast<size_t>(c) * d + a) * d + b].partial1(e); };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == b) continue;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double v = dG(a, c, b, e) - dG(b, c, a, e);
          for (int f = 0; f < d; ++f) v += G(c, a, f) * G(f, b, e) - G(c, b, f) * G(f, a, e);
          out.R.at({a, b, c, e}) = v;
        }
    }
  out.Ric = TensorValue(d, {Slot::Down, Slot::Down});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double v = 0.0;
      for (int c = 0; c < d; ++c) v += out.R.at({c, a, c, b});
      out.Ric.at({a, b}) = v;
    }
  return out;
}

CurvatureBundle riemann(const MetricField& g, const Eigen::VectorXd& x) {
  const int d = g.dim();
  CurvatureBundle out;
  out.n = g.n();
  auto gamma = christoffel_jets(g, x, 1);
  out.g = g.value(x);
  out.ginv = out.g.inverse();
  out.J = standard_J(g.n());
  out.Omega = out.J.transpose() * out.g;

  out.Gamma = TensorValue(d, {Slot::Up, Slot::Down, Slot::Down});
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.Gamma.at({c, a, b}) = gamma[(static_cast<size_t>(c) * d + a) * d + b].value();

  CurvaturePair rp = assemble_curvature(gamma, d);
  out.R = std::move(rp.R);
  out.Ric = std::move(rp.Ric);

  out.R_low = TensorValue(d, {Slot::Down, Slot::Down, Slot::Down, Slot::Down});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int dd = 0; dd < d; ++dd) {
          double v = 0.0;
          for (int e = 0; e < d; ++e) v += out.R.at({a, b, e, dd}) * out.g(e, c);
          out.R_low.at({a, b, c, dd}) = v;
        }
  return out;
}

ChscFit chsc_fit(const CurvatureBundle& curv) {
  const int d = static_cast<int>(curv.g.rows());
  const Eigen::MatrixXd& g = curv.g;
  const Eigen::MatrixXd& Om = curv.Omega;
  double dot = 0.0, nmodel = 0.0, nR = 0.0;
  TensorValue model(d, {Slot::Down, Slot::Down, Slot::Down, Slot::Down});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double m = 0.25 * (g(a, c) * g(b, e) - g(b, c) * g(a, e) + Om(a, c) * Om(b, e) -
                             Om(b, c) * Om(a, e) + 2.0 * Om(a, b) * Om(c, e));
          model.at({a, b, c, e}) = m;
          double r = curv.R_low.at({a, b, c, e});
          dot += m * r;
          nmodel += m * m;
          nR += r * r;
        }
  ChscFit fit;
  if (std::sqrt(nR) < 1e-12) {
    fit.mu = 0.0;
    fit.residual = std::sqrt(nR);  // absolute when R ~ 0
    return fit;
  }
  fit.mu = dot / nmodel;
  TensorValue diff = curv.R_low - model * fit.mu;
  fit.residual = diff.norm() / std::sqrt(nR);
  return fit;
}

ChscFit chsc_fit(const MetricField& g, const Eigen::VectorXd& x) { return chsc_fit(riemann(g, x)); }

ValidationReport kahler_validate(const MetricField& g, const std::vector<Eigen::VectorXd>& samples, double tol) {
  ValidationReport rep;
  rep.tol = tol;
  const int d = g.dim();
  const Eigen::MatrixXd J = standard_J(g.n());
  const double j2 = (J * J + Eigen::MatrixXd::Identity(d, d)).norm();
  rep.max_J_squared = j2;  // exact zero by construction
  for (const auto& x : samples) {
    JetMat gj = g.jets(x, 1);
    Eigen::MatrixXd gv = gj.value();
    double gscale = gv.norm();
    if (!positive_definite(gv)) {
      rep.not_pd_count += 1;
      continue;
    }
    rep.max_hermitian = std::max(rep.max_hermitian, (J.transpose() * gv * J - gv).norm() / gscale);
    // nabla J from the Levi-Civita connection of g
    TensorValue Gm = christoffel(g, x);
    double nj = 0.0;
    for (int a = 0; a < d; ++a) {
      Eigen::MatrixXd Ga(d, d);
      for (int c = 0; c < d; ++c)
        for (int b = 0; b < d; ++b) Ga(c, b) = Gm.at({c, a, b});
      nj = std::max(nj, (Ga * J - J * Ga).norm() / std::max(1.0, Ga.norm()));
    }
    rep.max_nabla_J = std::max(rep.max_nabla_J, nj);
    // dOmega: cyclic sum of d_a Omega_bc
    std::vector<Eigen::MatrixXd> dOm(d);
    for (int a = 0; a < d; ++a) {
      Eigen::MatrixXd dg(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dg(i, j) = gj(i, j).partial1(a);
      dOm[a] = J.transpose() * dg;
    }
    double dmax = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        for (int c = b + 1; c < d; ++c) {
          double v = dOm[a](b, c) + dOm[b](c, a) + dOm[c](a, b);
          dmax = std::max(dmax, std::abs(v));
        }
    rep.max_d_omega = std::max(rep.max_d_omega, dmax / gscale);
    rep.n_points += 1;
  }
  return rep;
}

}  // namespace cprojlab
