#include "cprojlab/cproj.hpp"

#include <cmath>

#include "cprojlab/errors.hpp"

namespace cprojlab {

Eigen::VectorXd OneForm::value(const Eigen::VectorXd& x) const {
  auto j = jets(x, 0);
  Eigen::VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = j[i].value();
  return v;
}

std::vector<Jet> ComponentOneForm::jets(const Eigen::VectorXd& x, int K) const {
  std::vector<Jet> out;
  out.reserve(comps_.size());
  for (const auto& f : comps_) out.push_back(f.jet(x, K));
  return out;
}

std::vector<Jet> ExactOneForm::jets(const Eigen::VectorXd& x, int K) const {
  Jet fj = f_.jet(x, K + 1);
  std::vector<Jet> out;
  out.reserve(dim_);
  for (int a = 0; a < dim_; ++a) out.push_back(fj.derivative(a));
  return out;
}

TensorValue ConnectionField::christoffel_at(const Eigen::VectorXd& x) const {
  const int d = dim();
  auto gj = gamma_jets(x, 0);
  TensorValue G(d, {Slot::Up, Slot::Down, Slot::Down});
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) G.at({c, a, b}) = gj[(static_cast<size_t>(c) * d + a) * d + b].value();
  return G;
}

std::vector<Jet> LeviCivitaConnection::gamma_jets(const Eigen::VectorXd& x, int K) const {
  return christoffel_jets(*g_, x, K);
}

std::vector<Jet> ChangedConnection::gamma_jets(const Eigen::VectorXd& x, int K) const {
  const int d = dim();
  const int n = d / 2;
  std::vector<Jet> out = base_->gamma_jets(x, K);
  std::vector<Jet> u = ups_->jets(x, K);
  const Eigen::MatrixXd J = standard_J(n);
  // (J Ups)_a = J_a^c Ups_c
  auto sp = u[0].space_ptr();
  std::vector<Jet> ju(d, Jet(sp, 0.0));
  for (int a = 0; a < d; ++a) {
    Jet s(sp, 0.0);
    for (int c = 0; c < d; ++c)
      if (J(c, a) != 0.0) s += u[c] * J(c, a);
    ju[a] = s;
  }
  // Q^b_{ad} = 1/2 (Ups_a delta_d^b + delta_a^b Ups_d - (JUps)_a J_d^b - J_a^b (JUps)_d)
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      for (int dd = 0; dd < d; ++dd) {
        Jet q(sp, 0.0);
        if (dd == b) q += u[a];
        if (a == b) q += u[dd];
        if (J(b, dd) != 0.0) q -= ju[a] * J(b, dd);
        if (J(b, a) != 0.0) q -= ju[dd] * J(b, a);
        q *= 0.5;
        out[(static_cast<size_t>(b) * d + a) * d + dd] += q;
      }
  return out;
}

TensorValue cproj_difference(const Eigen::VectorXd& ups, int n) {
  const int d = 2 * n;
  const Eigen::MatrixXd J = standard_J(n);
  Eigen::VectorXd ju(d);
  for (int a = 0; a < d; ++a) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += J(c, a) * ups[c];
    ju[a] = s;
  }
  TensorValue Q(d, {Slot::Up, Slot::Down, Slot::Down});
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      for (int dd = 0; dd < d; ++dd) {
        double q = 0.0;
        if (dd == b) q += ups[a];
        if (a == b) q += ups[dd];
        q -= ju[a] * J(b, dd);
        q -= ju[dd] * J(b, a);
        Q.at({b, a, dd}) = 0.5 * q;
      }
  return Q;
}

std::shared_ptr<ConnectionField> cproj_change(std::shared_ptr<const ConnectionField> gamma,
                                              std::shared_ptr<const OneForm> ups) {
  return std::make_shared<ChangedConnection>(std::move(gamma), std::move(ups));
}

double DensityChange::correction(const Eigen::VectorXd& x, const Eigen::VectorXd& direction,
                                 double sigma) const {
  return -ups_->value(x).dot(direction) * sigma;
}

double DensityChange::transport_factor(const Eigen::VectorXd& x0, const Eigen::VectorXd& w, double T,
                                       int steps) const {
  // hat nabla_{w} sigma = 0 with sigma0 nabla-parallel along a straight
  // line: d(log sigma)/dt = Ups(w) at x0 + t w. Classic RK4.
  auto f = [&](double t) { return ups_->value(x0 + t * w).dot(w); };
  double L = 0.0;
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    double t = i * h;
    double k1 = f(t);
    double k2 = f(t + 0.5 * h);
    double k4 = f(t + h);
    L += h / 6.0 * (k1 + 4.0 * k2 + k4);
  }
  return std::exp(L);
}

TensorValue rho_tensor(const TensorValue& Ric, int n) {
  const int d = 2 * n;
  const Eigen::MatrixXd J = standard_J(n);
  Eigen::MatrixXd ric = Ric.as_matrix();
  Eigen::MatrixXd sym = 0.5 * (ric + ric.transpose());
  // J_(a^c J_b)^d Ric_cd = sym part of (J^T ric J)
  Eigen::MatrixXd jj = J.transpose() * ric * J;
  Eigen::MatrixXd jsym = 0.5 * (jj + jj.transpose());
  Eigen::MatrixXd P = (ric + (sym - jsym) / (n - 1.0)) / (n + 1.0);
  TensorValue out(d, {Slot::Down, Slot::Down});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out.at({a, b}) = P(a, b);
  return out;
}

TensorValue del_P(const TensorValue& P, int n) {
  const int d = 2 * n;
  const Eigen::MatrixXd J = standard_J(n);
  Eigen::MatrixXd p = P.as_matrix();
  Eigen::MatrixXd M = p * J;  // M(b,d) = P_be J_d^e
  TensorValue out(d, {Slot::Down, Slot::Down, Slot::Up, Slot::Down});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double v = 0.0;
          if (a == c) v += 0.5 * p(b, e);
          if (b == c) v -= 0.5 * p(a, e);
          v -= 0.5 * (J(c, a) * M(b, e) - J(c, b) * M(a, e));
          if (c == e) v -= 0.5 * (p(a, b) - p(b, a));
          v -= 0.5 * (M(b, a) - M(a, b)) * J(c, e);
          out.at({a, b, c, e}) = v;
        }
  return out;
}

TensorValue weyl_from(const TensorValue& R, const TensorValue& P, int n) { return R - del_P(P, n); }

WeylPointData weyl_at(const ConnectionField& conn, const Eigen::VectorXd& x, int n) {
  WeylPointData out;
  auto gamma = conn.gamma_jets(x, 1);
  CurvaturePair cp = assemble_curvature(gamma, 2 * n);
  out.R = std::move(cp.R);
  out.Ric = std::move(cp.Ric);
  out.P = rho_tensor(out.Ric, n);
  out.W = weyl_from(out.R, out.P, n);
  return out;
}

WeylPointData weyl_at(const MetricField& g, const Eigen::VectorXd& x) {
  LeviCivitaConnection lc(std::shared_ptr<const MetricField>(&g, [](const MetricField*) {}));
  return weyl_at(lc, x, g.n());
}

InvarianceReport weyl_invariance_check(const MetricField& g, std::shared_ptr<const OneForm> ups,
                                       const std::vector<Eigen::VectorXd>& samples) {
  auto gp = std::shared_ptr<const MetricField>(&g, [](const MetricField*) {});
  auto lc = std::make_shared<LeviCivitaConnection>(gp);
  auto changed = cproj_change(lc, std::move(ups));
  InvarianceReport rep;
  for (const auto& x : samples) {
    WeylPointData w0 = weyl_at(*lc, x, g.n());
    WeylPointData w1 = weyl_at(*changed, x, g.n());
    double scale = std::max({w0.R.norm(), w1.R.norm(), 1e-12});
    rep.max_rel_discrepancy = std::max(rep.max_rel_discrepancy, (w1.W - w0.W).norm() / scale);
    rep.n_points += 1;
  }
  return rep;
}

double curvature_invariant_F(const TensorValue& T, const Eigen::MatrixXd& gv, const Eigen::MatrixXd& ginv) {
  const int d = static_cast<int>(gv.rows());
  // W1[a][b][c][t] = T[a][b][c][e] ginv(e,t)
  TensorValue W1(d, {Slot::Down, Slot::Down, Slot::Up, Slot::Up});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int t = 0; t < d; ++t) {
          double v = 0.0;
          for (int e = 0; e < d; ++e) v += T.at({a, b, c, e}) * ginv(e, t);
          W1.at({a, b, c, t}) = v;
        }
  // W2[a][b][s][t] = W1[a][b][c][t] g(c,s)
  TensorValue W2(d, {Slot::Down, Slot::Down, Slot::Down, Slot::Up});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) {
          double v = 0.0;
          for (int c = 0; c < d; ++c) v += W1.at({a, b, c, t}) * gv(c, s);
          W2.at({a, b, s, t}) = v;
        }
  // W3[e][f][s][t] = ginv(a,e) ginv(b,f) W2[a][b][s][t]
  double F = 0.0;
  for (int e = 0; e < d; ++e)
    for (int f = 0; f < d; ++f)
      for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) {
          double v = 0.0;
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) v += ginv(a, e) * ginv(b, f) * W2.at({a, b, s, t});
          F += v * T.at({e, f, s, t});
        }
  return F;
}

double weyl_norm(const MetricField& g, const Eigen::VectorXd& x) {
  WeylPointData w = weyl_at(g, x);
  Eigen::MatrixXd gv = g.value(x);
  return curvature_invariant_F(w.W, gv, gv.inverse());
}

double weyl_norm_relative(const MetricField& g, const Eigen::VectorXd& x) {
  WeylPointData w = weyl_at(g, x);
  Eigen::MatrixXd gv = g.value(x);
  Eigen::MatrixXd ginv = gv.inverse();
  double FW = curvature_invariant_F(w.W, gv, ginv);
  double FR = curvature_invariant_F(w.R, gv, ginv);
  if (FR <= 1e-14) return FW <= 1e-14 ? 0.0 : FW;
  return FW / FR;
}

}  // namespace cprojlab
