#include "cprojlab/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "cprojlab/errors.hpp"

namespace cprojlab {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

CurveTrace integrate(const MetricField& g, const CurveState& s0, double T, const IntegratorConfig& cfg,
                     const std::vector<Monitor>& monitors, const Rhs& rhs) {
  const int d = g.dim();
  CurveTrace trace;
  trace.channel_names.push_back("energy");
  for (const auto& m : monitors) trace.channel_names.push_back(m.name);
  trace.channels.assign(trace.channel_names.size(), {});

  Eigen::VectorXd y(2 * d);
  y.head(d) = s0.x;
  y.tail(d) = s0.v;
  double t = s0.t;
  const double tend = s0.t + T;

  auto record = [&](double tc, const Eigen::VectorXd& yc) {
    CurveState st;
    st.t = tc;
    st.x = yc.head(d);
    st.v = yc.tail(d);
    double E = st.v.dot(g.value(st.x) * st.v);
    trace.channels[0].push_back(E);
    for (size_t k = 0; k < monitors.size(); ++k) trace.channels[k + 1].push_back(monitors[k].fn(st.x, st.v));
    trace.states.push_back(std::move(st));
  };

  if (!g.chart().interior(s0.x, cfg.boundary_margin)) throw DomainError("integrate: start point not interior");
  record(t, y);

  double h = std::min(cfg.h_init, T);
  Eigen::VectorXd k1 = rhs(t, y);
  int steps = 0;
  while (t < tend - 1e-15) {
    if (++steps > cfg.max_steps) {
      trace.status = ExitStatus::StepLimit;
      return trace;
    }
    h = std::min(h, tend - t);
    Eigen::VectorXd k2, k3, k4, k5, k6, k7, ynew;
    bool inside = true;
    try {
      k2 = rhs(t + h / 5, y + h * (a21 * k1));
      k3 = rhs(t + 3 * h / 10, y + h * (a31 * k1 + a32 * k2));
      k4 = rhs(t + 4 * h / 5, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = rhs(t + 8 * h / 9, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      if (!g.chart().interior(ynew.head(d), cfg.boundary_margin)) inside = false;
      if (inside) k7 = rhs(t + h, ynew);
    } catch (const DomainError&) {
      inside = false;
    } catch (const NotPositiveDefinite&) {
      inside = false;
    }
    if (!inside) {
      h *= 0.5;
      if (h < cfg.h_min) {
        trace.status = ExitStatus::BoundaryExit;
        return trace;
      }
      continue;
    }
    Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double errnorm = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double q = err[i] / sc;
      errnorm += q * q;
    }
    errnorm = std::sqrt(errnorm / y.size());
    if (errnorm <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      record(t, y);
    }
    double fac = 0.9 * std::pow(std::max(errnorm, 1e-12), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    h = std::clamp(h, cfg.h_min, cfg.h_max);
    if (h <= cfg.h_min && errnorm > 1.0) {
      trace.status = ExitStatus::StepLimit;
      return trace;
    }
  }
  trace.status = ExitStatus::Completed;
  return trace;
}

}  // namespace

double CurveTrace::channel_drift(int k) const {
  const auto& c = channels[k];
  if (c.empty()) return 0.0;
  double lo = c[0], hi = c[0], mx = 0.0;
  for (double v : c) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mx = std::max(mx, std::abs(v));
  }
  return (hi - lo) / std::max(mx, 1e-12);
}

std::string CurveTrace::to_csv() const {
  std::ostringstream os;
  const int d = states.empty() ? 0 : static_cast<int>(states[0].x.size());
  os << "t";
  for (int i = 1; i <= d; ++i) os << ",x" << i;
  for (int i = 1; i <= d; ++i) os << ",v" << i;
  for (const auto& n : channel_names) os << ",channel_" << n;
  os << "\n";
  char buf[32];
  auto put = [&](double v) {
    snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (size_t s = 0; s < states.size(); ++s) {
    put(states[s].t);
    for (int i = 0; i < d; ++i) {
      os << ",";
      put(states[s].x[i]);
    }
    for (int i = 0; i < d; ++i) {
      os << ",";
      put(states[s].v[i]);
    }
    for (size_t k = 0; k < channels.size(); ++k) {
      os << ",";
      put(channels[k][s]);
    }
    os << "\n";
  }
  return os.str();
}

CurveTrace geodesic(const MetricField& g, const CurveState& s0, double T, const IntegratorConfig& cfg,
                    const std::vector<Monitor>& monitors) {
  const int d = g.dim();
  auto rhs = [&](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd x = y.head(d), v = y.tail(d);
    TensorValue Gm = christoffel(g, x);
    Eigen::VectorXd out(2 * d);
    out.head(d) = v;
    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc += Gm.at({c, a, b}) * v[a] * v[b];
      out[d + c] = -acc;
    }
    return out;
  };
  CurveTrace tr = integrate(g, s0, T, cfg, monitors, rhs);
  tr.energy_drift = tr.channel_drift(0);
  return tr;
}

CurveTrace jplanar(const MetricField& g, const CurveState& s0, const std::function<double(double)>& alpha,
                   const std::function<double(double)>& beta, double T, const IntegratorConfig& cfg,
                   const std::vector<Monitor>& monitors) {
  const int d = g.dim();
  const Eigen::MatrixXd J = standard_J(g.n());
  auto rhs = [&](double t, const Eigen::VectorXd& y) {
    Eigen::VectorXd x = y.head(d), v = y.tail(d);
    TensorValue Gm = christoffel(g, x);
    Eigen::VectorXd out(2 * d);
    out.head(d) = v;
    Eigen::VectorXd force = alpha(t) * v + beta(t) * (J * v);
    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc += Gm.at({c, a, b}) * v[a] * v[b];
      out[d + c] = -acc + force[c];
    }
    return out;
  };
  CurveTrace tr = integrate(g, s0, T, cfg, monitors, rhs);
  tr.energy_drift = tr.channel_drift(0);
  return tr;
}

double integral_It(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& v, double t) {
  Eigen::MatrixXd A0 = A.value(x);
  Eigen::MatrixXd g0 = g.value(x);
  Eigen::MatrixXcd Ac = real_to_complex(A0);
  AdjugatePoly ap = adjugate_poly(Ac);
  const int n = static_cast<int>(Ac.rows());
  Eigen::MatrixXcd adj = Eigen::MatrixXcd::Zero(n, n);
  double tp = 1.0;
  for (int k = 0; k < n; ++k) {
    adj += tp * ap.B[k];
    tp *= t;
  }
  Eigen::MatrixXd R = complex_to_real(adj);
  return v.dot(g0 * (R * v));
}

double integral_linear(const HermitianFieldSource& A, const MetricField& g, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& v) {
  const Eigen::MatrixXd J = standard_J(g.n());
  Eigen::VectorXd Lam = lambda_vector(A, g, x);
  return (J * Lam).dot(g.value(x) * v);
}

namespace {

void orient(Eigen::VectorXd& e) {
  for (int i = 0; i < e.size(); ++i)
    if (std::abs(e[i]) > 1e-8) {
      if (e[i] < 0) e = -e;
      return;
    }
}

// J-align the eigenvectors of one eigenvalue cluster (columns of E)
void fill_cluster(const Eigen::MatrixXd& E, const Eigen::MatrixXd& g0, const Eigen::MatrixXd& J,
                  Eigen::MatrixXd& F, int& col) {
  const int m = static_cast<int>(E.cols());
  Eigen::MatrixXd left = E;
  int remaining = m;
  while (remaining >= 2) {
    Eigen::VectorXd e = left.col(0);
    // g-normalize, orient deterministically
    e /= std::sqrt(e.dot(g0 * e));
    orient(e);
    Eigen::VectorXd je = J * e;
    F.col(col++) = e;
    F.col(col++) = je;
    // project the rest g-orthogonally to span{e, je}
    Eigen::MatrixXd next(left.rows(), remaining - 2);
    int k = 0;
    for (int c = 1; c < remaining; ++c) {
      Eigen::VectorXd w = left.col(c);
      w -= e * e.dot(g0 * w);
      w -= je * je.dot(g0 * w);
      if (w.norm() > 1e-9 && k < remaining - 2) next.col(k++) = w;
    }
    // guard against losing columns to the projection
    while (k < remaining - 2) next.col(k++) = Eigen::VectorXd::Zero(left.rows());
    left = next;
    remaining -= 2;
  }
}

}  // namespace

AdaptedFrame adapted_frame(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& g0) {
  const int d = static_cast<int>(A0.rows());
  const Eigen::MatrixXd J = standard_J(d / 2);
  GEigen ge = eigen_g_selfadjoint(A0, g0);
  AdaptedFrame out;
  out.F.resize(d, d);
  out.eigs.resize(d);
  int col = 0;
  int i = 0;
  while (i < d) {
    int j = i;
    while (j + 1 < d && std::abs(ge.values[j + 1] - ge.values[i]) <= 1e-8 * (1.0 + std::abs(ge.values[i]))) ++j;
    const int m = j - i + 1;
    Eigen::MatrixXd E = ge.vectors.middleCols(i, m);
    int col0 = col;
    fill_cluster(E, g0, J, out.F, col);
    for (int c = col0; c < col; ++c) out.eigs[c] = ge.values[i];
    i = j + 1;
  }
  return out;
}

AdaptedFrame adapted_frame_P(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& g0, int m, int mtilde,
                             double* rho_out) {
  AdaptedFrame base = adapted_frame(A0, g0);
  const int d = static_cast<int>(A0.rows());
  AdaptedFrame out;
  out.F.resize(d, d);
  out.eigs.resize(d);
  std::vector<int> rho_cols, one_cols, zero_cols;
  for (int c = 0; c < d; ++c) {
    double v = base.eigs[c];
    if (std::abs(v - 1.0) <= 1e-6 && static_cast<int>(one_cols.size()) < 2 * m)
      one_cols.push_back(c);
    else if (std::abs(v) <= 1e-6 && static_cast<int>(zero_cols.size()) < 2 * mtilde)
      zero_cols.push_back(c);
    else
      rho_cols.push_back(c);
  }
  if (static_cast<int>(rho_cols.size()) != 2)
    throw NotPropertyP("adapted_frame_P: spectrum is not of property-(P) shape at this point");
  double rho = base.eigs[rho_cols[0]];
  if (std::abs(rho) <= 1e-8 || std::abs(rho - 1.0) <= 1e-8)
    throw NonRegularPoint("adapted_frame_P: rho collides with a constant eigenvalue");
  if (rho_out) *rho_out = rho;
  int col = 0;
  for (int c : rho_cols) {
    out.F.col(col) = base.F.col(c);
    out.eigs[col++] = base.eigs[c];
  }
  for (int c : one_cols) {
    out.F.col(col) = base.F.col(c);
    out.eigs[col++] = base.eigs[c];
  }
  for (int c : zero_cols) {
    out.F.col(col) = base.F.col(c);
    out.eigs[col++] = base.eigs[c];
  }
  return out;
}

NormalizedIntegral integral_normalized(const HermitianFieldSource& A, const MetricField& g,
                                       const CurveState& s, double t, int m, int mtilde) {
  const int d = g.dim();
  const int n = g.n();
  if (2 * (1 + m + mtilde) != d) throw NotPropertyP("integral_normalized: m, mtilde inconsistent with n");
  Eigen::MatrixXd A0 = A.value(s.x);
  Eigen::MatrixXd g0 = g.value(s.x);
  NormalizedIntegral out;
  AdaptedFrame fr = adapted_frame_P(A0, g0, m, mtilde, &out.rho);
  Eigen::VectorXd xi = fr.F.transpose() * (g0 * s.v);
  const int am = m >= 1 ? 1 : 0;
  const int amt = mtilde >= 1 ? 1 : 0;
  double q_rho = 0.0, q_one = 0.0, q_zero = 0.0;
  q_rho = xi[0] * xi[0] + xi[1] * xi[1];
  for (int i = 2; i < 2 + 2 * m; ++i) q_one += xi[i] * xi[i];
  for (int i = 2 + 2 * m; i < d; ++i) q_zero += xi[i] * xi[i];
  auto powi = [](double b, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= b;
    return r;
  };
  out.I_tilde = powi(t - 1.0, am) * powi(t, amt) * q_rho + (t - out.rho) * powi(t, amt) * q_one +
                (t - out.rho) * powi(t - 1.0, am) * q_zero;
  out.prefactor = powi(t - 1.0, am * (m - 1)) * powi(t, amt * (mtilde - 1));
  out.I_t = integral_It(A, g, s.x, s.v, t);
  out.identity_residual = std::abs(out.I_t - out.prefactor * out.I_tilde) / std::max(std::abs(out.I_t), 1e-12);
  (void)n;
  return out;
}

int integral_family_rank(const HermitianFieldSource& A, const MetricField& g, const CurveState& s,
                         const std::vector<double>& ts, double rel_tol) {
  // gradients of I_t in (x, v) at the state, one row per t, rank by SVD
  const int d = g.dim();
  const double h = 1e-5;
  Eigen::MatrixXd Mrows(static_cast<int>(ts.size()), 2 * d);
  for (size_t r = 0; r < ts.size(); ++r) {
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd xp = s.x, xm = s.x;
      xp[i] += h;
      xm[i] -= h;
      Mrows(r, i) = (integral_It(A, g, xp, s.v, ts[r]) - integral_It(A, g, xm, s.v, ts[r])) / (2 * h);
      Eigen::VectorXd vp = s.v, vm = s.v;
      vp[i] += h;
      vm[i] -= h;
      Mrows(r, d + i) = (integral_It(A, g, s.x, vp, ts[r]) - integral_It(A, g, s.x, vm, ts[r])) / (2 * h);
    }
  }
  return numeric_rank(Mrows, rel_tol, 1.0).rank;  // no gap gating: exploratory
}

}  // namespace cprojlab
