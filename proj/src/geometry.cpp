#include "calibra/geometry.hpp"

#include <cmath>

#include "calibra/error.hpp"

namespace calibra {

Christoffel christoffel(const MetricJet& mj) {
  const int n = static_cast<int>(mj.G.rows());
  const Eigen::MatrixXd Ginv = mj.G.llt().solve(Eigen::MatrixXd::Identity(n, n));
  Christoffel gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += Ginv(k, l) * (mj.dG[i](j, l) + mj.dG[j](i, l) - mj.dG[l](i, j));
        gamma[k](i, j) = 0.5 * s;
        gamma[k](j, i) = gamma[k](i, j);
      }
    }
  return gamma;
}

Christoffel christoffel(const MetricField& g, const Eigen::VectorXd& p) {
  return christoffel(g.jet(p));
}

Eigen::MatrixXd hessian(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p) {
  const Eigen::VectorXd q = g.domain().wrap(p);
  const Jet fj = f.jet(q);
  const Christoffel gamma = christoffel(g, q);
  Eigen::MatrixXd H = fj.h;
  for (int k = 0; k < g.dim(); ++k) H -= gamma[k] * fj.g(k);
  return H;
}

Eigen::VectorXd gradient(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p) {
  const Eigen::VectorXd q = g.domain().wrap(p);
  return g.at(q).llt().solve(f.jet(q).g);
}

double laplacian(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p) {
  const Eigen::VectorXd q = g.domain().wrap(p);
  return (g.inverse_at(q) * hessian(g, f, q)).trace();
}

namespace {

// dgamma[m][k](i,j) = d_m Gamma^k_ij, from metric first and second
// derivatives:
//   d_m Gamma^k_ij = 1/2 (d_m g^{kl}) A_{lij} + 1/2 g^{kl} d_m A_{lij},
//   A_{lij} = d_i g_jl + d_j g_il - d_l g_ij,
//   d_m g^{kl} = -(G^{-1} dG_m G^{-1})^{kl}.
std::vector<Christoffel> dgamma_exact(const MetricJet& mj) {
  const int n = static_cast<int>(mj.G.rows());
  const Eigen::MatrixXd Ginv = mj.G.llt().solve(Eigen::MatrixXd::Identity(n, n));
  std::vector<Eigen::MatrixXd> dGinv(n);
  for (int m = 0; m < n; ++m) dGinv[m] = -Ginv * mj.dG[m] * Ginv;
  std::vector<Christoffel> dg(n, Christoffel(n, Eigen::MatrixXd::Zero(n, n)));
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            const double A = mj.dG[i](j, l) + mj.dG[j](i, l) - mj.dG[l](i, j);
            const double dA = mj.d2(m, i)(j, l) + mj.d2(m, j)(i, l) - mj.d2(m, l)(i, j);
            s += dGinv[m](k, l) * A + Ginv(k, l) * dA;
          }
          dg[m][k](i, j) = 0.5 * s;
          dg[m][k](j, i) = dg[m][k](i, j);
        }
  return dg;
}

std::vector<Christoffel> dgamma_fd(const MetricField& g, const Eigen::VectorXd& p,
                                   double fd_step) {
  const int n = g.dim();
  std::vector<Christoffel> dg(n);
  for (int m = 0; m < n; ++m) {
    // Step relative to the chart scale in coordinate m, capped so huge boxes
    // (half-plane models and the like) do not blow up the stencil.
    const double h = fd_step * std::min(g.domain().width(m), 2.0 * M_PI);
    if (!g.domain().periodic[m]) {
      Eigen::VectorXd lo2 = p, hi2 = p;
      lo2(m) -= h;
      hi2(m) += h;
      if (!g.domain().contains(lo2) || !g.domain().contains(hi2))
        throw ChartBoundaryError(
            "curvature stencil would leave the chart (point within one step of the boundary)",
            p);
    }
    Eigen::VectorXd pp = p, pm = p;
    pp(m) += h;
    pm(m) -= h;
    const Christoffel gp = christoffel(g, pp);
    const Christoffel gm = christoffel(g, pm);
    Christoffel d(n, Eigen::MatrixXd(n, n));
    for (int k = 0; k < n; ++k) d[k] = (gp[k] - gm[k]) / (2.0 * h);
    dg[m] = std::move(d);
  }
  return dg;
}

}  // namespace

CurvaturePack curvature(const MetricField& g, const Eigen::VectorXd& p,
                        const CurvatureOptions& opt) {
  const Eigen::VectorXd q = g.domain().wrap(p);
  const int n = g.dim();
  const MetricJet mj = g.jet(q);
  CurvaturePack cp;
  cp.gamma = christoffel(mj);
  const std::vector<Christoffel> dg =
      opt.exact_third_derivatives ? dgamma_exact(mj) : dgamma_fd(g, q, opt.fd_step);

  // R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
  //           + Gamma^m_jk Gamma^l_im - Gamma^m_ik Gamma^l_jm.
  cp.riemann = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = dg[i][l](j, k) - dg[j][l](i, k);
          for (int m = 0; m < n; ++m)
            s += cp.gamma[m](j, k) * cp.gamma[l](i, m) - cp.gamma[m](i, k) * cp.gamma[l](j, m);
          cp.riemann(i, j, k, l) = s;
        }

  cp.ricci = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += cp.riemann(i, j, k, i);
      cp.ricci(j, k) = s;
    }

  const Eigen::MatrixXd Ginv = mj.G.llt().solve(Eigen::MatrixXd::Identity(n, n));
  cp.scalar = (Ginv * cp.ricci).trace();
  return cp;
}

double riemann_apply(const CurvaturePack& cp, const Eigen::MatrixXd& G,
                     const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                     const Eigen::VectorXd& Z, const Eigen::VectorXd& W) {
  const int n = cp.riemann.n();
  const Eigen::VectorXd Wl = G * W;  // lower the output index
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (X(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (Y(j) == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        if (Z(k) == 0.0) continue;
        for (int l = 0; l < n; ++l)
          s += X(i) * Y(j) * Z(k) * Wl(l) * cp.riemann(i, j, k, l);
      }
    }
  }
  return s;
}

double sectional_curvature(const CurvaturePack& cp, const Eigen::MatrixXd& G,
                           const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  const double num = riemann_apply(cp, G, X, Y, Y, X);
  const double xx = X.dot(G * X), yy = Y.dot(G * Y), xy = X.dot(G * Y);
  return num / (xx * yy - xy * xy);
}

GeodesicResult geodesic(const MetricField& g, const Eigen::VectorXd& p0,
                        const Eigen::VectorXd& v0, double time, int steps) {
  if (steps < 16) throw Error("geodesic integration needs at least 16 steps");
  const int n = g.dim();
  GeodesicResult out;
  out.times.reserve(steps + 1);
  out.points.reserve(steps + 1);
  out.velocities.reserve(steps + 1);

  auto accel = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    const Christoffel gamma = christoffel(g, x);
    Eigen::VectorXd a(n);
    for (int k = 0; k < n; ++k) a(k) = -v.dot(gamma[k] * v);
    return a;
  };

  Eigen::VectorXd x = p0, v = v0;
  const double speed0 = g.norm(p0, v0);
  out.times.push_back(0.0);
  out.points.push_back(x);
  out.velocities.push_back(v);
  const double dt = time / steps;
  for (int s = 1; s <= steps; ++s) {
    try {
      const Eigen::VectorXd k1x = v, k1v = accel(x, v);
      const Eigen::VectorXd k2x = v + 0.5 * dt * k1v,
                            k2v = accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
      const Eigen::VectorXd k3x = v + 0.5 * dt * k2v,
                            k3v = accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
      const Eigen::VectorXd k4x = v + dt * k3v, k4v = accel(x + dt * k3x, v + dt * k3v);
      x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      if (!g.domain().contains(x))
        throw ChartBoundaryError("trajectory left chart", x);
      const double speed = g.norm(x, v);
      out.max_speed_drift = std::max(out.max_speed_drift, std::abs(speed / speed0 - 1.0));
    } catch (const ChartBoundaryError&) {
      throw LeftChartError("geodesic left the chart before t=" + format_double(time),
                           out.points, out.times.back());
    } catch (const DegenerateMetricError&) {
      throw LeftChartError("geodesic reached a degenerate-metric point", out.points,
                           out.times.back());
    }
    out.times.push_back(s * dt);
    out.points.push_back(x);
    out.velocities.push_back(v);
  }
  return out;
}

Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = E.col(i);
    for (int j = 0; j < i; ++j) v -= E.col(j).dot(G * v) * E.col(j);
    E.col(i) = v / std::sqrt(v.dot(G * v));
  }
  return E;
}

}  // namespace calibra
