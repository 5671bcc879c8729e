#include "calibra/variation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "quadrature_detail.hpp"

namespace calibra {

namespace {

constexpr double kFdStep = 1e-3;  // t-step of the volume oracle inside reports

struct VarGrid {
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> step;
  double cell = 1.0;
};

// Node layout shared by all variation integrals.  Eight points per axis is
// enough for the centred stencils below; quadrature accuracy is the caller's
// business through the grid counts.
VarGrid variation_grid(const ChartDomain& d, const std::vector<int>& grid, const char* op) {
  detail::require_compact_fibre(d, op);
  if (static_cast<int>(grid.size()) != d.dim())
    throw ConfigError(std::string(op) + " grid needs one count per fibre axis");
  for (int c : grid)
    if (c < 8) throw ConfigError(std::string(op) + " needs at least 8 grid points per axis");
  VarGrid g;
  g.nodes = detail::grid_nodes(d, grid);
  for (int i = 0; i < d.dim(); ++i) {
    g.step.push_back(d.width(i) / grid[i]);
    g.cell *= g.step.back();
  }
  return g;
}

// Gamma^k_lm u^l v^m.
Eigen::VectorXd gamma_contract(const Christoffel& ga, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) {
  Eigen::VectorXd out(u.size());
  for (int k = 0; k < u.size(); ++k) out(k) = u.dot(ga[k] * v);
  return out;
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return es.operatorInverseSqrt();
}

struct FdProfile {
  double first = 0.0, second = 0.0, gap = 0.0;
};

// Five-point volume profile: symmetric differences at t_step together with
// the coarser second difference at 2 t_step, whose disagreement is the
// Richardson gap reported to the caller.
FdProfile fd_profile(const FibreVariation& v, double h, std::vector<int> grid) {
  for (auto& c : grid) c = std::max(c, 32);
  const auto one = constant_field(v.submersion().total_dim(), 1.0);
  auto vol = [&](double t) {
    return fibre_integral(v.submersion(), *one, v.base_at(t), grid);
  };
  const double m2 = vol(-2.0 * h), m1 = vol(-h), v0 = vol(0.0), p1 = vol(h), p2 = vol(2.0 * h);
  FdProfile out;
  out.first = (p1 - m1) / (2.0 * h);
  out.second = (p1 - 2.0 * v0 + m1) / (h * h);
  out.gap = std::abs(out.second - (p2 - 2.0 * v0 + m2) / (4.0 * h * h));
  return out;
}

// Sum the termwise map in key order; what the report publishes as the total
// is exactly this sum, so the breakdown always reconciles.
double sum_terms(const std::map<std::string, double>& terms) {
  double s = 0.0;
  for (const auto& kv : terms) s += kv.second;
  return s;
}

}  // namespace

FibreVariation::FibreVariation(RiemannianSubmersion rs, Eigen::VectorXd b0,
                               Eigen::VectorXd direction)
    : rs_(std::move(rs)), b0_(std::move(b0)), x_(std::move(direction)) {
  if (b0_.size() != rs_.base_dim() || x_.size() != rs_.base_dim())
    throw ConfigError("base point and direction must have the base dimension");
}

Eigen::VectorXd FibreVariation::base_at(double t) const {
  if (t == 0.0) return b0_;
  const Eigen::VectorXd v = t > 0.0 ? x_ : Eigen::VectorXd(-x_);
  return geodesic(rs_.base(), b0_, v, std::abs(t), 64).points.back();
}

Eigen::VectorXd FibreVariation::variation_field(const Eigen::VectorXd& y) const {
  return horizontal_lift(rs_, rs_.fibre_point(b0_, y), x_);
}

Eigen::VectorXd FibreVariation::family_velocity(const Eigen::VectorXd& y) const {
  const int m = rs_.base_dim(), n = rs_.total_dim();
  Eigen::VectorXd z(m + y.size());
  z << b0_, y;
  Eigen::VectorXd out(n);
  for (int a = 0; a < n; ++a)
    out(a) = rs_.fibre_param_fields()[a]->jet(z).g.head(m).dot(x_);
  return out;
}

Eigen::VectorXd FibreVariation::family_acceleration(const Eigen::VectorXd& y) const {
  const int m = rs_.base_dim(), n = rs_.total_dim();
  // b''(0) from the base geodesic equation.
  const Eigen::VectorXd bdd = -gamma_contract(christoffel(rs_.base(), b0_), x_, x_);
  Eigen::VectorXd z(m + y.size());
  z << b0_, y;
  Eigen::VectorXd out(n);
  for (int a = 0; a < n; ++a) {
    const Jet j = rs_.fibre_param_fields()[a]->jet(z);
    out(a) = x_.dot(j.h.topLeftCorner(m, m) * x_) + j.g.head(m).dot(bdd);
  }
  return out;
}

double FibreVariation::parametrization_defect(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd p = rs_.fibre_point(b0_, y);
  const Eigen::VectorXd vert = split(rs_, p, family_velocity(y)).vertical;
  return std::sqrt(std::max(0.0, vert.dot(rs_.total().at(p) * vert)));
}

double first_variation(const FibreVariation& v, const std::vector<int>& grid) {
  const auto& rs = v.submersion();
  const VarGrid fg = variation_grid(rs.fibre_domain(), grid, "first_variation");
  const ImmersedSubmanifold fib = rs.fibre(v.base_point());
  std::vector<double> vals;
  detail::parallel_fill(fg.nodes.size(), vals, [&](size_t i) {
    const Eigen::VectorXd& y = fg.nodes[i];
    const SubmanifoldGeometry geo = fib.geometry(y);
    const Eigen::VectorXd p = fib.point(y);
    const Eigen::MatrixXd G = rs.total().at(p);
    const Eigen::VectorXd Z = horizontal_lift(rs, p, v.direction());
    return -geo.mean_curvature.dot(G * Z) * std::sqrt(geo.induced.determinant()) * fg.cell;
  });
  return detail::pairwise_sum(vals);
}

VariationReport second_variation_riemannian(const FibreVariation& v,
                                            const std::vector<int>& grid) {
  const auto& rs = v.submersion();
  const int k = rs.fibre_dim();
  const ChartDomain& fd = rs.fibre_domain();
  const VarGrid fg = variation_grid(fd, grid, "second_variation_riemannian");
  const ImmersedSubmanifold fib = rs.fibre(v.base_point());

  auto lift_at = [&](const Eigen::VectorXd& y) {
    return horizontal_lift(rs, fib.point(y), v.direction());
  };
  // Covariant acceleration of the family curve t -> iota_t(y), exact apart
  // from the Christoffel evaluation.
  auto accel = [&](const Eigen::VectorXd& y, const Christoffel& ga) {
    const Eigen::VectorXd c1 = v.family_velocity(y);
    return Eigen::VectorXd(v.family_acceleration(y) + gamma_contract(ga, c1, c1));
  };
  // sqrt(det h) times the tangential coordinates of the family acceleration:
  // the flux whose coordinate divergence the third term integrates.
  auto flux = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd p = fib.point(y);
    const Eigen::MatrixXd J = fib.differential(y);
    const Eigen::MatrixXd G = rs.total().at(p);
    const Eigen::MatrixXd h = J.transpose() * G * J;
    const Eigen::VectorXd w =
        h.ldlt().solve(J.transpose() * (G * accel(y, christoffel(rs.total(), p))));
    return Eigen::VectorXd(std::sqrt(h.determinant()) * w);
  };

  const size_t nn = fg.nodes.size();
  std::vector<double> t_ii(nn), t_curv(nn), t_div(nn), t_haccel(nn), t_dz(nn), t_hz(nn);
  detail::parallel_for(nn, [&](size_t idx) {
    const Eigen::VectorXd& y = fg.nodes[idx];
    const Eigen::VectorXd p = fib.point(y);
    const Eigen::MatrixXd J = fib.differential(y);
    const SubmanifoldGeometry geo = fib.geometry(y);
    const Eigen::MatrixXd G = rs.total().at(p);
    const CurvaturePack cp = curvature(rs.total(), p);
    const Eigen::MatrixXd h = geo.induced;
    const auto hldlt = h.ldlt();
    const Eigen::MatrixXd S = inverse_sqrt(h);
    const Eigen::VectorXd Z = lift_at(y);
    const Eigen::VectorXd GZ = G * Z;
    const double weight = std::sqrt(h.determinant()) * fg.cell;

    // -(II(e_a, e_b) . Z)^2 over the orthonormalized frame e = J S.
    Eigen::MatrixXd pairing(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) pairing(i, j) = GZ.dot(geo.second[i][j]);
    t_ii[idx] = -(S.transpose() * pairing * S).squaredNorm() * weight;

    const Eigen::MatrixXd E = J * S;
    double curv = 0.0;
    for (int a = 0; a < k; ++a)
      curv -= riemann_apply(cp, G, E.col(a), Z, Z, E.col(a));
    t_curv[idx] = curv * weight;

    const double hz = geo.mean_curvature.dot(GZ);
    t_hz[idx] = hz * hz * weight;

    const Eigen::VectorXd A = accel(y, cp.gamma);
    const Eigen::VectorXd wtan = hldlt.solve(J.transpose() * (G * A));
    const Eigen::VectorXd Aperp = A - J * wtan;
    t_haccel[idx] = -geo.mean_curvature.dot(G * Aperp) * weight;

    double div = 0.0;
    for (int i = 0; i < k; ++i) {
      const double d = 1e-4 * fd.width(i);
      Eigen::VectorXd yp = y, ym = y;
      yp(i) += d;
      ym(i) -= d;
      div += (flux(fd.wrap(yp))(i) - flux(fd.wrap(ym))(i)) / (2.0 * d);
    }
    t_div[idx] = div / std::sqrt(h.determinant()) * weight;

    // nabla_{J_i} Z by centred differences of the lift along the fibre plus
    // the Christoffel correction, then rotated into the orthonormal frame.
    Eigen::MatrixXd D(rs.total_dim(), k);
    for (int i = 0; i < k; ++i) {
      const double d = 1e-5 * fd.width(i);
      Eigen::VectorXd yp = y, ym = y;
      yp(i) += d;
      ym(i) -= d;
      D.col(i) = (lift_at(fd.wrap(yp)) - lift_at(fd.wrap(ym))) / (2.0 * d) +
                 gamma_contract(cp.gamma, J.col(i), Z);
    }
    const Eigen::MatrixXd DE = D * S;
    const Eigen::MatrixXd N = DE - J * hldlt.solve(J.transpose() * (G * DE));
    t_dz[idx] = (N.transpose() * G * N).trace() * weight;
  });

  VariationReport rep;
  rep.terms["ii_sq"] = detail::pairwise_sum(t_ii);
  rep.terms["curvature"] = detail::pairwise_sum(t_curv);
  rep.terms["div_tan"] = detail::pairwise_sum(t_div);
  rep.terms["h_accel"] = detail::pairwise_sum(t_haccel);
  rep.terms["dz_perp_sq"] = detail::pairwise_sum(t_dz);
  rep.terms["h_z_sq"] = detail::pairwise_sum(t_hz);
  rep.second_analytic = sum_terms(rep.terms);
  rep.first = first_variation(v, grid);
  const FdProfile fp = fd_profile(v, kFdStep, grid);
  rep.second_fd = fp.second;
  rep.fd_richardson_gap = fp.gap;
  return rep;
}

VariationReport second_variation_kahler(const FibreVariation& v, const KahlerStructure& kk,
                                        const std::vector<int>& grid) {
  const auto& rs = v.submersion();
  if (kk.dim() != rs.total_dim())
    throw ConfigError("Kahler structure dimension does not match the total space");
  const ChartDomain& fd = rs.fibre_domain();
  const VarGrid fg = variation_grid(fd, grid, "second_variation_kahler");
  const ImmersedSubmanifold fib = rs.fibre(v.base_point());

  {
    const Eigen::VectorXd p0 = fib.point(fg.nodes.front());
    const Eigen::MatrixXd gk = kk.metric().at(p0), gt = rs.total().at(p0);
    if ((gk - gt).norm() > 1e-10 * (1.0 + gt.norm()))
      throw HypothesisViolatedError("Kahler metric differs from the total-space metric");
  }

  // Hypotheses: omega restricted to the fibre tangent, and the mean
  // curvature, must both vanish.
  double omega_res = 0.0, worst_h = 0.0;
  for (const auto& y : fg.nodes) {
    const Eigen::VectorXd p = fib.point(y);
    const Eigen::MatrixXd J = fib.differential(y);
    const AlternatingForm omega = kk.kahler_form_at(p);
    for (int i = 0; i < J.cols(); ++i)
      for (int j = i + 1; j < J.cols(); ++j) {
        Eigen::MatrixXd V(J.rows(), 2);
        V.col(0) = J.col(i);
        V.col(1) = J.col(j);
        omega_res = std::max(omega_res, std::abs(omega(V)));
      }
    const SubmanifoldGeometry geo = fib.geometry(y);
    const Eigen::MatrixXd G = rs.total().at(p);
    worst_h = std::max(
        worst_h, std::sqrt(std::max(0.0, geo.mean_curvature.dot(G * geo.mean_curvature))));
  }
  if (omega_res >= 1e-8)
    throw HypothesisViolatedError("fibre is not Lagrangian: omega residual " +
                                  std::to_string(omega_res));
  if (worst_h > 1e-7)
    throw HypothesisViolatedError("fibre is not minimal: |H| reaches " +
                                  std::to_string(worst_h));
  if (rs.fibre_dim() != 1)
    throw ConfigError("the Hodge term is implemented for circle fibres only");

  // zeta = omega(Z, .) restricted to the fibre, as a function of the single
  // fibre coordinate; the Hodge Laplacian of a 1-form on a circle reduces to
  // d of the codifferential, both taken by centred differences on the grid.
  const int N = grid[0];
  const double dl = fg.step[0];
  std::vector<double> zeta(N), hval(N), sq(N), ricci_vals(N);
  for (int j = 0; j < N; ++j) {
    const Eigen::VectorXd& y = fg.nodes[j];
    const Eigen::VectorXd p = fib.point(y);
    const Eigen::MatrixXd J = fib.differential(y);
    const Eigen::MatrixXd G = rs.total().at(p);
    const Eigen::VectorXd Z = horizontal_lift(rs, p, v.direction());
    Eigen::MatrixXd V(J.rows(), 2);
    V.col(0) = Z;
    V.col(1) = J.col(0);
    zeta[j] = kk.kahler_form_at(p)(V);
    hval[j] = (J.transpose() * G * J)(0, 0);
    sq[j] = std::sqrt(hval[j]);
    const CurvaturePack cp = curvature(rs.total(), p);
    ricci_vals[j] = -Z.dot(cp.ricci * Z) * sq[j] * dl;
  }
  std::vector<double> codiff(N), hodge_vals(N);
  auto at = [&](const std::vector<double>& a, int j) { return a[((j % N) + N) % N]; };
  for (int j = 0; j < N; ++j)
    codiff[j] = -(at(zeta, j + 1) / at(sq, j + 1) - at(zeta, j - 1) / at(sq, j - 1)) /
                (2.0 * dl) / sq[j];
  for (int j = 0; j < N; ++j) {
    const double lap = (at(codiff, j + 1) - at(codiff, j - 1)) / (2.0 * dl);
    hodge_vals[j] = lap * zeta[j] / hval[j] * sq[j] * dl;
  }

  VariationReport rep;
  rep.terms["hodge"] = detail::pairwise_sum(hodge_vals);
  rep.terms["ricci"] = detail::pairwise_sum(ricci_vals);
  rep.second_analytic = sum_terms(rep.terms);
  rep.first = first_variation(v, grid);
  const FdProfile fp = fd_profile(v, kFdStep, grid);
  rep.second_fd = fp.second;
  rep.fd_richardson_gap = fp.gap;
  return rep;
}

VariationReport second_variation_g2(const FibreVariation& v, const G2Structure& g2,
                                    const AlternatingForm& tau2,
                                    const std::vector<int>& grid) {
  const auto& rs = v.submersion();
  if (rs.total_dim() != 7 || rs.fibre_dim() != 4)
    throw ConfigError(
        "the coassociative second variation needs a 7-dimensional total space "
        "with 4-dimensional fibres");
  if (tau2.dim() != 7 || tau2.degree() != 2)
    throw ConfigError("tau2 must be a 2-form on the 7-dimensional chart");
  const ChartDomain& fd = rs.fibre_domain();
  const VarGrid fg = variation_grid(fd, grid, "second_variation_g2");
  const ImmersedSubmanifold fib = rs.fibre(v.base_point());

  {
    const Eigen::VectorXd p0 = fib.point(fg.nodes.front());
    const Eigen::MatrixXd G0 = rs.total().at(p0);
    if ((G0 - Eigen::MatrixXd::Identity(7, 7)).norm() > 1e-10)
      throw HypothesisViolatedError("the G2 checks run on the flat model metric only");
  }

  auto lift_at = [&](const Eigen::VectorXd& y) {
    return horizontal_lift(rs, fib.point(y), v.direction());
  };
  // Pullback to fibre coordinates of i_Z tau2 wedge i_Z phi, the 3-form whose
  // exterior derivative is the exact term.
  auto exact_term = [&](const Eigen::VectorXd& y) {
    const Eigen::MatrixXd J = fib.differential(y);
    const Eigen::VectorXd Z = lift_at(y);
    const AlternatingForm amb = tau2.interior(Z).wedge(g2.phi.interior(Z));
    AlternatingForm out(4, 3);
    for (int r = 0; r < out.table_size(); ++r) {
      const auto& t = out.tuple(r);
      Eigen::MatrixXd V(7, 3);
      for (int c = 0; c < 3; ++c) V.col(c) = J.col(t[c]);
      out[r] = amb(V);
    }
    return out;
  };

  double min_width = fd.width(0);
  for (int i = 1; i < 4; ++i) min_width = std::min(min_width, fd.width(i));
  const double dstep = 1e-3 * min_width;

  const size_t nn = fg.nodes.size();
  std::vector<double> gamma_vals(nn), ricci_vals(nn), stokes_vals(nn), coassoc(nn);
  detail::parallel_for(nn, [&](size_t idx) {
    const Eigen::VectorXd& y = fg.nodes[idx];
    const Eigen::VectorXd p = fib.point(y);
    const Eigen::MatrixXd J = fib.differential(y);
    const Eigen::MatrixXd G = rs.total().at(p);
    const Eigen::MatrixXd h = J.transpose() * G * J;
    const auto hldlt = h.ldlt();
    const Eigen::MatrixXd S = inverse_sqrt(h);
    coassoc[idx] = coassociative_residual(Plane{p, J * S}, g2);

    const Eigen::VectorXd Z = lift_at(y);
    const CurvaturePack cp = curvature(rs.total(), p);

    Eigen::MatrixXd D(7, 4);
    for (int i = 0; i < 4; ++i) {
      const double d = 1e-5 * fd.width(i);
      Eigen::VectorXd yp = y, ym = y;
      yp(i) += d;
      ym(i) -= d;
      D.col(i) = (lift_at(fd.wrap(yp)) - lift_at(fd.wrap(ym))) / (2.0 * d) +
                 gamma_contract(cp.gamma, J.col(i), Z);
    }
    const Eigen::MatrixXd Dtan = J * hldlt.solve(J.transpose() * (G * D));

    // gamma_Z(X_i, X_j) = i_Z phi((nabla_i Z)^T, X_j) + i_Z phi(X_i, (nabla_j Z)^T)
    const AlternatingForm izphi = g2.phi.interior(Z);
    AlternatingForm gammaS(4, 2), tauS(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        Eigen::MatrixXd V(7, 2);
        V.col(0) = Dtan.col(i);
        V.col(1) = J.col(j);
        double val = izphi(V);
        V.col(0) = J.col(i);
        V.col(1) = Dtan.col(j);
        val += izphi(V);
        gammaS.set_component({i, j}, val);
        V.col(0) = J.col(i);
        V.col(1) = J.col(j);
        tauS.set_component({i, j}, tau2(V));
      }
    // Forms integrate against the parameter orientation dy1..dy4, without
    // the metric volume factor.
    gamma_vals[idx] = tauS.wedge(gammaS)[0] * fg.cell;
    ricci_vals[idx] = -Z.dot(cp.ricci * Z) * std::sqrt(h.determinant()) * fg.cell;
    stokes_vals[idx] = exterior_derivative_fd(exact_term, y, dstep)[0] * fg.cell;
  });

  double worst_coassoc = 0.0;
  for (double c : coassoc) worst_coassoc = std::max(worst_coassoc, c);
  if (worst_coassoc > 1e-8)
    throw HypothesisViolatedError("fibre is not coassociative: phi residual " +
                                  std::to_string(worst_coassoc));

  VariationReport rep;
  rep.terms["torsion_gamma"] = detail::pairwise_sum(gamma_vals);
  rep.terms["ricci"] = detail::pairwise_sum(ricci_vals);
  rep.second_analytic = sum_terms(rep.terms);
  rep.stokes_residual = std::abs(detail::pairwise_sum(stokes_vals));
  if (rep.stokes_residual >= 1e-8)
    throw HypothesisViolatedError("exact term failed to integrate to zero: " +
                                  std::to_string(rep.stokes_residual));
  rep.first = first_variation(v, grid);
  const FdProfile fp = fd_profile(v, kFdStep, grid);
  rep.second_fd = fp.second;
  rep.fd_richardson_gap = fp.gap;
  return rep;
}

VariationReport second_variation_g2(const FibreVariation& v, const G2Structure& g2,
                                    const std::vector<int>& grid) {
  return second_variation_g2(v, g2, AlternatingForm(7, 2), grid);
}

std::pair<double, double> volume_profile_fd(const FibreVariation& v, double t_step,
                                            const std::vector<int>& grid) {
  if (t_step <= 0.0) throw ConfigError("volume_profile_fd needs a positive t_step");
  std::vector<int> vg = grid;
  for (auto& c : vg) c = std::max(c, 32);
  const auto one = constant_field(v.submersion().total_dim(), 1.0);
  auto vol = [&](double t) {
    return fibre_integral(v.submersion(), *one, v.base_at(t), vg);
  };
  const double m1 = vol(-t_step), v0 = vol(0.0), p1 = vol(t_step);
  return {(p1 - m1) / (2.0 * t_step), (p1 - 2.0 * v0 + m1) / (t_step * t_step)};
}

}  // namespace calibra
