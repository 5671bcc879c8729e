#include <algorithm>
#include <cmath>
#include <limits>

#include "calibra/defect.hpp"
#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "calibra/kahler.hpp"
#include "calibra/sampling.hpp"
#include "calibra/scenario.hpp"
#include "calibra/variation.hpp"
#include "check_util.hpp"

namespace calibra {

using namespace detail;

namespace {

const RiemannianSubmersion& need_submersion(const CheckContext& c, const char* check) {
  if (!c.scenario.submersion)
    throw ConfigError(std::string(check) + " needs a submersion scenario");
  return *c.scenario.submersion;
}

const KahlerStructure& need_kahler(const CheckContext& c, const char* check) {
  if (!c.scenario.kahler)
    throw ConfigError(std::string(check) + " needs a Kahler scenario");
  return *c.scenario.kahler;
}

Eigen::VectorXd base_direction(const CheckContext& c, int m) {
  if (c.scenario.probe_direction.size() == m && c.scenario.probe_direction.norm() > 0.0)
    return c.scenario.probe_direction;
  return axis_vector(m, 0);
}

}  // namespace

double ricci_two_form(const KahlerStructure& k, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  const CurvaturePack cp = curvature(k.metric(), p);
  const Eigen::MatrixXd J = k.complex_structure(p);
  return (J * X).dot(cp.ricci * Y);
}

void hessian_transfer_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_submersion(c, "hessian_transfer");
  const int m = rs.base_dim();
  const int nb = c.grid.empty() ? 20 : c.grid[0];
  const int nf = c.grid.size() >= 2 ? c.grid[1] : 32;

  // the transfer statement lives on Riemannian submersions, so the structure
  // itself is the hypothesis
  double iso = 0.0;
  for (const auto& y : fibre_lattice(rs, 3))
    iso = std::max(iso,
                   rs.isometry_defect(rs.fibre_point(c.scenario.probe_base, y)));
  if (iso > kHypTol) {
    out.push_back(hypothesis_record("hessian_transfer", "P2.2", iso, c.tol,
                                    "projection is not a Riemannian submersion"));
    return;
  }

  std::vector<std::string> probes = {"x1^2", "sin(x1)"};
  if (m >= 2) probes.push_back("x1*x2 + cos(x2)");
  const Eigen::VectorXd X = base_direction(c, m);

  double worst = 0.0;
  Eigen::VectorXd worst_b = c.scenario.probe_base;
  std::string worst_field = probes.front();
  std::vector<Eigen::VectorXd> bs;
  if (m == 1) {
    for (double t : axis_sweep(rs.base().domain(), 0, nb))
      bs.push_back(Eigen::VectorXd::Constant(1, t));
  } else {
    bs = box_samples(rs.base().domain(), nb, c.stream);
  }
  for (const auto& expr : probes) {
    const auto F = make_field(expr, m);
    for (const auto& b : bs) {
      const double r = hessian_transfer_residual(rs, *F, b, X, nf);
      if (r > worst) {
        worst = r;
        worst_b = b;
        worst_field = expr;
      }
    }
  }

  CheckRecord rec = make_record("hessian_transfer", "P2.2", worst, c.tol);
  rec.witness["base_points"] = nb;
  rec.witness["fibre_points"] = nf;
  rec.witness["worst_base"] = std::vector<double>(worst_b.begin(), worst_b.end());
  rec.witness["worst_field"] = worst_field;
  out.push_back(std::move(rec));
}

void radius_hessian_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_submersion(c, "radius_hessian");
  if (rs.total_dim() != 2 || rs.base_dim() != 1)
    throw ConfigError("radius_hessian expects a surface over an interval");
  const auto f = make_field("x1", 2);
  const auto F = make_field("x1", 1);

  double worst = 0.0, min_vert = std::numeric_limits<double>::infinity();
  double at_r1 = 0.0, base_max = 0.0;
  std::vector<double> sweep = axis_sweep(rs.total().domain(), 0, 20, 0.02);
  sweep.push_back(1.0);
  for (double r : sweep) {
    Eigen::VectorXd p(2);
    p << r, 0.7;
    const Eigen::MatrixXd G = rs.total().at(p);
    Eigen::VectorXd V(2);
    V << 0.0, 1.0 / std::sqrt(G(1, 1));
    const double hv = V.dot(hessian(rs.total(), *f, p) * V);
    const double hb = hessian(rs.base(), *F, Eigen::VectorXd::Constant(1, r))(0, 0);
    min_vert = std::min(min_vert, hv);
    base_max = std::max(base_max, std::abs(hb));
    worst = std::max(worst, std::max(std::abs(hb), -hv));
    if (r == 1.0) at_r1 = hv;
  }

  CheckRecord rec = make_record("radius_hessian", "S3", worst, c.tol);
  rec.witness["vertical_hessian_at_r1"] = at_r1;
  rec.witness["min_vertical_hessian"] = min_vert;
  rec.witness["base_hessian_max"] = base_max;
  out.push_back(std::move(rec));
}

void hadamard_check(const CheckContext& c, bool supremum, std::vector<CheckRecord>& out) {
  const std::string name = supremum ? "hadamard_sup" : "hadamard_integral";
  const auto& rs = need_submersion(c, name.c_str());
  if (rs.base_dim() != 1)
    throw ConfigError(name + " expects a one-dimensional base");
  const auto f = total_field(c);
  const int n = c.grid.empty() ? 64 : c.grid[0];

  // subharmonicity of f is the standing hypothesis; in two real dimensions it
  // can be tested against the scenario metric directly since the sign of the
  // Laplacian is conformally invariant
  double min_lap = std::numeric_limits<double>::infinity();
  for (const auto& p : box_samples(rs.total().domain(), 240, c.stream, 0.02))
    min_lap = std::min(min_lap, laplacian(rs.total(), *f, p));
  if (min_lap < -kHypTol) {
    out.push_back(hypothesis_record(name, "S1", -min_lap, c.tol,
                                    "test function is not subharmonic"));
    return;
  }

  const Pushdown F = supremum
                         ? Pushdown::supremum(rs, f, {n})
                         : Pushdown::integral(rs, f, {std::max(n, 32)});
  const ConvexityReport rep = base_convexity_check(
      [&F](const Eigen::VectorXd& b) { return F(b); }, rs.base().domain(), {n},
      ConvexityMode::midpoint, c.tol);

  CheckRecord rec = make_record(name, "S1", std::max(0.0, -rep.worst), c.tol);
  rec.witness["worst_margin"] = rep.worst;
  rec.witness["worst_t"] = rep.witness.size() ? rep.witness(0) : 0.0;
  rec.witness["min_laplacian"] = min_lap;
  out.push_back(std::move(rec));
}

void psh_defect_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& k = need_kahler(c, "psh_defect");
  const auto f = total_field(c);
  const int samples = c.grid.empty() ? 200 : c.grid[0];

  double psh_res = 0.0, not_convex_res = 0.0;
  double levi0 = 0.0, lap0 = 0.0, plane0 = 0.0;
  const auto pts = box_samples(k.metric().domain(), 6, c.stream, 0.25);
  for (size_t i = 0; i < pts.size(); ++i) {
    const DefectResult dr = kahler_psh_defect(k, *f, pts[i], samples);
    const double plane_d = p_plane_psh_defect(k.metric(), *f, pts[i], 1);
    psh_res = std::max(psh_res, -dr.defect);
    not_convex_res = std::max(not_convex_res, plane_d);
    if (i == 0) {
      levi0 = dr.defect;
      lap0 = laplacian(k.metric(), *f, pts[0]);
      plane0 = plane_d;
    }
  }

  CheckRecord psh = make_record("psh_defect:kahler", "E3", std::max(0.0, psh_res), c.tol);
  psh.witness["levi_min"] = levi0;
  psh.witness["laplacian"] = lap0;
  out.push_back(std::move(psh));

  // the scenario's claim is that f fails convexity; a nonnegative 1-plane
  // defect would mean the counterexample evaporated
  CheckRecord nc =
      make_record("psh_defect:not_convex", "S4", std::max(0.0, not_convex_res), c.tol);
  nc.witness["plane_defect_1"] = plane0;
  out.push_back(std::move(nc));
}

void first_variation_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_submersion(c, "first_variation");
  const FibreVariation v(rs, c.scenario.probe_base, base_direction(c, rs.base_dim()));
  const auto grid = variation_grid(c, rs.fibre_dim());
  const double analytic = first_variation(v, grid);
  const auto [fd1, fd2] = volume_profile_fd(v, 1e-3, grid);

  CheckRecord rec =
      make_record("first_variation", "E4", std::abs(analytic - fd1), c.tol);
  rec.witness["analytic"] = analytic;
  rec.witness["fd"] = fd1;
  rec.witness["fd_second"] = fd2;
  out.push_back(std::move(rec));
}

namespace {

CheckRecord variation_record(const std::string& name, const std::string& tag,
                             const VariationReport& rep, double tol) {
  const double rel =
      std::abs(rep.second_analytic - rep.second_fd) / std::max(1.0, std::abs(rep.second_analytic));
  CheckRecord rec = make_record(name, tag, rel, tol);
  rec.witness["second_analytic"] = rep.second_analytic;
  rec.witness["second_fd"] = rep.second_fd;
  rec.witness["fd_richardson_gap"] = rep.fd_richardson_gap;
  nlohmann::ordered_json terms;
  for (const auto& [key, val] : rep.terms) terms[key] = val;
  rec.witness["terms"] = std::move(terms);
  rec.witness["stokes_residual"] = rep.stokes_residual;
  return rec;
}

}  // namespace

void variation_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_submersion(c, "second_variation");
  const Eigen::VectorXd b = c.scenario.probe_base;
  const FibreVariation v(rs, b, base_direction(c, rs.base_dim()));
  const auto grid = variation_grid(c, rs.fibre_dim());

  out.push_back(
      variation_record("second_variation:riemannian", "E5",
                       second_variation_riemannian(v, grid), c.tol));

  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 8 : 3);
  double h_norm = 0.0, ii_norm = 0.0;
  for (const auto& y : ys) {
    const auto geo = fibre_geometry(rs, b, y);
    h_norm = std::max(h_norm, geo.h_norm);
    ii_norm = std::max(ii_norm, geo.ii_norm);
  }

  if (c.scenario.kahler) {
    // Oh's formula wants a minimal Lagrangian fibre
    const auto& k = *c.scenario.kahler;
    double omega_res = 0.0;
    for (const auto& y : ys) {
      const Eigen::VectorXd p = rs.fibre_point(b, y);
      const Eigen::MatrixXd fr = fibre_frame(rs, b, y);
      const AlternatingForm w = k.kahler_form_at(p);
      for (int i = 0; i < fr.cols(); ++i)
        for (int j = i + 1; j < fr.cols(); ++j) {
          Eigen::MatrixXd pair(fr.rows(), 2);
          pair.col(0) = fr.col(i);
          pair.col(1) = fr.col(j);
          omega_res = std::max(omega_res, std::abs(w(pair)));
        }
    }
    const bool lagrangian =
        rs.fibre_dim() == k.complex_dim() && omega_res <= kHypTol;
    if (h_norm <= 1e-6 && lagrangian)
      out.push_back(variation_record("second_variation:kahler", "E6",
                                     second_variation_kahler(v, k, grid), c.tol));
    else
      out.push_back(vacuous_record("second_variation:kahler", "E6", c.tol,
                                   lagrangian ? "fibre is not minimal"
                                              : "fibre is not Lagrangian"));
  }

  if (c.scenario.g2) {
    double coassoc = 0.0;
    for (const auto& y : ys)
      coassoc = std::max(
          coassoc, coassociative_residual(Plane{rs.fibre_point(b, y), fibre_frame(rs, b, y)},
                                          *c.scenario.g2));
    if (coassoc <= kHypTol && ii_norm <= 1e-6)
      out.push_back(variation_record("second_variation:g2", "E7",
                                     second_variation_g2(v, *c.scenario.g2, grid), c.tol));
    else
      out.push_back(vacuous_record("second_variation:g2", "E7", c.tol,
                                   coassoc <= kHypTol
                                       ? "fibre is not totally geodesic"
                                       : "fibre is not coassociative"));
  }
}

void ricci_two_form_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& k = need_kahler(c, "ricci_two_form");
  const auto pts = box_samples(k.metric().domain(), 5, c.stream, 0.15);
  const int n = k.dim();

  double antisym = 0.0, j_inv = 0.0, flat_res = 0.0;
  long idx = c.stream;
  for (const auto& p : pts) {
    const Eigen::MatrixXd J = k.complex_structure(p);
    for (int s = 0; s < 4; ++s) {
      const Eigen::VectorXd X = halton_unit_vector(n, ++idx);
      const Eigen::VectorXd Y = halton_unit_vector(n, ++idx);
      const double rxy = ricci_two_form(k, p, X, Y);
      antisym = std::max(antisym, std::abs(rxy + ricci_two_form(k, p, Y, X)));
      j_inv = std::max(j_inv, std::abs(ricci_two_form(k, p, J * X, J * Y) - rxy));
      flat_res = std::max(flat_res, std::abs(rxy));
    }
  }

  CheckRecord a = make_record("ricci_two_form:antisymmetry", "S9", antisym, c.tol);
  a.witness["samples"] = static_cast<int>(pts.size()) * 4;
  out.push_back(std::move(a));
  out.push_back(make_record("ricci_two_form:j_invariance", "S9", j_inv, c.tol));

  // zero curvature is only a statement on the flat models
  double curv = 0.0;
  for (const auto& p : pts) curv = std::max(curv, curvature(k.metric(), p).ricci.cwiseAbs().maxCoeff());
  if (curv <= kHypTol)
    out.push_back(make_record("ricci_two_form:flat_zero", "S9", flat_res, c.tol));
}

void lagrangian_determinant_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_submersion(c, "lagrangian_determinant");
  const auto& k = need_kahler(c, "lagrangian_determinant");
  const int fd = rs.fibre_dim();
  if (fd != k.complex_dim())
    throw ConfigError("lagrangian_determinant expects half-dimensional torus orbits");

  const auto ys = fibre_lattice(rs, fd == 1 ? 12 : 5);
  const auto qgrid = quad_grid(c, fd);
  const auto one = make_field("1", rs.total_dim());

  // h_{jk} = 2 g(v_j, v_k) - 2 i omega(v_j, v_k) over the action generators
  // d(fibre_param)/dy_j; the Lagrangian condition kills the imaginary part
  const auto orbit_data = [&](const Eigen::VectorXd& b, double& herm, double& metric_res,
                              double& omega_res) -> double {
    double det_h = 0.0;
    for (const auto& y : ys) {
      const Eigen::VectorXd p = rs.fibre_point(b, y);
      const Eigen::MatrixXd d = rs.fibre(b).differential(y);
      const Eigen::MatrixXd G = rs.total().at(p);
      const AlternatingForm w = k.kahler_form_at(p);
      Eigen::MatrixXd gjk(fd, fd), wjk(fd, fd);
      for (int i = 0; i < fd; ++i)
        for (int j = 0; j < fd; ++j) {
          gjk(i, j) = d.col(i).dot(G * d.col(j));
          Eigen::MatrixXd pair(d.rows(), 2);
          pair.col(0) = d.col(i);
          pair.col(1) = d.col(j);
          wjk(i, j) = w(pair);
        }
      // h - 2g is purely imaginary, so its largest entry is 2 max |omega|
      omega_res = std::max(omega_res, wjk.cwiseAbs().maxCoeff());
      metric_res = std::max(metric_res, 2.0 * wjk.cwiseAbs().maxCoeff());
      herm = std::max(herm, (gjk - gjk.transpose()).cwiseAbs().maxCoeff());
      det_h += (2.0 * gjk).determinant();
    }
    return det_h / static_cast<double>(ys.size());
  };

  double herm = 0.0, metric_res = 0.0, omega_res = 0.0;
  const double det0 = orbit_data(c.scenario.probe_base, herm, metric_res, omega_res);
  if (omega_res > kHypTol) {
    out.push_back(hypothesis_record("lagrangian_determinant", "S9", omega_res, c.tol,
                                    "orbit is not Lagrangian"));
    return;
  }

  const double vol0 = fibre_integral(rs, *one, c.scenario.probe_base, qgrid);
  const double cal = vol0 / std::sqrt(det0);

  double vol_res = 0.0;
  for (const auto& b : box_samples(rs.base().domain(), 4, c.stream, 0.12)) {
    double h2 = 0.0, m2 = 0.0, w2 = 0.0;
    const double det_b = orbit_data(b, h2, m2, w2);
    herm = std::max(herm, h2);
    metric_res = std::max(metric_res, m2);
    const double vol_b = fibre_integral(rs, *one, b, qgrid);
    vol_res = std::max(vol_res, std::abs(vol_b - cal * std::sqrt(det_b)));
  }

  CheckRecord met = make_record("lagrangian_determinant:metric", "S9", metric_res, c.tol);
  met.witness["omega_residual"] = omega_res;
  out.push_back(std::move(met));
  out.push_back(make_record("lagrangian_determinant:hermitian", "S9", herm, c.tol));
  CheckRecord vol = make_record("lagrangian_determinant:volume", "S9", vol_res, c.tol);
  vol.witness["calibration_constant"] = cal;
  vol.witness["volume_at_probe"] = vol0;
  out.push_back(std::move(vol));
}

void square_distance_check(const CheckContext& c, std::vector<CheckRecord>& out) {
  // the three catalog submanifolds with closed-form distance in flat space
  struct Case {
    const char* name;
    int dim;
    const char* r2;
  };
  const Case cases[] = {
      {"square_distance:point", 2, "x^2 + y^2"},
      {"square_distance:line", 3, "x1^2 + x2^2"},
      {"square_distance:circle", 2, "(sqrt(x^2 + y^2) - 1)^2"},
  };

  for (const auto& cs : cases) {
    const auto g = MetricField::euclidean(cs.dim, ChartDomain::cube(cs.dim, 4.0));
    const auto f = make_field(cs.r2, cs.dim);
    double worst = 0.0;
    CheckRecord rec;

    if (std::string(cs.name) == "square_distance:point") {
      // Hess(r^2) = 2 I everywhere, not just on Sigma
      for (const auto& p : box_samples(g.domain(), 8, c.stream, 0.1)) {
        const Eigen::MatrixXd H = hessian(g, *f, p);
        worst = std::max(worst,
                         (H - 2.0 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff());
      }
      rec = make_record(cs.name, "S4", worst, c.tol);
    } else if (std::string(cs.name) == "square_distance:line") {
      Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(3, 3);
      oracle(0, 0) = oracle(1, 1) = 2.0;
      Eigen::VectorXd eigs;
      for (double z : {-1.5, -0.25, 0.0, 0.8, 2.1}) {
        Eigen::VectorXd p(3);
        p << 0.0, 0.0, z;
        const Eigen::MatrixXd H = hessian(g, *f, p);
        worst = std::max(worst, (H - oracle).cwiseAbs().maxCoeff());
        eigs = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues();
      }
      rec = make_record(cs.name, "S4", worst, c.tol);
      rec.witness["eigenvalues_on_sigma"] =
          std::vector<double>(eigs.begin(), eigs.end());
    } else {
      double tangential_on = 0.0;
      for (double t : {0.0, 0.9, 2.2, 4.1}) {
        Eigen::VectorXd p(2);
        p << std::cos(t), std::sin(t);
        const Eigen::MatrixXd H = hessian(g, *f, p);
        Eigen::VectorXd tan(2), nor(2);
        tan << -std::sin(t), std::cos(t);
        nor << std::cos(t), std::sin(t);
        tangential_on = std::max(tangential_on, std::abs(tan.dot(H * tan)));
        worst = std::max(worst, std::abs(nor.dot(H * nor) - 2.0));
        worst = std::max(worst, std::abs(tan.dot(H * tan)));
      }
      rec = make_record(cs.name, "S4", worst, c.tol);
      // off Sigma the tangential eigenvalue goes negative; reported only
      Eigen::VectorXd q(2);
      q << 0.9, 0.0;
      const Eigen::MatrixXd Hq = hessian(g, *f, q);
      rec.witness["tangential_on_sigma"] = tangential_on;
      rec.witness["tangential_at_rho_0.9"] = axis_vector(2, 1).dot(Hq * axis_vector(2, 1));
    }
    out.push_back(std::move(rec));
  }
}

}  // namespace calibra
