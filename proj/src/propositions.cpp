#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "calibra/defect.hpp"
#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "calibra/sampling.hpp"
#include "calibra/scenario.hpp"
#include "calibra/variation.hpp"
#include "check_util.hpp"

namespace calibra {

using namespace detail;

namespace {

const RiemannianSubmersion& need_rs(const CheckContext& c, const std::string& prop) {
  if (!c.scenario.submersion)
    throw ConfigError(prop + " needs a submersion scenario");
  return *c.scenario.submersion;
}

const KahlerStructure& need_k(const CheckContext& c, const std::string& prop) {
  if (!c.scenario.kahler) throw ConfigError(prop + " needs a Kahler scenario");
  return *c.scenario.kahler;
}

const G2Structure& need_g2(const CheckContext& c, const std::string& prop) {
  if (!c.scenario.g2) throw ConfigError(prop + " needs a G2 scenario");
  return *c.scenario.g2;
}

Eigen::VectorXd unit_base_direction(const CheckContext& c,
                                    const RiemannianSubmersion& rs,
                                    const Eigen::VectorXd& b) {
  Eigen::VectorXd X = c.scenario.probe_direction;
  if (X.size() != rs.base_dim() || X.norm() == 0.0)
    X = axis_vector(rs.base_dim(), 0);
  const Eigen::MatrixXd GB = rs.base().at(b);
  return X / std::sqrt(X.dot(GB * X));
}

Fn invariant_fn(const RiemannianSubmersion& rs, ScalarFieldPtr f) {
  std::vector<int> check(rs.fibre_dim(), rs.fibre_dim() == 1 ? 8 : 4);
  auto P = std::make_shared<Pushdown>(Pushdown::invariant(rs, std::move(f), check));
  return [P](const Eigen::VectorXd& b) { return (*P)(b); };
}

Fn integral_fn(const RiemannianSubmersion& rs, ScalarFieldPtr f,
               const std::vector<int>& grid) {
  auto P = std::make_shared<Pushdown>(Pushdown::integral(rs, std::move(f), grid));
  return [P](const Eigen::VectorXd& b) { return (*P)(b); };
}

// FD step for base-side derivatives of numerically defined pushdowns
double fd_h(const ChartDomain& dom) {
  double w = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dom.dim(); ++i) w = std::min(w, dom.width(i));
  return 3e-4 * w;
}

// F wrapped as a base-chart field with FD jets, for Laplace-Beltrami calls
ScalarFieldPtr fd_field(const Fn& F, int dim, double h) {
  return std::make_shared<LambdaField>(dim, [F, h](const Eigen::VectorXd& x) {
    return Jet(F(x), fd_gradient(F, x, h), fd_hessian(F, x, h));
  });
}

ScalarFieldPtr lifted_hessian_field(const RiemannianSubmersion& rs, ScalarFieldPtr f,
                                    const Eigen::VectorXd& xbase) {
  const int n = rs.total_dim();
  return std::make_shared<LambdaField>(
      n, [&rs, f, xbase, n](const Eigen::VectorXd& p) {
        const Eigen::VectorXd lift = horizontal_lift(rs, p, xbase);
        const double v = lift.dot(hessian(rs.total(), *f, p) * lift);
        return Jet(v, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n));
      });
}

ChartDomain inset(const ChartDomain& dom, double frac) {
  ChartDomain d = dom;
  for (int i = 0; i < d.dim(); ++i) {
    if (d.periodic[i]) continue;
    const double m = frac * d.width(i);
    d.lo(i) += m;
    d.hi(i) -= m;
  }
  return d;
}

double min_eig_hess(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p) {
  return min_gen_eig(hessian(g, f, p), g.at(p));
}

double critical_defect(const RiemannianSubmersion& rs, const ScalarField& f,
                       const Eigen::VectorXd& b, const std::vector<Eigen::VectorXd>& ys) {
  double worst = 0.0;
  for (const auto& y : ys) {
    const Eigen::VectorXd p = rs.fibre_point(b, y);
    worst = std::max(worst, rs.total().norm(p, gradient(rs.total(), f, p)));
  }
  return worst;
}

bool totally_geodesic(const RiemannianSubmersion& rs, const Eigen::VectorXd& b,
                      const std::vector<Eigen::VectorXd>& ys, double* ii = nullptr) {
  bool tg = true;
  double worst = 0.0;
  for (const auto& y : ys) {
    const auto geo = fibre_geometry(rs, b, y);
    tg = tg && geo.is_totally_geodesic;
    worst = std::max(worst, geo.ii_norm);
  }
  if (ii) *ii = worst;
  return tg;
}

bool minimal(const RiemannianSubmersion& rs, const Eigen::VectorXd& b,
             const std::vector<Eigen::VectorXd>& ys, double* h = nullptr) {
  bool mn = true;
  double worst = 0.0;
  for (const auto& y : ys) {
    const auto geo = fibre_geometry(rs, b, y);
    mn = mn && geo.is_minimal;
    worst = std::max(worst, geo.h_norm);
  }
  if (h) *h = worst;
  return mn;
}

double omega_residual(const RiemannianSubmersion& rs, const KahlerStructure& k,
                      const Eigen::VectorXd& b, const std::vector<Eigen::VectorXd>& ys) {
  double worst = 0.0;
  for (const auto& y : ys) {
    const Eigen::VectorXd p = rs.fibre_point(b, y);
    const Eigen::MatrixXd fr = fibre_frame(rs, b, y);
    const AlternatingForm w = k.kahler_form_at(p);
    for (int i = 0; i < fr.cols(); ++i)
      for (int j = i + 1; j < fr.cols(); ++j) {
        Eigen::MatrixXd pair(fr.rows(), 2);
        pair.col(0) = fr.col(i);
        pair.col(1) = fr.col(j);
        worst = std::max(worst, std::abs(w(pair)));
      }
  }
  return worst;
}

double coassoc_residual(const RiemannianSubmersion& rs, const G2Structure& g2,
                        const Eigen::VectorXd& b, const std::vector<Eigen::VectorXd>& ys) {
  double worst = 0.0;
  for (const auto& y : ys)
    worst = std::max(worst, coassociative_residual(
                                Plane{rs.fibre_point(b, y), fibre_frame(rs, b, y)}, g2));
  return worst;
}

// sweep of base points along axis 0, keeping the probe's other coordinates
std::vector<Eigen::VectorXd> base_sweep(const RiemannianSubmersion& rs,
                                        const Eigen::VectorXd& probe, int n) {
  std::vector<Eigen::VectorXd> out;
  for (double t : axis_sweep(rs.base().domain(), 0, n)) {
    Eigen::VectorXd b = probe;
    b(0) = t;
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------- P3.1

void prop_P31(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P3.1");
  const auto f = total_field(c);
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 10 : 3);

  double inv = 0.0;
  for (const auto& b : base_sweep(rs, c.scenario.probe_base, 5))
    inv = std::max(inv, fibre_constancy_defect(rs, *f, b, ys));
  if (inv > kHypTol) {
    out.push_back(hypothesis_record("P3.1", "P3.1", inv, c.tol,
                                    "test function is not invariant"));
    return;
  }
  const Fn F = invariant_fn(rs, f);
  const double h = fd_h(rs.base().domain());

  // Part 1: f convex on M forces F convex on B
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& p : box_samples(rs.total().domain(), 24, c.stream, 0.04))
    min_eig = std::min(min_eig, min_eig_hess(rs.total(), *f, p));
  if (min_eig < -kHypTol) {
    out.push_back(vacuous_record("P3.1:part1", "P3.1", c.tol,
                                 "f is not convex on the total space"));
  } else {
    const int scan = c.grid.empty() ? 24 : c.grid[0];
    const ConvexityReport rep =
        base_convexity_check(F, inset(rs.base().domain(), 0.05),
                             std::vector<int>(rs.base_dim(), scan),
                             ConvexityMode::hessian, c.tol, h);
    CheckRecord rec = make_record("P3.1:part1", "P3.1", std::max(0.0, -rep.worst), c.tol);
    rec.witness["min_hessian_eig_f"] = min_eig;
    rec.witness["worst_margin"] = rep.worst;
    out.push_back(std::move(rec));
  }

  // Part 2: along a totally geodesic or critical fibre the Hessians agree
  const Eigen::VectorXd b = c.scenario.probe_base;
  const bool tg = totally_geodesic(rs, b, ys);
  const bool crit = critical_defect(rs, *f, b, ys) <= kHypTol;
  if (!tg && !crit) {
    out.push_back(vacuous_record(
        "P3.1:part2", "P3.1", c.tol,
        "fibre is neither totally geodesic nor contained in the critical locus"));
  } else {
    const Eigen::MatrixXd HB = fd_hessian(F, b, h);
    double res = 0.0;
    for (const auto& y : ys) {
      const Eigen::VectorXd p = rs.fibre_point(b, y);
      const Eigen::MatrixXd pull = rs.dpi(p).transpose() * HB * rs.dpi(p);
      res = std::max(res,
                     (hessian(rs.total(), *f, p) - pull).cwiseAbs().maxCoeff());
    }
    CheckRecord rec = make_record("P3.1:part2", "P3.1", res, c.tol);
    rec.witness["totally_geodesic"] = tg;
    rec.witness["critical_locus"] = crit;
    out.push_back(std::move(rec));
  }

  // Part 3: along a minimal fibre the Laplacians agree
  if (!minimal(rs, b, ys)) {
    out.push_back(vacuous_record("P3.1:part3", "P3.1", c.tol, "fibre is not minimal"));
  } else {
    const auto Ff = fd_field(F, rs.base_dim(), h);
    const double lapB = laplacian(rs.base(), *Ff, b);
    double res = 0.0;
    for (const auto& y : ys)
      res = std::max(res, std::abs(laplacian(rs.total(), *f, rs.fibre_point(b, y)) - lapB));
    CheckRecord rec = make_record("P3.1:part3", "P3.1", res, c.tol);
    rec.witness["base_laplacian"] = lapB;
    out.push_back(std::move(rec));
  }
}

// ---------------------------------------------------------------- P5.1

void prop_P51(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P5.1");
  const auto& k = need_k(c, "P5.1");
  const auto f = total_field(c);
  const Eigen::VectorXd b = c.scenario.probe_base;
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 10 : 3);

  if (rs.fibre_dim() != k.complex_dim()) {
    out.push_back(hypothesis_record(
        "P5.1", "P5.1", std::abs(rs.fibre_dim() - k.complex_dim()), c.tol,
        "fibre is not half-dimensional, hence not Lagrangian"));
    return;
  }
  const double omega = omega_residual(rs, k, b, ys);
  if (omega > kHypTol) {
    out.push_back(
        hypothesis_record("P5.1", "P5.1", omega, c.tol, "fibre is not Lagrangian"));
    return;
  }

  // Part 1: the Laplacian is the Levi trace over any Lagrangian tangent frame
  double res1 = 0.0;
  for (const auto& y : ys) {
    const Eigen::VectorXd p = rs.fibre_point(b, y);
    const Eigen::MatrixXd fr = fibre_frame(rs, b, y);
    double levi_sum = 0.0;
    for (int j = 0; j < fr.cols(); ++j)
      levi_sum += levi_form(k, *f, p, fr.col(j));
    res1 = std::max(res1, std::abs(laplacian(k.metric(), *f, p) - levi_sum));
  }
  out.push_back(make_record("P5.1:part1", "P5.1", res1, c.tol));

  // Part 2: constant f on a totally geodesic (or critical) fibre makes PSH
  // and convexity coincide pointwise
  const double cst = fibre_constancy_defect(rs, *f, b, ys);
  const bool tg = totally_geodesic(rs, b, ys);
  const bool crit = critical_defect(rs, *f, b, ys) <= kHypTol;
  if (cst > kHypTol || (!tg && !crit)) {
    out.push_back(vacuous_record("P5.1:part2", "P5.1", c.tol,
                                 cst > kHypTol
                                     ? "f is not constant on the fibre"
                                     : "fibre is neither totally geodesic nor critical"));
    return;
  }
  double res2 = 0.0;
  bool psh = true, convex = true;
  for (const auto& y : ys) {
    const Eigen::VectorXd p = rs.fibre_point(b, y);
    const Eigen::MatrixXd fr = fibre_frame(rs, b, y);
    const Eigen::MatrixXd J = k.complex_structure(p);
    const Eigen::MatrixXd H = hessian(k.metric(), *f, p);
    // tangential Hessian must vanish; normals are J images of tangents
    for (int i = 0; i < fr.cols(); ++i) {
      for (int j = 0; j < fr.cols(); ++j)
        res2 = std::max(res2, std::abs(fr.col(i).dot(H * fr.col(j))));
      const Eigen::VectorXd X = J * fr.col(i);
      psh = psh && levi_form(k, *f, p, X) >= -kHypTol;
      res2 = std::max(res2, std::abs(levi_form(k, *f, p, X) - X.dot(H * X)));
    }
    convex = convex && min_eig_hess(k.metric(), *f, p) >= -kHypTol;
  }
  CheckRecord rec = make_record("P5.1:part2", "P5.1", res2, c.tol);
  rec.witness["psh_on_fibre"] = psh;
  rec.witness["convex_on_fibre"] = convex;
  rec.witness["verdicts_agree"] = psh == convex;
  out.push_back(std::move(rec));
}

// ---------------------------------------------------------------- P5.2

void prop_P52(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P5.2");
  const auto& k = need_k(c, "P5.2");
  const auto f = total_field(c);
  const Eigen::VectorXd b = c.scenario.probe_base;
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 10 : 3);

  double inv = 0.0;
  for (const auto& bb : base_sweep(rs, b, 5))
    inv = std::max(inv, fibre_constancy_defect(rs, *f, bb, ys));
  if (inv > kHypTol) {
    out.push_back(hypothesis_record("P5.2", "P5.2", inv, c.tol,
                                    "test function is not invariant"));
    return;
  }
  const Fn F = invariant_fn(rs, f);
  const double h = fd_h(rs.base().domain());
  const Eigen::VectorXd Xn = unit_base_direction(c, rs, b);

  const bool lagr = rs.fibre_dim() == k.complex_dim() &&
                    omega_residual(rs, k, b, ys) <= kHypTol;
  const bool tg = totally_geodesic(rs, b, ys);
  const bool crit = critical_defect(rs, *f, b, ys) <= kHypTol;

  // Part 1: the Levi form of f along the lift equals the base Hessian
  if (!lagr || (!tg && !crit)) {
    out.push_back(vacuous_record("P5.2:part1", "P5.2", c.tol,
                                 !lagr ? "fibre is not Lagrangian"
                                       : "fibre is neither totally geodesic nor critical"));
  } else {
    const Eigen::MatrixXd HB = fd_hessian(F, b, h);
    const double hb = Xn.dot(HB * Xn);
    double res = 0.0;
    double levi_min = std::numeric_limits<double>::infinity();
    for (const auto& y : ys) {
      const Eigen::VectorXd p = rs.fibre_point(b, y);
      const double levi = levi_form(k, *f, p, horizontal_lift(rs, p, Xn));
      levi_min = std::min(levi_min, levi);
      res = std::max(res, std::abs(levi - hb));
    }
    const double base_min = min_gen_eig(HB, rs.base().at(b));
    CheckRecord rec = make_record("P5.2:part1", "P5.2", res, c.tol);
    rec.witness["levi_min"] = levi_min;
    rec.witness["base_hessian_min"] = base_min;
    rec.witness["psh_on_fibre"] = levi_min >= -kHypTol;
    rec.witness["base_convex"] = base_min >= -kHypTol;
    out.push_back(std::move(rec));
  }

  // Part 2: PSH on a minimal fibre pushes down to subharmonicity
  double psh_min = std::numeric_limits<double>::infinity();
  for (const auto& y : ys)
    psh_min = std::min(
        psh_min, kahler_psh_defect(k, *f, rs.fibre_point(b, y), 120).defect);
  if (!minimal(rs, b, ys) || psh_min < -kHypTol) {
    out.push_back(vacuous_record("P5.2:part2", "P5.2", c.tol,
                                 psh_min < -kHypTol ? "f is not PSH along the fibre"
                                                    : "fibre is not minimal"));
    return;
  }
  const auto Ff = fd_field(F, rs.base_dim(), h);
  const double lapB = laplacian(rs.base(), *Ff, b);
  CheckRecord rec = make_record("P5.2:part2", "P5.2", std::max(0.0, -lapB), c.tol);
  rec.witness["base_laplacian"] = lapB;
  rec.witness["fibre_psh_defect"] = psh_min;
  out.push_back(std::move(rec));
}

// ---------------------------------------------------------------- C5.1

void prop_C51(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "C5.1");
  const auto& k = need_k(c, "C5.1");
  if (rs.base_dim() != 1)
    throw ConfigError("C5.1 critical-point scan supports one-dimensional bases");
  const auto f = total_field(c);
  const auto ys = fibre_lattice(rs, 10);

  double inv = 0.0, omega = 0.0;
  for (const auto& b : base_sweep(rs, c.scenario.probe_base, 5)) {
    inv = std::max(inv, fibre_constancy_defect(rs, *f, b, ys));
    omega = std::max(omega, omega_residual(rs, k, b, ys));
  }
  if (inv > kHypTol) {
    out.push_back(hypothesis_record("C5.1", "C5.1", inv, c.tol,
                                    "test function is not invariant"));
    return;
  }
  if (rs.fibre_dim() != k.complex_dim() || omega > kHypTol) {
    out.push_back(
        hypothesis_record("C5.1", "C5.1", omega, c.tol, "fibres are not Lagrangian"));
    return;
  }
  double strict = std::numeric_limits<double>::infinity();
  for (const auto& p : box_samples(rs.total().domain(), 12, c.stream, 0.05))
    strict = std::min(strict, kahler_psh_defect(k, *f, p, 120).defect);
  if (strict <= kHypTol) {
    out.push_back(hypothesis_record("C5.1", "C5.1", std::max(0.0, -strict), c.tol,
                                    "f is not strictly plurisubharmonic"));
    return;
  }

  const Fn F = invariant_fn(rs, f);
  const double h = fd_h(rs.base().domain());
  const int n = c.grid.empty() ? 64 : c.grid[0];
  const auto dF = [&](double t) {
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, t);
    return (F(b + Eigen::VectorXd::Constant(1, h)) -
            F(b - Eigen::VectorXd::Constant(1, h))) /
           (2.0 * h);
  };

  const auto ts = axis_sweep(rs.base().domain(), 0, n, 0.02);
  std::vector<double> crits, hessians;
  double prev = dF(ts.front());
  for (size_t i = 1; i < ts.size(); ++i) {
    const double cur = dF(ts[i]);
    if (prev == 0.0 || prev * cur < 0.0) {
      double lo = ts[i - 1], hi = ts[i], glo = prev;
      for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi), gm = dF(mid);
        if (glo * gm <= 0.0)
          hi = mid;
        else {
          lo = mid;
          glo = gm;
        }
      }
      const double t = 0.5 * (lo + hi);
      if (std::abs(dF(t)) < 1e-6) {
        crits.push_back(t);
        hessians.push_back(
            fd_second(F, Eigen::VectorXd::Constant(1, t), axis_vector(1, 0), h));
      }
    }
    prev = cur;
  }

  double res = 0.0;
  for (double hess : hessians) res = std::max(res, -hess);
  CheckRecord rec = make_record("C5.1", "C5.1", std::max(0.0, res), c.tol);
  rec.witness["critical_points"] = crits;
  rec.witness["hessians"] = hessians;
  rec.witness["count"] = static_cast<int>(crits.size());
  rec.witness["strict_psh_margin"] = strict;
  out.push_back(std::move(rec));
}

// ---------------------------------------------------------------- P5.4

void prop_P54(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P5.4");
  const auto& g2 = need_g2(c, "P5.4");
  const auto f = total_field(c);
  const auto ys = fibre_lattice(rs, 2);
  const Eigen::VectorXd probe = c.scenario.probe_base;

  double inv = 0.0;
  for (const auto& b : base_sweep(rs, probe, 5))
    inv = std::max(inv, fibre_constancy_defect(rs, *f, b, ys));
  if (inv > kHypTol) {
    out.push_back(hypothesis_record("P5.4", "P5.4", inv, c.tol,
                                    "test function is not invariant"));
    return;
  }
  const double coassoc = coassoc_residual(rs, g2, probe, ys);
  if (coassoc > kHypTol) {
    out.push_back(hypothesis_record("P5.4", "P5.4", coassoc, c.tol,
                                    "fibre is not coassociative"));
    return;
  }
  const bool tg = totally_geodesic(rs, probe, ys);
  const bool crit = critical_defect(rs, *f, probe, ys) <= kHypTol;
  if (!tg && !crit) {
    out.push_back(vacuous_record("P5.4", "P5.4", c.tol,
                                 "fibre is neither totally geodesic nor critical"));
    return;
  }

  const Fn F = invariant_fn(rs, f);
  const double h = fd_h(rs.base().domain());
  const int samples = c.grid.empty() ? 240 : c.grid[0];
  const ChartDomain& bd = rs.base().domain();

  // 20 base points straddling both verdicts of the equivalence
  const int npts = 20;
  int agree = 0, psh_count = 0;
  double res = 0.0, sub_res = 0.0;
  int sub_applicable = 0;
  nlohmann::ordered_json sample;
  for (int i = 0; i < npts; ++i) {
    Eigen::VectorXd b = probe;
    b(0) = bd.lo(0) + bd.width(0) * (2 * i + 1) / (2.0 * npts);
    const double defect =
        std::min(g2_psh_defect(g2, *f, rs.fibre_point(b, ys[0]), samples).defect,
                 g2_psh_defect(g2, *f, rs.fibre_point(b, ys[1]), samples).defect);
    const Eigen::MatrixXd HB = fd_hessian(F, b, h);
    const double me = min_gen_eig(HB, rs.base().at(b));
    const bool psh = defect >= -kHypTol;
    const bool convex = me >= -kHypTol;
    if (psh == convex)
      ++agree;
    else
      res = std::max(res, std::min(std::abs(defect), std::abs(me)));
    if (psh) {
      ++psh_count;
      ++sub_applicable;
      sub_res = std::max(sub_res, -HB.trace());
    }
    if (i == 0) {
      sample["b1"] = b(0);
      sample["fibre_defect"] = defect;
      sample["base_hessian_min"] = me;
    }
  }

  CheckRecord rec = make_record("P5.4", "P5.4", res, c.tol);
  rec.witness["points"] = npts;
  rec.witness["agreements"] = agree;
  rec.witness["psh_points"] = psh_count;
  rec.witness["sample"] = std::move(sample);
  out.push_back(std::move(rec));

  CheckRecord sub = make_record("P5.4:subharmonic", "P5.4", std::max(0.0, sub_res), c.tol);
  sub.witness["applicable_points"] = sub_applicable;
  out.push_back(std::move(sub));
}

// ---------------------------------------------------------------- C6.1

CheckRecord stability_record(const std::string& name, const VariationReport& rep,
                             double tol) {
  CheckRecord rec = make_record(name, "C6.1", std::max(0.0, -rep.second_analytic), tol);
  rec.witness["second_analytic"] = rep.second_analytic;
  rec.witness["second_fd"] = rep.second_fd;
  rec.witness["stokes_residual"] = rep.stokes_residual;
  return rec;
}

void prop_C61(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "C6.1");
  const Eigen::VectorXd b = c.scenario.probe_base;
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 8 : 2);
  const auto grid = variation_grid(c, rs.fibre_dim());
  const FibreVariation v(rs, b, unit_base_direction(c, rs, b));
  const auto pts = box_samples(rs.total().domain(), 6, c.stream, 0.05);

  const bool tg = totally_geodesic(rs, b, ys);
  const bool mn = minimal(rs, b, ys);

  const double sec = max_sectional(rs.total(), pts, 4, c.stream);
  if (sec > kHypTol || !tg) {
    out.push_back(vacuous_record("C6.1:riemannian", "C6.1", c.tol,
                                 sec > kHypTol ? "curvature is not nonpositive"
                                               : "fibre is not totally geodesic"));
  } else {
    out.push_back(stability_record("C6.1:riemannian",
                                   second_variation_riemannian(v, grid), c.tol));
  }

  if (c.scenario.kahler) {
    const auto& k = *c.scenario.kahler;
    const double ric = max_ricci_eig(k.metric(), pts);
    const bool lagr = rs.fibre_dim() == k.complex_dim() &&
                      omega_residual(rs, k, b, ys) <= kHypTol;
    if (ric > kHypTol || !mn || !lagr) {
      out.push_back(vacuous_record("C6.1:kahler", "C6.1", c.tol,
                                   ric > kHypTol ? "Ricci curvature is not nonpositive"
                                                 : "fibre is not minimal Lagrangian"));
    } else {
      out.push_back(
          stability_record("C6.1:kahler", second_variation_kahler(v, k, grid), c.tol));
    }
  }

  if (c.scenario.g2) {
    const double ric = max_ricci_eig(rs.total(), pts);
    const double co = coassoc_residual(rs, *c.scenario.g2, b, ys);
    if (ric > kHypTol || co > kHypTol || !tg) {
      out.push_back(vacuous_record("C6.1:g2", "C6.1", c.tol,
                                   "coassociative totally geodesic hypotheses fail"));
    } else {
      out.push_back(stability_record("C6.1:g2",
                                     second_variation_g2(v, *c.scenario.g2, grid), c.tol));
    }
  }
}

// ---------------------------------------------------------------- P7.1

void prop_P71(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P7.1");
  const auto f = total_field(c);
  const auto qgrid = quad_grid(c, rs.fibre_dim());
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 16 : 2);
  const Eigen::VectorXd probe = c.scenario.probe_base;
  const Eigen::VectorXd Xn = unit_base_direction(c, rs, probe);
  const Fn F = integral_fn(rs, f, qgrid);
  const double h = fd_h(rs.base().domain());
  const auto one = make_field("1", rs.total_dim());

  const auto sweep = base_sweep(rs, probe, 20);
  const double sec =
      max_sectional(rs.total(), box_samples(rs.total().domain(), 6, c.stream, 0.05), 4,
                    c.stream);
  bool tg_all = true, mn_all = true;
  double vol_dev = 0.0;
  const double vol0 = fibre_integral(rs, *one, probe, qgrid);
  for (int i = 0; i < 20; i += 4) {
    tg_all = tg_all && totally_geodesic(rs, sweep[i], ys);
    mn_all = mn_all && minimal(rs, sweep[i], ys);
    vol_dev = std::max(vol_dev, std::abs(fibre_integral(rs, *one, sweep[i], qgrid) - vol0));
  }

  const auto fibre_convex = [&](const Eigen::VectorXd& b) {
    double nonneg = 0.0, eig = std::numeric_limits<double>::infinity();
    for (const auto& y : ys) {
      const Eigen::VectorXd p = rs.fibre_point(b, y);
      nonneg = std::min(nonneg, f->value(p));
      eig = std::min(eig, min_eig_hess(rs.total(), *f, p));
    }
    return std::pair<double, double>(nonneg, eig);
  };

  // Part 1: nonpositive curvature, totally geodesic fibre, f >= 0 convex
  if (sec > kHypTol || !tg_all) {
    out.push_back(vacuous_record("P7.1:part1", "P7.1", c.tol,
                                 "curvature or totally geodesic hypothesis fails"));
  } else {
    int applicable = 0;
    double res = 0.0;
    for (const auto& b : sweep) {
      const auto [nonneg, eig] = fibre_convex(b);
      if (nonneg < -1e-10 || eig < -kHypTol) continue;
      ++applicable;
      res = std::max(res, -fd_second(F, b, Xn, h));
    }
    CheckRecord rec = make_record("P7.1:part1", "P7.1", std::max(0.0, res), c.tol);
    rec.witness["applicable_points"] = applicable;
    rec.witness["evaluated_points"] = static_cast<int>(sweep.size());
    out.push_back(std::move(rec));
  }

  // Part 2: constant fibre volume gives the bare Hessian identity
  if (vol_dev > kHypTol) {
    out.push_back(
        vacuous_record("P7.1:part2", "P7.1", c.tol, "fibre volume is not constant"));
  } else {
    const double d2 = fd_second(F, probe, Xn, h);
    const double integ =
        fibre_integral(rs, *lifted_hessian_field(rs, f, Xn), probe, qgrid);
    double res = std::abs(d2 - integ);
    int applicable = 0;
    for (const auto& b : sweep) {
      const auto [nonneg, eig] = fibre_convex(b);
      (void)nonneg;
      if (eig < -kHypTol) continue;
      ++applicable;
      res = std::max(res, std::max(0.0, -fd_second(F, b, Xn, h)));
    }
    CheckRecord rec = make_record("P7.1:part2", "P7.1", res, c.tol);
    rec.witness["fd_hessian"] = d2;
    rec.witness["integral_hessian"] = integ;
    rec.witness["applicable_points"] = applicable;
    out.push_back(std::move(rec));
  }

  // Part 3: minimal fibres push subharmonicity down
  if (!mn_all) {
    out.push_back(vacuous_record("P7.1:part3", "P7.1", c.tol, "fibres are not minimal"));
  } else {
    const auto Ff = fd_field(F, rs.base_dim(), h);
    int applicable = 0;
    double res = 0.0;
    for (const auto& b : sweep) {
      double min_lap = std::numeric_limits<double>::infinity();
      for (const auto& y : ys)
        min_lap = std::min(min_lap, laplacian(rs.total(), *f, rs.fibre_point(b, y)));
      if (min_lap < -kHypTol) continue;
      ++applicable;
      res = std::max(res, -laplacian(rs.base(), *Ff, b));
    }
    CheckRecord rec = make_record("P7.1:part3", "P7.1", std::max(0.0, res), c.tol);
    rec.witness["applicable_points"] = applicable;
    out.push_back(std::move(rec));
  }
}

// ---------------------------------------------------------------- P7.2

void prop_P72(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P7.2");
  const auto& k = need_k(c, "P7.2");
  const auto f = total_field(c);
  const auto qgrid = quad_grid(c, rs.fibre_dim());
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 12 : 2);
  const Eigen::VectorXd b = c.scenario.probe_base;
  const Eigen::VectorXd Xn = unit_base_direction(c, rs, b);

  const double ric =
      max_ricci_eig(k.metric(), box_samples(rs.total().domain(), 6, c.stream, 0.05));
  if (ric > kHypTol) {
    out.push_back(hypothesis_record("P7.2", "P7.2", ric, c.tol,
                                    "Ricci curvature is not nonpositive"));
    return;
  }
  const bool lagr = rs.fibre_dim() == k.complex_dim() &&
                    omega_residual(rs, k, b, ys) <= kHypTol;
  if (!minimal(rs, b, ys) || !lagr) {
    out.push_back(hypothesis_record("P7.2", "P7.2", 1.0, c.tol,
                                    "fibre is not minimal Lagrangian"));
    return;
  }
  double min_f = std::numeric_limits<double>::infinity();
  double min_eig = std::numeric_limits<double>::infinity();
  double min_lap = std::numeric_limits<double>::infinity();
  for (const auto& y : ys) {
    const Eigen::VectorXd p = rs.fibre_point(b, y);
    min_f = std::min(min_f, f->value(p));
    min_eig = std::min(min_eig, min_eig_hess(k.metric(), *f, p));
    min_lap = std::min(min_lap, laplacian(k.metric(), *f, p));
  }
  if (min_f < -1e-10) {
    out.push_back(hypothesis_record("P7.2", "P7.2", -min_f, c.tol,
                                    "f is negative along the fibre"));
    return;
  }

  const Fn F = integral_fn(rs, f, qgrid);
  const double h = fd_h(rs.base().domain());
  const double d2 = fd_second(F, b, Xn, h);
  const double integ = fibre_integral(rs, *lifted_hessian_field(rs, f, Xn), b, qgrid);

  if (min_eig < -kHypTol) {
    out.push_back(vacuous_record("P7.2", "P7.2", c.tol,
                                 "f is not convex along the fibre"));
  } else {
    CheckRecord rec = make_record("P7.2", "P7.2", std::max(0.0, -d2), c.tol);
    rec.witness["fd_hessian"] = d2;
    rec.witness["integral_hessian"] = integ;
    rec.witness["min_f_on_fibre"] = min_f;
    out.push_back(std::move(rec));
  }

  if (min_lap < -kHypTol) {
    out.push_back(vacuous_record("P7.2:subharmonic", "P7.2", c.tol,
                                 "f is not subharmonic along the fibre"));
  } else {
    const auto Ff = fd_field(F, rs.base_dim(), h);
    const double lapB = laplacian(rs.base(), *Ff, b);
    CheckRecord rec =
        make_record("P7.2:subharmonic", "P7.2", std::max(0.0, -lapB), c.tol);
    rec.witness["base_laplacian"] = lapB;
    out.push_back(std::move(rec));
  }
}

// ---------------------------------------------------------------- P7.3

void prop_P73(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P7.3");
  const auto& g2 = need_g2(c, "P7.3");
  const auto f = total_field(c);
  const auto qgrid = quad_grid(c, rs.fibre_dim());
  const auto ys = fibre_lattice(rs, 2);
  const Eigen::VectorXd probe = c.scenario.probe_base;
  const Eigen::VectorXd Xn = unit_base_direction(c, rs, probe);

  const double ric =
      max_ricci_eig(rs.total(), box_samples(rs.total().domain(), 4, c.stream, 0.0));
  if (ric > kHypTol) {
    out.push_back(hypothesis_record("P7.3", "P7.3", ric, c.tol,
                                    "Ricci curvature is not nonpositive"));
    return;
  }
  const double co = coassoc_residual(rs, g2, probe, ys);
  if (co > kHypTol || !totally_geodesic(rs, probe, ys)) {
    out.push_back(hypothesis_record("P7.3", "P7.3", std::max(co, 1.0 * kHypTol), c.tol,
                                    "fibre is not totally geodesic coassociative"));
    return;
  }

  const Fn F = integral_fn(rs, f, qgrid);
  const double h = fd_h(rs.base().domain());
  const ChartDomain& bd = rs.base().domain();

  // one probe where f should be convex along the fibre, one where it is not
  std::vector<Eigen::VectorXd> probes;
  {
    Eigen::VectorXd a = probe, bq = probe;
    a(0) = bd.lo(0) + 0.5 * bd.width(0);
    bq(0) = bd.lo(0);
    probes = {a, bq};
  }

  int applicable = 0, gated = 0;
  double res = 0.0;
  nlohmann::ordered_json detail = nlohmann::ordered_json::array();
  for (const auto& b : probes) {
    double min_f = std::numeric_limits<double>::infinity();
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& y : ys) {
      const Eigen::VectorXd p = rs.fibre_point(b, y);
      min_f = std::min(min_f, f->value(p));
      min_eig = std::min(min_eig, min_eig_hess(rs.total(), *f, p));
    }
    if (min_f < -1e-10) {
      out.push_back(hypothesis_record("P7.3", "P7.3", -min_f, c.tol,
                                      "f is negative along the fibre"));
      return;
    }
    if (min_eig < -kHypTol) {
      ++gated;
      continue;
    }
    ++applicable;
    const double d2 = fd_second(F, b, Xn, h);
    const double integ = fibre_integral(rs, *lifted_hessian_field(rs, f, Xn), b, qgrid);
    const double scale = std::max(1.0, std::abs(integ));
    res = std::max(res, std::abs(d2 - integ) / scale);
    res = std::max(res, std::max(0.0, -d2) / scale);
    nlohmann::ordered_json entry;
    entry["b1"] = b(0);
    entry["fd_hessian"] = d2;
    entry["integral_hessian"] = integ;
    detail.push_back(std::move(entry));
  }

  CheckRecord rec = make_record("P7.3", "P7.3", res, c.tol);
  rec.witness["applicable_probes"] = applicable;
  rec.witness["gated_probes"] = gated;
  rec.witness["probes"] = std::move(detail);
  out.push_back(std::move(rec));
}

// ---------------------------------------------------------------- P7.4

void prop_P74(const CheckContext& c, std::vector<CheckRecord>& out) {
  const auto& rs = need_rs(c, "P7.4");
  const auto f = total_field(c);
  const int n = rs.total_dim();
  const auto& g = rs.total();
  const int qn = c.grid.empty() ? 64 : c.grid[0];
  const std::vector<int> qgrid(rs.fibre_dim(), qn);

  const Fn haar = [&rs, f, qgrid](const Eigen::VectorXd& b) {
    return haar_pushdown(rs, *f, b, qgrid);
  };
  const Fn sup = [&rs, f, qgrid](const Eigen::VectorXd& b) {
    return fibre_supremum(rs, *f, b, qgrid);
  };
  const auto pull = [&rs](const Fn& F) {
    return [&rs, F](const Eigen::VectorXd& p) { return F(rs.project(p)); };
  };

  // second difference of P along the geodesic through p with velocity v; one
  // integration of time 2h per sign gives both the h and 2h stencils
  const double hstep = 0.05;
  const auto geo_d2 = [&](const Fn& P, const Eigen::VectorXd& p,
                          const Eigen::VectorXd& v) {
    const auto fwd = geodesic(g, p, v, 2.0 * hstep, 32);
    const auto bwd = geodesic(g, p, -v, 2.0 * hstep, 32);
    const double p0 = P(p);
    const double d1 =
        (P(fwd.points[16]) - 2.0 * p0 + P(bwd.points[16])) / (hstep * hstep);
    const double d2 =
        (P(fwd.points[32]) - 2.0 * p0 + P(bwd.points[32])) / (4.0 * hstep * hstep);
    return (4.0 * d1 - d2) / 3.0;
  };

  const auto pts = box_samples(g.domain(), 6, c.stream, 0.15);
  std::vector<Eigen::VectorXd> dirs;
  for (size_t i = 0; i < pts.size(); ++i) {
    Eigen::VectorXd v = halton_normal(n, c.stream + 100 + static_cast<long>(i));
    v /= std::sqrt(v.dot(g.at(pts[i]) * v));
    dirs.push_back(std::move(v));
  }

  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& p : box_samples(g.domain(), 15, c.stream + 7, 0.08))
    min_eig = std::min(min_eig, min_eig_hess(g, *f, p));

  if (min_eig < -kHypTol) {
    out.push_back(
        vacuous_record("P7.4:haar_convex", "P7.4", c.tol, "f is not convex"));
    out.push_back(
        vacuous_record("P7.4:sup_convex", "P7.4", c.tol, "f is not convex"));
  } else {
    for (const auto& [name, P] :
         std::vector<std::pair<std::string, Fn>>{{"P7.4:haar_convex", pull(haar)},
                                                 {"P7.4:sup_convex", pull(sup)}}) {
      double res = 0.0, worst_d2 = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < pts.size(); ++i) {
        const double d2 = geo_d2(P, pts[i], dirs[i]);
        worst_d2 = std::min(worst_d2, d2);
        res = std::max(res, -d2);
      }
      CheckRecord rec = make_record(name, "P7.4", std::max(0.0, res), c.tol);
      rec.witness["min_second_difference"] = worst_d2;
      rec.witness["min_hessian_eig_f"] = min_eig;
      out.push_back(std::move(rec));
    }
  }

  if (c.scenario.kahler) {
    const auto& k = *c.scenario.kahler;
    double psh_min = std::numeric_limits<double>::infinity();
    for (const auto& p : box_samples(g.domain(), 8, c.stream + 13, 0.08))
      psh_min = std::min(psh_min, kahler_psh_defect(k, *f, p, 80).defect);
    if (psh_min < -kHypTol) {
      out.push_back(vacuous_record("P7.4:haar_psh", "P7.4", c.tol, "f is not PSH"));
    } else {
      const Fn P = pull(haar);
      double res = 0.0;
      for (size_t i = 0; i < pts.size(); ++i) {
        const Eigen::VectorXd Jv = k.complex_structure(pts[i]) * dirs[i];
        res = std::max(res, -(geo_d2(P, pts[i], dirs[i]) + geo_d2(P, pts[i], Jv)));
      }
      CheckRecord rec = make_record("P7.4:haar_psh", "P7.4", std::max(0.0, res), c.tol);
      rec.witness["min_levi_f"] = psh_min;
      out.push_back(std::move(rec));
    }
  }

  // applied to an invariant function, the Haar integral reproduces it
  const auto ys = fibre_lattice(rs, rs.fibre_dim() == 1 ? 10 : 2);
  double inv = 0.0;
  const auto bsweep = base_sweep(rs, c.scenario.probe_base, 5);
  for (const auto& b : bsweep)
    inv = std::max(inv, fibre_constancy_defect(rs, *f, b, ys));
  if (inv > kHypTol) {
    out.push_back(vacuous_record("P7.4:reproduces", "P7.4", c.tol,
                                 "f is not invariant, nothing to reproduce"));
  } else {
    double res = 0.0;
    for (const auto& b : bsweep)
      res = std::max(res, std::abs(haar(b) - f->value(rs.fibre_point(b, ys[0]))));
    out.push_back(make_record("P7.4:reproduces", "P7.4", res, c.tol));
  }
}

}  // namespace

void proposition_check(const std::string& prop, const CheckContext& c,
                       std::vector<CheckRecord>& out) {
  if (prop == "P3.1")
    prop_P31(c, out);
  else if (prop == "P5.1")
    prop_P51(c, out);
  else if (prop == "P5.2")
    prop_P52(c, out);
  else if (prop == "C5.1")
    prop_C51(c, out);
  else if (prop == "P5.4")
    prop_P54(c, out);
  else if (prop == "C6.1")
    prop_C61(c, out);
  else if (prop == "P7.1")
    prop_P71(c, out);
  else if (prop == "P7.2")
    prop_P72(c, out);
  else if (prop == "P7.3")
    prop_P73(c, out);
  else if (prop == "P7.4")
    prop_P74(c, out);
  else
    throw ConfigError("unknown proposition id '" + prop + "'");
}

}  // namespace calibra
