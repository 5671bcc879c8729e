#include "calibra/submersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"
#include "quadrature_detail.hpp"

namespace calibra {

namespace {

using detail::grid_nodes;
using detail::pairwise_sum;
using detail::parallel_fill;
using detail::require_compact_fibre;

// Non-owning view of a stack field, good for the lifetime of one call.
ScalarFieldPtr borrow(const ScalarField& f) {
  return ScalarFieldPtr(&f, [](const ScalarField*) {});
}

std::vector<std::string> joint_vars(int base_dim, int fibre_dim) {
  std::vector<std::string> vars;
  for (int i = 0; i < base_dim; ++i) vars.push_back("b" + std::to_string(i + 1));
  for (int i = 0; i < fibre_dim; ++i) vars.push_back("y" + std::to_string(i + 1));
  return vars;
}

}  // namespace

RiemannianSubmersion::RiemannianSubmersion(MetricField total, MetricField base,
                                           std::vector<ScalarFieldPtr> projection,
                                           std::vector<ScalarFieldPtr> fibre_param,
                                           ChartDomain fibre_domain)
    : total_(std::move(total)),
      base_(std::move(base)),
      projection_(std::move(projection)),
      fibre_param_(std::move(fibre_param)),
      fibre_domain_(std::move(fibre_domain)) {
  if (base_.dim() >= total_.dim())
    throw ConfigError("base dimension must be smaller than the total dimension");
  if (static_cast<int>(projection_.size()) != base_.dim())
    throw ConfigError("projection needs one component per base coordinate");
  if (static_cast<int>(fibre_param_.size()) != total_.dim())
    throw ConfigError("fibre_param needs one component per total coordinate");
  if (fibre_domain_.dim() != total_.dim() - base_.dim())
    throw ConfigError("fibre box dimension must be total minus base");
  for (const auto& f : projection_)
    if (f->dim() != total_.dim())
      throw ConfigError("projection components must be functions of the total chart");
  for (const auto& f : fibre_param_)
    if (f->dim() != base_.dim() + fibre_domain_.dim())
      throw ConfigError("fibre_param components must be functions of (b, y)");
}

RiemannianSubmersion RiemannianSubmersion::from_expressions(
    MetricField total, MetricField base, const std::vector<std::string>& projection,
    const std::vector<std::string>& fibre_param, ChartDomain fibre_domain) {
  std::vector<ScalarFieldPtr> proj;
  for (const auto& text : projection) proj.push_back(make_field(text, total.dim()));
  const auto vars = joint_vars(base.dim(), fibre_domain.dim());
  std::vector<ScalarFieldPtr> param;
  for (const auto& text : fibre_param) param.push_back(make_field(text, vars));
  return RiemannianSubmersion(std::move(total), std::move(base), std::move(proj),
                              std::move(param), std::move(fibre_domain));
}

Eigen::VectorXd RiemannianSubmersion::project(const Eigen::VectorXd& p) const {
  const Eigen::VectorXd q = total_.domain().wrap(p);
  Eigen::VectorXd b(base_.dim());
  for (int i = 0; i < base_.dim(); ++i) b(i) = projection_[i]->value(q);
  return b;
}

Eigen::MatrixXd RiemannianSubmersion::dpi(const Eigen::VectorXd& p) const {
  const Eigen::VectorXd q = total_.domain().wrap(p);
  Eigen::MatrixXd j(base_.dim(), total_.dim());
  for (int i = 0; i < base_.dim(); ++i) j.row(i) = projection_[i]->gradient(q).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw RankDeficientError("projection differential drops rank", q);
  return j;
}

Eigen::VectorXd RiemannianSubmersion::fibre_point(const Eigen::VectorXd& b,
                                                  const Eigen::VectorXd& y) const {
  Eigen::VectorXd z(base_.dim() + fibre_domain_.dim());
  z.head(base_.dim()) = base_.domain().wrap(b);
  z.tail(fibre_domain_.dim()) = fibre_domain_.wrap(y);
  Eigen::VectorXd p(total_.dim());
  for (int a = 0; a < total_.dim(); ++a) p(a) = fibre_param_[a]->value(z);
  return p;
}

ImmersedSubmanifold RiemannianSubmersion::fibre(const Eigen::VectorXd& b) const {
  const int m = base_.dim(), fd = fibre_domain_.dim();
  const Eigen::VectorXd bw = base_.domain().wrap(b);
  std::vector<ScalarFieldPtr> comps;
  for (const auto& field : fibre_param_) {
    comps.push_back(lambda_field(fd, [field, bw, m, fd](const Eigen::VectorXd& y) {
      Eigen::VectorXd z(m + fd);
      z.head(m) = bw;
      z.tail(fd) = y;
      Jet full = field->jet(z);
      Jet r = Jet::constant(fd, full.v);
      r.g = full.g.tail(fd);
      r.h = full.h.bottomRightCorner(fd, fd);
      return r;
    }));
  }
  return ImmersedSubmanifold(total_, fibre_domain_, std::move(comps));
}

ScalarFieldPtr RiemannianSubmersion::pullback(const ScalarFieldPtr& base_field) const {
  return compose_field(base_field, projection_);
}

double RiemannianSubmersion::fibre_consistency(const Eigen::VectorXd& b,
                                               const Eigen::VectorXd& y) const {
  const Eigen::VectorXd bw = base_.domain().wrap(b);
  Eigen::VectorXd diff = project(fibre_point(b, y)) - bw;
  for (int i = 0; i < base_.dim(); ++i) {
    if (!base_.domain().periodic[i]) continue;
    const double w = base_.domain().width(i);
    diff(i) = std::remainder(diff(i), w);
  }
  return diff.norm();
}

double RiemannianSubmersion::isometry_defect(const Eigen::VectorXd& p) const {
  const Eigen::MatrixXd j = dpi(p);
  const Eigen::MatrixXd a = j * total_.inverse_at(p) * j.transpose();
  const Eigen::MatrixXd gb = base_.at(project(p));
  return (a * gb - Eigen::MatrixXd::Identity(base_.dim(), base_.dim())).norm();
}

SplitVector split(const RiemannianSubmersion& rs, const Eigen::VectorXd& p,
                  const Eigen::VectorXd& v) {
  const Eigen::MatrixXd j = rs.dpi(p);
  const Eigen::MatrixXd ginv = rs.total().inverse_at(p);
  const Eigen::MatrixXd a = j * ginv * j.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw RankDeficientError("horizontal solve failed: dpi g^{-1} dpi^T is singular", p);
  const Eigen::VectorXd alpha = llt.solve(j * v);
  SplitVector out;
  out.horizontal = ginv * j.transpose() * alpha;
  out.vertical = v - out.horizontal;
  return out;
}

Eigen::VectorXd horizontal_lift(const RiemannianSubmersion& rs, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& xbase) {
  const Eigen::MatrixXd j = rs.dpi(p);
  const Eigen::MatrixXd ginv = rs.total().inverse_at(p);
  const Eigen::MatrixXd a = j * ginv * j.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw RankDeficientError("horizontal lift failed: dpi g^{-1} dpi^T is singular", p);
  return ginv * j.transpose() * llt.solve(xbase);
}

double hessian_transfer_residual(const RiemannianSubmersion& rs, const ScalarField& base_f,
                                 const Eigen::VectorXd& b, const Eigen::VectorXd& xbase,
                                 int fibre_samples) {
  if (fibre_samples < 1) throw ConfigError("fibre_samples must be positive");
  const Eigen::MatrixXd hb = hessian(rs.base(), base_f, b);
  const double rhs = xbase.dot(hb * xbase);

  const auto lifted = rs.pullback(borrow(base_f));
  const std::vector<int> grid(rs.fibre_dim(), fibre_samples);
  double worst = 0.0;
  for (const auto& y : grid_nodes(rs.fibre_domain(), grid)) {
    const Eigen::VectorXd p = rs.fibre_point(b, y);
    const Eigen::VectorXd lift = horizontal_lift(rs, p, xbase);
    const Eigen::MatrixXd hm = hessian(rs.total(), *lifted, p);
    worst = std::max(worst, std::abs(lift.dot(hm * lift) - rhs));
  }
  return worst;
}

FibreGeometryReport fibre_geometry(const RiemannianSubmersion& rs, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& y, double tol) {
  const auto imm = rs.fibre(b);
  FibreGeometryReport rep;
  rep.geometry = imm.geometry(y);
  const Eigen::MatrixXd g = rs.total().at(imm.point(y));
  const Eigen::MatrixXd hinv = rep.geometry.induced.inverse();
  const int k = rs.fibre_dim();

  rep.h_norm = std::sqrt(std::max(
      0.0, rep.geometry.mean_curvature.dot(g * rep.geometry.mean_curvature)));
  double ii2 = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int i2 = 0; i2 < k; ++i2)
        for (int j2 = 0; j2 < k; ++j2)
          ii2 += hinv(i, i2) * hinv(j, j2) *
                 rep.geometry.second[i][j].dot(g * rep.geometry.second[i2][j2]);
  rep.ii_norm = std::sqrt(std::max(0.0, ii2));
  rep.is_minimal = rep.h_norm < tol;
  rep.is_totally_geodesic = rep.ii_norm < tol;
  return rep;
}

double fibre_integral(const RiemannianSubmersion& rs, const ScalarField& f,
                      const Eigen::VectorXd& b, const std::vector<int>& grid) {
  require_compact_fibre(rs.fibre_domain(), "fibre_integral");
  for (int c : grid)
    if (c < 32) throw ConfigError("fibre_integral grid must have at least 32 points per axis");
  const auto nodes = grid_nodes(rs.fibre_domain(), grid);

  const int m = rs.base_dim(), fd = rs.fibre_dim(), n = rs.total_dim();
  const Eigen::VectorXd bw = rs.base().domain().wrap(b);
  const auto& param = rs.fibre_param_fields();

  double cell = 1.0;
  for (int i = 0; i < fd; ++i) cell *= rs.fibre_domain().width(i) / grid[i];

  // Works on the joint parametrization fields directly: the induced volume
  // element only needs first derivatives, so the full fibre immersion with
  // its order-2 jets would be wasted effort at quadrature node counts.
  std::vector<double> vals;
  parallel_fill(nodes.size(), vals, [&](size_t t) {
    Eigen::VectorXd z(m + fd);
    z.head(m) = bw;
    z.tail(fd) = nodes[t];
    Eigen::VectorXd p(n);
    Eigen::MatrixXd jac(n, fd);
    for (int a = 0; a < n; ++a) {
      p(a) = param[a]->value(z);
      jac.row(a) = param[a]->gradient(z).tail(fd).transpose();
    }
    const Eigen::MatrixXd g = rs.total().at(p);
    const double det = (jac.transpose() * g * jac).determinant();
    if (!(det > 0.0))
      throw RankDeficientError("fibre parametrization is degenerate", nodes[t]);
    return f.value(p) * std::sqrt(det);
  });
  return cell * pairwise_sum(vals.data(), vals.size());
}

double fibre_supremum(const RiemannianSubmersion& rs, const ScalarField& f,
                      const Eigen::VectorXd& b, const std::vector<int>& grid,
                      int refine_iters) {
  require_compact_fibre(rs.fibre_domain(), "fibre_supremum");
  const auto nodes = grid_nodes(rs.fibre_domain(), grid);
  const auto imm = rs.fibre(b);

  std::vector<double> vals;
  parallel_fill(nodes.size(), vals, [&](size_t t) { return f.value(imm.point(nodes[t])); });
  size_t best = 0;
  for (size_t t = 1; t < vals.size(); ++t)
    if (vals[t] > vals[best]) best = t;

  // monotone ascent from the best node through the pulled-back jet
  const auto on_fibre = imm.pullback(borrow(f));
  Eigen::VectorXd y = nodes[best];
  double value = vals[best];
  double step = 0.0;
  for (int i = 0; i < rs.fibre_dim(); ++i)
    step = std::max(step, rs.fibre_domain().width(i) / grid[i]);
  for (int it = 0; it < refine_iters; ++it) {
    const Eigen::VectorXd dir = on_fibre->jet(y).g;
    if (dir.norm() == 0.0) break;
    const Eigen::VectorXd trial = rs.fibre_domain().wrap(y + step * dir.normalized());
    const double tv = on_fibre->value(trial);
    if (tv > value) {
      y = trial;
      value = tv;
    } else {
      step *= 0.5;
    }
  }
  return value;
}

double haar_pushdown(const RiemannianSubmersion& rs, const ScalarField& f,
                     const Eigen::VectorXd& b, const std::vector<int>& grid) {
  require_compact_fibre(rs.fibre_domain(), "haar_pushdown");
  const auto nodes = grid_nodes(rs.fibre_domain(), grid);
  std::vector<double> vals;
  parallel_fill(nodes.size(), vals, [&](size_t t) { return f.value(rs.fibre_point(b, nodes[t])); });
  return pairwise_sum(vals.data(), vals.size()) / static_cast<double>(vals.size());
}

Pushdown Pushdown::invariant(RiemannianSubmersion rs, ScalarFieldPtr f,
                             std::vector<int> check_grid) {
  return Pushdown(PushdownKind::invariant, std::move(rs), std::move(f),
                  std::move(check_grid), 0);
}

Pushdown Pushdown::integral(RiemannianSubmersion rs, ScalarFieldPtr f, std::vector<int> grid) {
  return Pushdown(PushdownKind::integral, std::move(rs), std::move(f), std::move(grid), 0);
}

Pushdown Pushdown::supremum(RiemannianSubmersion rs, ScalarFieldPtr f, std::vector<int> grid,
                            int refine_iters) {
  return Pushdown(PushdownKind::supremum, std::move(rs), std::move(f), std::move(grid),
                  refine_iters);
}

double Pushdown::operator()(const Eigen::VectorXd& b) const {
  switch (kind_) {
    case PushdownKind::integral:
      return fibre_integral(rs_, *f_, b, grid_);
    case PushdownKind::supremum:
      return fibre_supremum(rs_, *f_, b, grid_, refine_iters_);
    case PushdownKind::invariant:
      break;
  }
  const auto nodes = grid_nodes(rs_.fibre_domain(), grid_);
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& y : nodes) {
    const double v = f_->value(rs_.fibre_point(b, y));
    lo = first ? v : std::min(lo, v);
    hi = first ? v : std::max(hi, v);
    first = false;
  }
  if (hi - lo >= 1e-8)
    throw HypothesisViolatedError(
        "pushdown declared invariant but the field oscillates by " + std::to_string(hi - lo) +
        " along the fibre");
  return f_->value(rs_.fibre_point(b, nodes.front()));
}

ConvexityReport base_convexity_check(const std::function<double(const Eigen::VectorXd&)>& F,
                                     const ChartDomain& region, const std::vector<int>& grid,
                                     ConvexityMode mode, double tol, double fd_step) {
  const int m = region.dim();
  if (static_cast<int>(grid.size()) != m)
    throw ConfigError("convexity grid needs one count per base coordinate");
  for (int c : grid)
    if (c < 8) throw ConfigError("convexity grid too coarse: need at least 8 points per axis");

  const auto nodes = grid_nodes(region, grid);
  ConvexityReport rep;
  rep.worst = std::numeric_limits<double>::infinity();

  if (mode == ConvexityMode::hessian) {
    Eigen::VectorXd h(m);
    for (int i = 0; i < m; ++i) h(i) = fd_step * region.width(i);
    for (const auto& p : nodes) {
      Eigen::MatrixXd hess(m, m);
      const double f0 = F(p);
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e(i) = h(i);
        hess(i, i) = (F(p + e) - 2.0 * f0 + F(p - e)) / (h(i) * h(i));
        for (int j = i + 1; j < m; ++j) {
          Eigen::VectorXd ej = Eigen::VectorXd::Zero(m);
          ej(j) = h(j);
          const double mixed = (F(p + e + ej) - F(p + e - ej) - F(p - e + ej) + F(p - e - ej)) /
                               (4.0 * h(i) * h(j));
          hess(i, j) = hess(j, i) = mixed;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
      const double low = eig.eigenvalues().minCoeff();
      if (low < rep.worst) {
        rep.worst = low;
        rep.witness = p;
      }
    }
    rep.convex = rep.worst >= -tol;
    return rep;
  }

  // midpoint mode: compare F at segment midpoints against chord averages
  // along every grid line
  for (const auto& p : nodes) {
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e(i) = region.width(i) / grid[i];
      const Eigen::VectorXd c = p + 2.0 * e;
      if (!region.periodic[i] && c(i) > region.hi(i)) continue;
      const double margin = 0.5 * (F(p) + F(region.wrap(c))) - F(region.wrap(p + e));
      if (margin < rep.worst) {
        rep.worst = margin;
        rep.witness = region.wrap(p + e);
      }
    }
  }
  rep.convex = rep.worst >= -tol;
  return rep;
}

}  // namespace calibra
