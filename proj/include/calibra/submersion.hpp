#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calibra/metric.hpp"
#include "calibra/scalar_field.hpp"
#include "calibra/submanifold.hpp"

namespace calibra {

// A submersion pi: M -> B together with a parametrization of its fibres.
// The projection is given componentwise as scalar fields on the total chart;
// fibre_param maps (b, y) in base x fibre coordinates to a total-space point
// and is what the fibre geometry, quadrature and variation code drive.
class RiemannianSubmersion {
 public:
  RiemannianSubmersion(MetricField total, MetricField base,
                       std::vector<ScalarFieldPtr> projection,
                       std::vector<ScalarFieldPtr> fibre_param,
                       ChartDomain fibre_domain);

  // Projection components parsed against the total chart (x1..xn plus the
  // usual aliases); fibre_param components against b1..bm, y1..yf.
  static RiemannianSubmersion from_expressions(MetricField total, MetricField base,
                                               const std::vector<std::string>& projection,
                                               const std::vector<std::string>& fibre_param,
                                               ChartDomain fibre_domain);

  int total_dim() const { return total_.dim(); }
  int base_dim() const { return base_.dim(); }
  int fibre_dim() const { return fibre_domain_.dim(); }

  const MetricField& total() const { return total_; }
  const MetricField& base() const { return base_; }
  const ChartDomain& fibre_domain() const { return fibre_domain_; }
  const std::vector<ScalarFieldPtr>& projection_fields() const { return projection_; }
  const std::vector<ScalarFieldPtr>& fibre_param_fields() const { return fibre_param_; }

  Eigen::VectorXd project(const Eigen::VectorXd& p) const;
  // m x n Jacobian of pi at p; throws RankDeficientError below full rank m.
  Eigen::MatrixXd dpi(const Eigen::VectorXd& p) const;

  Eigen::VectorXd fibre_point(const Eigen::VectorXd& b, const Eigen::VectorXd& y) const;
  // The fibre over b as an immersion of the fibre box, obtained by freezing
  // the base slot of fibre_param.
  ImmersedSubmanifold fibre(const Eigen::VectorXd& b) const;

  // F . pi as a field on the total chart.
  ScalarFieldPtr pullback(const ScalarFieldPtr& base_field) const;

  // |pi(fibre_param(b, y)) - b|, which the type promises stays below 1e-10.
  double fibre_consistency(const Eigen::VectorXd& b, const Eigen::VectorXd& y) const;
  // Deviation of dpi g^{-1} dpi^T from the inverse base metric at pi(p);
  // zero iff dpi is an isometry from the horizontal space onto T_b B.
  double isometry_defect(const Eigen::VectorXd& p) const;

 private:
  MetricField total_, base_;
  std::vector<ScalarFieldPtr> projection_, fibre_param_;
  ChartDomain fibre_domain_;
};

struct SplitVector {
  Eigen::VectorXd vertical, horizontal;
};

// g-orthogonal decomposition of v at p into ker(dpi) and its complement.
SplitVector split(const RiemannianSubmersion& rs, const Eigen::VectorXd& p,
                  const Eigen::VectorXd& v);

// The unique horizontal w at p with dpi(w) = xbase.
Eigen::VectorXd horizontal_lift(const RiemannianSubmersion& rs, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& xbase);

// Max over a fibre grid of |Hess_M(pi*F)(lift, lift) - Hess_B(F)(X, X)|;
// fibre_samples counts grid points per fibre axis.
double hessian_transfer_residual(const RiemannianSubmersion& rs, const ScalarField& base_f,
                                 const Eigen::VectorXd& b, const Eigen::VectorXd& xbase,
                                 int fibre_samples);

struct FibreGeometryReport {
  SubmanifoldGeometry geometry;
  double h_norm = 0.0;   // |H|_g
  double ii_norm = 0.0;  // full h,g-contraction of II
  bool is_minimal = false;
  bool is_totally_geodesic = false;
};

FibreGeometryReport fibre_geometry(const RiemannianSubmersion& rs, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& y, double tol = 1e-7);

// Quadrature of f against the induced fibre volume over the fibre of b.
// Every fibre axis must be periodic (compact fibres only) and carry at least
// 32 grid points; periodic trapezoid rule, deterministic pairwise summation.
double fibre_integral(const RiemannianSubmersion& rs, const ScalarField& f,
                      const Eigen::VectorXd& b, const std::vector<int>& grid);

// Grid maximum of f over the fibre of b followed by a fixed number of
// monotone ascent steps from the best node.
double fibre_supremum(const RiemannianSubmersion& rs, const ScalarField& f,
                      const Eigen::VectorXd& b, const std::vector<int>& grid,
                      int refine_iters = 40);

// Mean of f over the fibre angle coordinates with the normalized flat angle
// measure, ignoring the induced volume.
double haar_pushdown(const RiemannianSubmersion& rs, const ScalarField& f,
                     const Eigen::VectorXd& b, const std::vector<int>& grid);

enum class PushdownKind { invariant, integral, supremum };

// A base function produced from a total-space field by one of the three
// pushdown constructions.  Invariant pushdowns verify on every evaluation
// that f really is constant along the fibre.
class Pushdown {
 public:
  static Pushdown invariant(RiemannianSubmersion rs, ScalarFieldPtr f,
                            std::vector<int> check_grid);
  static Pushdown integral(RiemannianSubmersion rs, ScalarFieldPtr f, std::vector<int> grid);
  static Pushdown supremum(RiemannianSubmersion rs, ScalarFieldPtr f, std::vector<int> grid,
                           int refine_iters = 40);

  PushdownKind kind() const { return kind_; }
  const RiemannianSubmersion& submersion() const { return rs_; }
  double operator()(const Eigen::VectorXd& b) const;

 private:
  Pushdown(PushdownKind kind, RiemannianSubmersion rs, ScalarFieldPtr f,
           std::vector<int> grid, int refine_iters)
      : kind_(kind), rs_(std::move(rs)), f_(std::move(f)), grid_(std::move(grid)),
        refine_iters_(refine_iters) {}

  PushdownKind kind_;
  RiemannianSubmersion rs_;
  ScalarFieldPtr f_;
  std::vector<int> grid_;
  int refine_iters_;
};

enum class ConvexityMode { hessian, midpoint };

struct ConvexityReport {
  bool convex = true;
  // Most negative eigenvalue (hessian mode) or chord margin (midpoint mode)
  // seen over the grid, and where it occurred.
  double worst = 0.0;
  Eigen::VectorXd witness;
};

// Convexity scan of a base function over a coordinate box.  Hessian mode
// differentiates F by central differences and checks eigenvalues; midpoint
// mode only compares F at segment midpoints against chord averages, which is
// the right tool for sup-pushdowns that are merely continuous.
ConvexityReport base_convexity_check(const std::function<double(const Eigen::VectorXd&)>& F,
                                     const ChartDomain& region, const std::vector<int>& grid,
                                     ConvexityMode mode, double tol, double fd_step = 1e-3);

}  // namespace calibra
