#pragma once

// Internal helpers shared by the check drivers.  Not installed.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "calibra/geometry.hpp"
#include "calibra/sampling.hpp"
#include "calibra/scenario.hpp"
#include "calibra/submersion.hpp"

namespace calibra::detail {

using Fn = std::function<double(const Eigen::VectorXd&)>;

// Threshold used when a hypothesis is tested numerically.  It decides
// applicability of a statement, never the pass flag of a record.
inline constexpr double kHypTol = 1e-8;

inline Eigen::VectorXd axis_vector(int n, int i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

// n values along one coordinate of the domain: evenly spaced over the period
// when the axis is periodic, otherwise an interior linspace.
std::vector<double> axis_sweep(const ChartDomain& dom, int axis, int n,
                               double margin_frac = 0.05);

// Low-discrepancy interior points of a box, offset by the check stream.
std::vector<Eigen::VectorXd> box_samples(const ChartDomain& dom, int n, long stream,
                                         double margin_frac = 0.08);

// Lattice of fibre coordinates, per_axis points per fibre dimension.
std::vector<Eigen::VectorXd> fibre_lattice(const RiemannianSubmersion& rs, int per_axis);

// Central second difference of F along X with one Richardson step; the
// optional gap reports |D(h) - D(2h)|.
double fd_second(const Fn& F, const Eigen::VectorXd& b, const Eigen::VectorXd& X,
                 double h, double* gap = nullptr);

Eigen::VectorXd fd_gradient(const Fn& F, const Eigen::VectorXd& b, double h);
Eigen::MatrixXd fd_hessian(const Fn& F, const Eigen::VectorXd& b, double h);

// Smallest generalized eigenvalue of H v = lambda G v (G positive definite).
double min_gen_eig(const Eigen::MatrixXd& H, const Eigen::MatrixXd& G);
double max_gen_eig(const Eigen::MatrixXd& H, const Eigen::MatrixXd& G);

// Columns of V orthonormalized against the inner product G.
Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G);

// g-orthonormal tangent frame of the fibre over b at fibre coordinate y.
Eigen::MatrixXd fibre_frame(const RiemannianSubmersion& rs, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& y);

// max_y |f(fibre_point(b, y)) - f(fibre_point(b, y_0))|.
double fibre_constancy_defect(const RiemannianSubmersion& rs, const ScalarField& f,
                              const Eigen::VectorXd& b,
                              const std::vector<Eigen::VectorXd>& ys);

// The scenario's test function parsed against the total chart.
ScalarFieldPtr total_field(const CheckContext& c);

// Resolved quadrature grid for fibre integrals (driver default when the
// config gives none: 64 nodes for circle fibres, the 32-node floor per axis
// otherwise).
std::vector<int> quad_grid(const CheckContext& c, int fibre_dim);
// Grid for the variation integrands, which have no 32-node floor.
std::vector<int> variation_grid(const CheckContext& c, int fibre_dim);

// min over sample planes at p of the sectional curvature sign test; returns
// the largest sectional value seen (nonpositive curvature holds iff <= tol).
double max_sectional(const MetricField& g, const std::vector<Eigen::VectorXd>& points,
                     int pairs_per_point, long stream);

// Largest Ricci eigenvalue over the sample points.
double max_ricci_eig(const MetricField& g, const std::vector<Eigen::VectorXd>& points);

CheckRecord make_record(const std::string& name, const std::string& tag, double residual,
                        double tol);
CheckRecord vacuous_record(const std::string& name, const std::string& tag, double tol,
                           const std::string& reason);
CheckRecord hypothesis_record(const std::string& name, const std::string& tag,
                              double defect, double tol, const std::string& reason);

}  // namespace calibra::detail
