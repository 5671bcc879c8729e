#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "calibra/chart.hpp"
#include "calibra/metric.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra {

// Pointwise extrinsic geometry of an immersed submanifold.  The second
// fundamental form value II(i,j) and the mean curvature are ambient
// coordinate vectors at the image point.
struct SubmanifoldGeometry {
  Eigen::MatrixXd induced;                            // k x k induced metric
  std::vector<std::vector<Eigen::VectorXd>> second;   // II(i,j), normal-valued
  Eigen::VectorXd mean_curvature;                     // trace of II wrt induced
};

// A map phi: parameter box (dim k) -> ambient chart (dim n) given by n
// component scalar fields, carrying the ambient metric along.  All geometry
// below needs phi only to order 2, which the jets provide.
class ImmersedSubmanifold {
 public:
  ImmersedSubmanifold(MetricField ambient, ChartDomain parameter_domain,
                      std::vector<ScalarFieldPtr> components);

  // Components parsed against variable names u1..uk.
  static ImmersedSubmanifold from_expressions(MetricField ambient,
                                              ChartDomain parameter_domain,
                                              const std::vector<std::string>& components);

  int dim() const { return params_.dim(); }
  int ambient_dim() const { return ambient_.dim(); }
  const MetricField& ambient() const { return ambient_; }
  const ChartDomain& parameter_domain() const { return params_; }
  const std::vector<ScalarFieldPtr>& components() const { return comps_; }

  Eigen::VectorXd point(const Eigen::VectorXd& u) const;
  // n x k Jacobian d phi; throws RankDeficientError below rank k.
  Eigen::MatrixXd differential(const Eigen::VectorXd& u) const;

  SubmanifoldGeometry geometry(const Eigen::VectorXd& u) const;

  // f . phi over the parameter box.
  ScalarFieldPtr pullback(const ScalarFieldPtr& f) const;

  // (intrinsic Laplacian of f|_Sigma, tangential trace of the ambient
  // Hessian); the two agree exactly when the submanifold is minimal.
  std::pair<double, double> restricted_laplacian(const ScalarField& f,
                                                 const Eigen::VectorXd& u) const;

 private:
  MetricField ambient_;
  ChartDomain params_;
  std::vector<ScalarFieldPtr> comps_;
};

}  // namespace calibra
