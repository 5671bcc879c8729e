#pragma once

#include <Eigen/Dense>

#include "calibra/forms.hpp"
#include "calibra/metric.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra {

// Two Kahler models cover every check in scope: flat C^n with the standard
// constant complex structure (coordinates interleaved x1,y1,...,xn,yn), and
// an arbitrary oriented 2-real-dimensional metric where J is rotation by +90
// degrees in the oriented orthonormal frame.
class KahlerStructure {
 public:
  static KahlerStructure flat_cn(int ncomplex, ChartDomain domain);
  static KahlerStructure flat_cn(int ncomplex);
  static KahlerStructure surface(MetricField g);

  const MetricField& metric() const { return g_; }
  int dim() const { return g_.dim(); }
  bool flat_model() const { return flat_; }
  int complex_dim() const { return dim() / 2; }

  Eigen::MatrixXd complex_structure(const Eigen::VectorXd& p) const;
  // omega(X, Y) = g(JX, Y) assembled at p.
  AlternatingForm kahler_form_at(const Eigen::VectorXd& p) const;

 private:
  KahlerStructure(MetricField g, bool flat) : g_(std::move(g)), flat_(flat) {}
  MetricField g_;
  bool flat_;
};

// Hess(f)(X,X) + Hess(f)(JX,JX): the Levi form of f along the complex line
// spanned by X.
double levi_form(const KahlerStructure& k, const ScalarField& f,
                 const Eigen::VectorXd& p, const Eigen::VectorXd& X);

// Max coefficient of the finite-difference exterior derivative of omega at p
// (diagnostic; identically zero for both supported models).
double kahler_closedness_residual(const KahlerStructure& k, const Eigen::VectorXd& p,
                                  double h = 1e-4);

}  // namespace calibra
