#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calibra/chart.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra {

// Value and first/second coordinate derivatives of the metric matrix at one
// point.  dG[k](i,j) = d_k g_ij and d2(k,l)(i,j) = d_k d_l g_ij.
struct MetricJet {
  Eigen::MatrixXd G;
  std::vector<Eigen::MatrixXd> dG;
  std::vector<Eigen::MatrixXd> d2G;  // row-major over (k,l)

  const Eigen::MatrixXd& d2(int k, int l) const {
    return d2G[static_cast<size_t>(k) * dG.size() + l];
  }
};

// Riemannian metric in a single chart, entries given as scalar fields of the
// chart coordinates.  Evaluation checks symmetry, positive definiteness and
// chart containment; failures raise the dedicated error types.
class MetricField {
 public:
  MetricField(ChartDomain domain, std::vector<std::vector<ScalarFieldPtr>> entries);

  static MetricField euclidean(int n, ChartDomain domain);
  static MetricField euclidean(int n) { return euclidean(n, ChartDomain::cube(n, 10.0)); }
  // Entries parsed against x1..xn (with the usual aliases).
  static MetricField from_expressions(ChartDomain domain,
                                      const std::vector<std::vector<std::string>>& entries);
  // Diagonal metric from n expressions.
  static MetricField diagonal(ChartDomain domain, const std::vector<std::string>& entries);

  int dim() const { return domain_.dim(); }
  const ChartDomain& domain() const { return domain_; }
  const ScalarFieldPtr& entry(int i, int j) const { return entries_[i][j]; }

  // Metric matrix at p (wrapped into the chart), positive definite or throws.
  Eigen::MatrixXd at(const Eigen::VectorXd& p) const;
  Eigen::MatrixXd inverse_at(const Eigen::VectorXd& p) const;
  double sqrt_det(const Eigen::VectorXd& p) const;
  MetricJet jet(const Eigen::VectorXd& p) const;

  double inner(const Eigen::VectorXd& p, const Eigen::VectorXd& u,
               const Eigen::VectorXd& v) const {
    return u.dot(at(p) * v);
  }
  double norm(const Eigen::VectorXd& p, const Eigen::VectorXd& u) const;

 private:
  void check_point(const Eigen::VectorXd& p) const;
  ChartDomain domain_;
  std::vector<std::vector<ScalarFieldPtr>> entries_;
};

}  // namespace calibra
