#include "calibra/metric.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "calibra/error.hpp"

namespace calibra {

MetricField::MetricField(ChartDomain domain, std::vector<std::vector<ScalarFieldPtr>> entries)
    : domain_(std::move(domain)), entries_(std::move(entries)) {
  const int n = domain_.dim();
  if (static_cast<int>(entries_.size()) != n)
    throw Error("metric entry table has wrong row count");
  for (const auto& row : entries_) {
    if (static_cast<int>(row.size()) != n)
      throw Error("metric entry table has wrong column count");
    for (const auto& f : row) {
      if (!f || f->dim() != n) throw Error("metric entry has wrong arity");
    }
  }
}

MetricField MetricField::euclidean(int n, ChartDomain domain) {
  std::vector<std::vector<ScalarFieldPtr>> e(n, std::vector<ScalarFieldPtr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e[i][j] = constant_field(n, i == j ? 1.0 : 0.0);
  return MetricField(std::move(domain), std::move(e));
}

MetricField MetricField::from_expressions(ChartDomain domain,
                                          const std::vector<std::vector<std::string>>& entries) {
  const int n = domain.dim();
  std::vector<std::vector<ScalarFieldPtr>> e(n, std::vector<ScalarFieldPtr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e[i][j] = make_field(entries[i][j], n);
  return MetricField(std::move(domain), std::move(e));
}

MetricField MetricField::diagonal(ChartDomain domain, const std::vector<std::string>& entries) {
  const int n = domain.dim();
  std::vector<std::vector<ScalarFieldPtr>> e(n, std::vector<ScalarFieldPtr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      e[i][j] = i == j ? make_field(entries[i], n) : constant_field(n, 0.0);
  return MetricField(std::move(domain), std::move(e));
}

void MetricField::check_point(const Eigen::VectorXd& p) const {
  if (p.size() != domain_.dim())
    throw Error("point dimension does not match chart dimension");
  if (!domain_.contains(p))
    throw ChartBoundaryError("point outside chart domain", p);
}

Eigen::MatrixXd MetricField::at(const Eigen::VectorXd& p_in) const {
  const Eigen::VectorXd p = domain_.wrap(p_in);
  check_point(p);
  const int n = dim();
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double gij = entries_[i][j]->value(p);
      if (i != j) {
        const double gji = entries_[j][i]->value(p);
        if (std::abs(gij - gji) > 1e-12 * (1.0 + std::abs(gij)))
          throw Error("metric entries not symmetric at the evaluated point");
      }
      G(i, j) = G(j, i) = gij;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw DegenerateMetricError("metric not positive definite", p);
  return G;
}

Eigen::MatrixXd MetricField::inverse_at(const Eigen::VectorXd& p) const {
  const Eigen::MatrixXd G = at(p);
  return G.llt().solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

double MetricField::sqrt_det(const Eigen::VectorXd& p) const {
  return std::sqrt(at(p).determinant());
}

double MetricField::norm(const Eigen::VectorXd& p, const Eigen::VectorXd& u) const {
  return std::sqrt(inner(p, u, u));
}

MetricJet MetricField::jet(const Eigen::VectorXd& p_in) const {
  const Eigen::VectorXd p = domain_.wrap(p_in);
  check_point(p);
  const int n = dim();
  MetricJet mj;
  mj.G.resize(n, n);
  mj.dG.assign(n, Eigen::MatrixXd::Zero(n, n));
  mj.d2G.assign(static_cast<size_t>(n) * n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet jij = entries_[i][j]->jet(p);
      mj.G(i, j) = mj.G(j, i) = jij.v;
      for (int k = 0; k < n; ++k) {
        mj.dG[k](i, j) = mj.dG[k](j, i) = jij.g(k);
        for (int l = 0; l < n; ++l) {
          mj.d2G[static_cast<size_t>(k) * n + l](i, j) = jij.h(k, l);
          mj.d2G[static_cast<size_t>(k) * n + l](j, i) = jij.h(k, l);
        }
      }
    }
  Eigen::LLT<Eigen::MatrixXd> llt(mj.G);
  if (llt.info() != Eigen::Success)
    throw DegenerateMetricError("metric not positive definite", p);
  return mj;
}

}  // namespace calibra
