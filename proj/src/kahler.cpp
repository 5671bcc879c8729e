#include "calibra/kahler.hpp"

#include <cmath>

#include "calibra/error.hpp"
#include "calibra/geometry.hpp"

namespace calibra {

KahlerStructure KahlerStructure::flat_cn(int ncomplex, ChartDomain domain) {
  if (domain.dim() != 2 * ncomplex)
    throw Error("flat C^n needs a chart of dimension 2n");
  return KahlerStructure(MetricField::euclidean(2 * ncomplex, std::move(domain)), true);
}

KahlerStructure KahlerStructure::flat_cn(int ncomplex) {
  return flat_cn(ncomplex, ChartDomain::cube(2 * ncomplex, 10.0));
}

KahlerStructure KahlerStructure::surface(MetricField g) {
  if (g.dim() != 2)
    throw Error("the rotation complex structure needs a 2-dimensional metric");
  return KahlerStructure(std::move(g), false);
}

Eigen::MatrixXd KahlerStructure::complex_structure(const Eigen::VectorXd& p) const {
  const int n = dim();
  if (flat_) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; j += 2) {
      J(j + 1, j) = 1.0;   // J d/dx = d/dy
      J(j, j + 1) = -1.0;  // J d/dy = -d/dx
    }
    return J;
  }
  const Eigen::MatrixXd G = g_.at(p);
  const Eigen::MatrixXd E = orthonormal_frame(G);
  Eigen::MatrixXd R(2, 2);
  R << 0.0, -1.0, 1.0, 0.0;
  return E * R * E.inverse();
}

AlternatingForm KahlerStructure::kahler_form_at(const Eigen::VectorXd& p) const {
  const int n = dim();
  const Eigen::MatrixXd J = complex_structure(p);
  const Eigen::MatrixXd G = g_.at(p);
  const Eigen::MatrixXd Om = J.transpose() * G;  // omega(e_i, e_j) = (J e_i)^T G e_j
  AlternatingForm w(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w.set_component({i, j}, Om(i, j));
  return w;
}

double levi_form(const KahlerStructure& k, const ScalarField& f,
                 const Eigen::VectorXd& p, const Eigen::VectorXd& X) {
  const Eigen::MatrixXd H = hessian(k.metric(), f, p);
  const Eigen::VectorXd JX = k.complex_structure(p) * X;
  return X.dot(H * X) + JX.dot(H * JX);
}

double kahler_closedness_residual(const KahlerStructure& k, const Eigen::VectorXd& p,
                                  double h) {
  const AlternatingForm dw = exterior_derivative_fd(
      [&k](const Eigen::VectorXd& q) { return k.kahler_form_at(q); }, p, h);
  return dw.max_abs();
}

}  // namespace calibra
