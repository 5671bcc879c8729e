#pragma once

#include <vector>

#include <Eigen/Dense>

#include "calibra/metric.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra {

// Christoffel symbols at a point: gamma[k](i,j) = Gamma^k_ij.
using Christoffel = std::vector<Eigen::MatrixXd>;

// Dense rank-4 tensor with uniform dimension n per slot.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), a_(static_cast<size_t>(n) * n * n * n, 0.0) {}
  int n() const { return n_; }
  double& operator()(int i, int j, int k, int l) {
    return a_[((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return a_[((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l];
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

Christoffel christoffel(const MetricJet& mj);
Christoffel christoffel(const MetricField& g, const Eigen::VectorXd& p);

// Hess(f)(e_i,e_j) = coordinate Hessian minus Gamma^k_ij d_k f.
Eigen::MatrixXd hessian(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p);

// Metric gradient with upper index: (grad f)^i = g^{ij} d_j f.
Eigen::VectorXd gradient(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p);

// Delta f = g^{ij} Hess(f)_ij.
double laplacian(const MetricField& g, const ScalarField& f, const Eigen::VectorXd& p);

struct CurvatureOptions {
  // With exact third derivatives, dGamma comes from the algebraic formula in
  // terms of metric first and second derivatives (no extra differentiation
  // order is needed).  The finite-difference fallback recomputes Gamma at
  // p +- h e_m with h = fd_step * chart width in coordinate m.
  bool exact_third_derivatives = true;
  double fd_step = 1e-4;
};

struct CurvaturePack {
  Christoffel gamma;
  // riemann(i,j,k,l): l-component of R(e_i,e_j)e_k where
  // R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
  Tensor4 riemann;
  Eigen::MatrixXd ricci;   // Ric_jk = riemann(i,j,k,i) summed over i
  double scalar = 0.0;     // g^{jk} Ric_jk
};

CurvaturePack curvature(const MetricField& g, const Eigen::VectorXd& p,
                        const CurvatureOptions& opt = {});

// Fully lowered tensor R(X,Y,Z,W) = <R(X,Y)Z, W>.
double riemann_apply(const CurvaturePack& cp, const Eigen::MatrixXd& G,
                     const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                     const Eigen::VectorXd& Z, const Eigen::VectorXd& W);

// Sectional curvature of span{X, Y}.
double sectional_curvature(const CurvaturePack& cp, const Eigen::MatrixXd& G,
                           const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

struct GeodesicResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> points;      // periodic coordinates unwrapped
  std::vector<Eigen::VectorXd> velocities;
  double max_speed_drift = 0.0;             // max_t |speed(t)/speed(0) - 1|
};

// Classical fourth-order one-step integration of the geodesic equation with a
// fixed step; aborts with LeftChartError if the trajectory exits the chart.
GeodesicResult geodesic(const MetricField& g, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& v, double time, int steps);

// Gram-Schmidt on the coordinate frame in index order; columns form a
// g-orthonormal frame at p.
Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& G);

}  // namespace calibra
