#pragma once

// Shared fixtures for the test suite: a catalog of scalar fields with safe
// sampling boxes and the standard chart metrics exercised throughout.

#include <random>
#include <string>
#include <vector>

#include "calibra/chart.hpp"
#include "calibra/metric.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra_tests {

struct CatalogField {
  std::string name;
  std::string expr;
  int dim;
  double lo, hi;  // per-coordinate sampling interval
};

inline const std::vector<CatalogField>& field_catalog() {
  static const std::vector<CatalogField> cat = {
      {"poly2", "x^2 + sin(y)", 2, -2.0, 2.0},
      {"expcos", "exp(x)*cos(y)", 2, -2.0, 2.0},
      {"logr", "log(sqrt(x^2 + y^2))", 2, 0.8, 2.5},
      {"xyz", "x*y*z", 3, -2.0, 2.0},
      {"sqrt1", "sqrt(x^2 + y^2 + 1)", 2, -3.0, 3.0},
      {"coshsinh", "cosh(x)*sinh(y)", 2, -1.5, 1.5},
      {"rational", "1/(1 + x^2 + y^2)", 2, -2.0, 2.0},
      {"quartic", "x1*x2 + x3*x4 - x1^3", 4, -2.0, 2.0},
      {"wave3", "sin(x)*cos(y)*exp(z/2)", 3, -2.0, 2.0},
      {"powvar", "x^y", 2, 0.5, 2.0},
      {"mixed", "(x + y)^3/(2 + cos(x))", 2, -1.5, 1.5},
      {"tanq", "tan(x/4)*cosh(y/2)", 2, -2.0, 2.0},
  };
  return cat;
}

inline Eigen::VectorXd sample_point(const CatalogField& f, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(f.lo, f.hi);
  Eigen::VectorXd x(f.dim);
  for (int i = 0; i < f.dim; ++i) x(i) = dist(rng);
  return x;
}

// dr^2 + r^2 dtheta^2 on r in (0, 10], theta periodic.
inline calibra::MetricField polar_metric() {
  auto dom = calibra::ChartDomain::box({0.05, 0.0}, {10.0, 2.0 * M_PI});
  dom.set_periodic(1);
  return calibra::MetricField::diagonal(dom, {"1", "r^2"});
}

// dtheta^2 + sin(theta)^2 dphi^2 on theta in (0, pi), phi periodic.  Note the
// polar angle is the FIRST coordinate here, so the entry says x1 (the alias
// `theta` names the second coordinate by the polar-chart convention).
inline calibra::MetricField sphere_metric() {
  auto dom = calibra::ChartDomain::box({0.05, 0.0}, {M_PI - 0.05, 2.0 * M_PI});
  dom.set_periodic(1);
  return calibra::MetricField::diagonal(dom, {"1", "sin(x1)^2"});
}

// (dx^2 + dy^2)/y^2 on the upper half plane.  The roof is high enough for a
// vertical unit-speed geodesic to run for time 10 (y = e^t).
inline calibra::MetricField hyperbolic_metric() {
  auto dom = calibra::ChartDomain::box({-10.0, 0.05}, {10.0, 3.0e4});
  return calibra::MetricField::diagonal(dom, {"1/y^2", "1/y^2"});
}

// cosh(u)^2 (du^2 + dphi^2): the catenoid in conformal coordinates.
inline calibra::MetricField catenoid_metric() {
  auto dom = calibra::ChartDomain::box({-1.5, 0.0}, {1.5, 2.0 * M_PI});
  dom.set_periodic(1);
  return calibra::MetricField::diagonal(dom, {"cosh(x1)^2", "cosh(x1)^2"});
}

struct CatalogMetric {
  std::string name;
  calibra::MetricField metric;
  Eigen::VectorXd lo, hi;  // interior sampling box
};

inline std::vector<CatalogMetric> metric_catalog() {
  std::vector<CatalogMetric> cat;
  {
    Eigen::VectorXd lo(2), hi(2);
    lo << -5.0, -5.0;
    hi << 5.0, 5.0;
    cat.push_back({"flat2", calibra::MetricField::euclidean(2), lo, hi});
  }
  {
    Eigen::VectorXd lo(2), hi(2);
    lo << 0.5, 0.0;
    hi << 5.0, 2.0 * M_PI;
    cat.push_back({"polar", polar_metric(), lo, hi});
  }
  {
    Eigen::VectorXd lo(2), hi(2);
    lo << 0.4, 0.0;
    hi << M_PI - 0.4, 2.0 * M_PI;
    cat.push_back({"sphere", sphere_metric(), lo, hi});
  }
  {
    Eigen::VectorXd lo(2), hi(2);
    lo << -3.0, 0.5;
    hi << 3.0, 5.0;
    cat.push_back({"hyperbolic", hyperbolic_metric(), lo, hi});
  }
  {
    Eigen::VectorXd lo(2), hi(2);
    lo << -1.0, 0.0;
    hi << 1.0, 2.0 * M_PI;
    cat.push_back({"catenoid", catenoid_metric(), lo, hi});
  }
  return cat;
}

inline Eigen::VectorXd sample_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                  std::mt19937& rng) {
  Eigen::VectorXd x(lo.size());
  for (int i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> dist(lo(i), hi(i));
    x(i) = dist(rng);
  }
  return x;
}

}  // namespace calibra_tests
