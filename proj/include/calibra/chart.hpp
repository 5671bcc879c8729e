#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace calibra {

// Rectangular coordinate box for a single chart.  Dimensions flagged periodic
// identify lo with hi (so an angle coordinate is [0, 2pi) with period 2pi);
// containment is only enforced on the non-periodic dimensions.
struct ChartDomain {
  Eigen::VectorXd lo, hi;
  std::vector<bool> periodic;

  ChartDomain() = default;
  ChartDomain(Eigen::VectorXd lo_, Eigen::VectorXd hi_)
      : lo(std::move(lo_)), hi(std::move(hi_)), periodic(lo.size(), false) {}

  int dim() const { return static_cast<int>(lo.size()); }
  double width(int i) const { return hi(i) - lo(i); }

  static ChartDomain box(std::initializer_list<double> lo_,
                         std::initializer_list<double> hi_) {
    Eigen::VectorXd l(lo_.size()), h(hi_.size());
    int i = 0;
    for (double v : lo_) l(i++) = v;
    i = 0;
    for (double v : hi_) h(i++) = v;
    return ChartDomain(std::move(l), std::move(h));
  }

  // Cube [-half, half]^n.
  static ChartDomain cube(int n, double half) {
    return ChartDomain(Eigen::VectorXd::Constant(n, -half),
                       Eigen::VectorXd::Constant(n, half));
  }

  ChartDomain& set_periodic(int i) {
    periodic[i] = true;
    return *this;
  }

  bool contains(const Eigen::VectorXd& x, double margin = 0.0) const {
    for (int i = 0; i < dim(); ++i) {
      if (periodic[i]) continue;
      if (x(i) < lo(i) + margin || x(i) > hi(i) - margin) return false;
    }
    return true;
  }

  // Reduce periodic coordinates into [lo, hi); other coordinates untouched.
  Eigen::VectorXd wrap(Eigen::VectorXd x) const {
    for (int i = 0; i < dim(); ++i) {
      if (!periodic[i]) continue;
      const double w = width(i);
      double t = std::fmod(x(i) - lo(i), w);
      if (t < 0.0) t += w;
      x(i) = lo(i) + t;
    }
    return x;
  }
};

}  // namespace calibra
