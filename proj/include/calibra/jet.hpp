#pragma once

#include <cmath>
#include <cstdlib>

#include <Eigen/Dense>

#include "calibra/error.hpp"

namespace calibra {

namespace detail {
// Optimized evaluation can round (i,j) and (j,i) of an algebraically
// symmetric update differently by one ulp; mirroring the upper triangle where
// Hessians are created keeps symmetry exact rather than approximate.
inline void mirror_upper(Eigen::MatrixXd& h) {
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = i + 1; j < h.cols(); ++j) h(j, i) = h(i, j);
}
}  // namespace detail

// Order-2 forward-mode jet: value, gradient and Hessian of a scalar quantity
// with respect to n independent variables.  All derivative bookkeeping is done
// by operator overloading, so any arithmetic written against Jet is exact to
// second order (no finite differencing).
//
// The Hessian is bitwise symmetric by construction.
struct Jet {
  double v = 0.0;
  Eigen::VectorXd g;  // size n
  Eigen::MatrixXd h;  // n x n

  Jet() = default;
  Jet(double value, Eigen::VectorXd grad, Eigen::MatrixXd hess)
      : v(value), g(std::move(grad)), h(std::move(hess)) {}

  int dim() const { return static_cast<int>(g.size()); }

  static Jet constant(int n, double value) {
    return Jet(value, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n));
  }

  // The i-th coordinate function evaluated at `value`.
  static Jet variable(int n, int i, double value) {
    Jet j = constant(n, value);
    j.g(i) = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    h = h * o.v + o.h * v + g * o.g.transpose() + o.g * g.transpose();
    detail::mirror_upper(h);
    g = g * o.v + o.g * v;
    v *= o.v;
    return *this;
  }
  Jet& operator+=(double c) {
    v += c;
    return *this;
  }
  Jet& operator-=(double c) {
    v -= c;
    return *this;
  }
  Jet& operator*=(double c) {
    v *= c;
    g *= c;
    h *= c;
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator+(Jet a, double c) { return a += c; }
inline Jet operator+(double c, Jet a) { return a += c; }
inline Jet operator-(Jet a, double c) { return a -= c; }
inline Jet operator*(Jet a, double c) { return a *= c; }
inline Jet operator*(double c, Jet a) { return a *= c; }

inline Jet operator-(const Jet& a) {
  return Jet(-a.v, -a.g, -a.h);
}
inline Jet operator-(double c, const Jet& a) { return -a + c; }

// Composition with a scalar function F: given F(a.v), F'(a.v), F''(a.v),
// apply the chain rule through the stored first and second derivatives.
inline Jet compose(const Jet& a, double f, double df, double ddf) {
  Jet r;
  r.v = f;
  r.g = df * a.g;
  r.h = df * a.h + ddf * (a.g * a.g.transpose());
  detail::mirror_upper(r.h);
  return r;
}

inline Jet inverse(const Jet& a) {
  const double iv = 1.0 / a.v;
  return compose(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }
inline Jet operator/(Jet a, double c) { return a *= (1.0 / c); }
inline Jet operator/(double c, const Jet& b) { return inverse(b) * c; }

inline Jet sin(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return compose(a, s, c, -s);
}
inline Jet cos(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return compose(a, c, -s, -c);
}
inline Jet tan(const Jet& a) {
  const double t = std::tan(a.v), sec2 = 1.0 + t * t;
  return compose(a, t, sec2, 2.0 * t * sec2);
}
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return compose(a, e, e, e);
}
inline Jet log(const Jet& a) {
  const double iv = 1.0 / a.v;
  return compose(a, std::log(a.v), iv, -iv * iv);
}
inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return compose(a, s, 0.5 / s, -0.25 / (s * s * s));
}
inline Jet sinh(const Jet& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return compose(a, s, c, s);
}
inline Jet cosh(const Jet& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return compose(a, c, s, c);
}
inline Jet abs(const Jet& a) {
  // Not differentiable at 0; we take the one-sided derivative from the sign
  // of the value, which is what the fibre-average oracle needs.
  return a.v < 0.0 ? -a : a;
}

// Integer powers use repeated multiplication so that negative and zero bases
// stay exact; fractional exponents go through exp/log and require a positive
// base, as in the scalar case.
inline Jet pow(const Jet& a, double p) {
  const double rp = std::round(p);
  if (rp == p && std::abs(p) < 64.0) {
    const int n = static_cast<int>(rp);
    if (n == 0) return Jet::constant(a.dim(), 1.0);
    Jet base = n < 0 ? inverse(a) : a;
    Jet acc = base;
    for (int k = 1; k < std::abs(n); ++k) acc *= base;
    return acc;
  }
  const double f = std::pow(a.v, p);
  const double df = p * std::pow(a.v, p - 1.0);
  const double ddf = p * (p - 1.0) * std::pow(a.v, p - 2.0);
  return compose(a, f, df, ddf);
}

inline Jet pow(const Jet& a, const Jet& b) {
  if (b.g.isZero(0.0) && b.h.isZero(0.0)) return pow(a, b.v);
  return exp(b * log(a));
}

}  // namespace calibra
