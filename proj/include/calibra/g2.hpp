#pragma once

#include <optional>

#include <Eigen/Dense>

#include "calibra/forms.hpp"
#include "calibra/scalar_field.hpp"

namespace calibra {

// Flat G2 model on R^7 (or T^7): the standard 3-form phi written in index
// shorthand as 123 + 1(45+67) + 2(46-57) - 3(47+56), its degree-4 dual
// psi = 4567 + 23(45+67) - 13(46-57) - 12(47+56), Euclidean metric.  The
// optional torsion 2-form defaults to zero.
struct G2Structure {
  AlternatingForm phi;
  AlternatingForm psi;
  std::optional<FormField> tau2;

  static G2Structure standard();
};

// w defined by <w, x> = phi(u, v, x); for orthonormal u, v the span of
// {u, v, w} is an associative (phi-calibrated) 3-plane.
Eigen::VectorXd g2_cross(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         const G2Structure& g2);

// A 4-plane is coassociative iff phi vanishes on every triple of frame
// vectors.
bool coassociative_test(const Plane& pl, const G2Structure& g2, double tol);
double coassociative_residual(const Plane& pl, const G2Structure& g2);

// 3-form representing f through phi in the flat model: d(grad f  interior
// phi); for constant phi the second covariant term is identically zero.  Its
// restriction to any associative plane equals the trace of Hess(f) over that
// plane.
AlternatingForm hphi_form(const G2Structure& g2, const ScalarField& f,
                          const Eigen::VectorXd& p);

}  // namespace calibra
