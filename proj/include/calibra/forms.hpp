#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "calibra/scalar_field.hpp"

namespace calibra {

long binomial(int n, int k);

// Strictly increasing k-tuples from {0..n-1} in lexicographic order; a
// tuple's rank is its position in that order.
const std::vector<std::vector<int>>& increasing_tuples(int n, int k);
int tuple_rank(int n, int k, const int* idx);

// In-place sort returning the permutation sign, or 0 if an index repeats.
int sort_sign(std::vector<int>& idx);

// Alternating k-form on R^n with constant coefficients stored over the
// increasing-tuple table.
class AlternatingForm {
 public:
  AlternatingForm() = default;
  AlternatingForm(int n, int degree);

  int dim() const { return n_; }
  int degree() const { return k_; }
  int table_size() const { return static_cast<int>(c_.size()); }

  double& operator[](int rank) { return c_[rank]; }
  double operator[](int rank) const { return c_[rank]; }
  const std::vector<int>& tuple(int rank) const;

  // Signed component lookup for an arbitrary index tuple.
  double component(std::vector<int> idx) const;
  void set_component(std::vector<int> idx, double value);
  void add_component(std::vector<int> idx, double value);

  // Evaluate on the k columns of V (an n x k matrix).
  double operator()(const Eigen::MatrixXd& V) const;

  AlternatingForm wedge(const AlternatingForm& o) const;
  AlternatingForm interior(const Eigen::VectorXd& u) const;

  AlternatingForm& operator+=(const AlternatingForm& o);
  AlternatingForm& operator-=(const AlternatingForm& o);
  AlternatingForm& operator*=(double s);
  double max_abs() const;

 private:
  int n_ = 0, k_ = 0;
  std::vector<double> c_;
};

inline AlternatingForm operator+(AlternatingForm a, const AlternatingForm& b) { return a += b; }
inline AlternatingForm operator-(AlternatingForm a, const AlternatingForm& b) { return a -= b; }
inline AlternatingForm operator*(AlternatingForm a, double s) { return a *= s; }
inline AlternatingForm operator*(double s, AlternatingForm a) { return a *= s; }

// k-form whose coefficients are scalar fields of the chart coordinates.
class FormField {
 public:
  FormField() = default;
  FormField(int n, int degree);
  static FormField constant(const AlternatingForm& a);

  int dim() const { return n_; }
  int degree() const { return k_; }

  void set(std::vector<int> idx, ScalarFieldPtr f);

  AlternatingForm at(const Eigen::VectorXd& p) const;
  // Exact exterior derivative from the coefficient jets.
  AlternatingForm exterior_derivative_at(const Eigen::VectorXd& p) const;

 private:
  int n_ = 0, k_ = 0;
  std::vector<ScalarFieldPtr> c_;
};

// Central-difference exterior derivative for forms only available through
// pointwise evaluation.
AlternatingForm exterior_derivative_fd(
    const std::function<AlternatingForm(const Eigen::VectorXd&)>& field,
    const Eigen::VectorXd& p, double h);

// Oriented tangent plane: base point plus an n x k matrix of frame columns,
// orthonormal with respect to the ambient metric.
struct Plane {
  Eigen::VectorXd base;
  Eigen::MatrixXd frame;
  int dim() const { return static_cast<int>(frame.cols()); }
};

// alpha evaluated on the oriented orthonormal frame; equals 1 exactly on
// calibrated planes.
double restrict_form(const AlternatingForm& a, const Plane& pl);
bool is_calibrated(const AlternatingForm& a, const Plane& pl, double tol);

}  // namespace calibra
