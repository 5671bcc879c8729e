#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "calibra/expr.hpp"
#include "calibra/jet.hpp"

namespace calibra {

// A scalar function of n chart coordinates that can report its order-2 jet
// at any point.  Implementations must be pure: same point, same jet.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  virtual Jet jet(const Eigen::VectorXd& x) const = 0;
  virtual double value(const Eigen::VectorXd& x) const { return jet(x).v; }
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return jet(x).g; }
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

class ExprField final : public ScalarField {
 public:
  explicit ExprField(Expression e) : expr_(std::move(e)) {}
  int dim() const override { return expr_.arity(); }
  Jet jet(const Eigen::VectorXd& x) const override { return expr_.jet(x); }
  double value(const Eigen::VectorXd& x) const override { return expr_.value(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    return expr_.gradient(x);
  }
  const Expression& expression() const { return expr_; }

 private:
  Expression expr_;
};

class LambdaField final : public ScalarField {
 public:
  LambdaField(int dim, std::function<Jet(const Eigen::VectorXd&)> fn)
      : dim_(dim), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  Jet jet(const Eigen::VectorXd& x) const override { return fn_(x); }

 private:
  int dim_;
  std::function<Jet(const Eigen::VectorXd&)> fn_;
};

inline ScalarFieldPtr make_field(Expression e) {
  return std::make_shared<ExprField>(std::move(e));
}
inline ScalarFieldPtr make_field(std::string_view text, int dim) {
  return std::make_shared<ExprField>(parse_expression(text, dim));
}
inline ScalarFieldPtr make_field(std::string_view text, std::vector<std::string> vars) {
  return std::make_shared<ExprField>(parse_expression(text, std::move(vars)));
}
inline ScalarFieldPtr constant_field(int dim, double value) {
  return std::make_shared<LambdaField>(
      dim, [dim, value](const Eigen::VectorXd&) { return Jet::constant(dim, value); });
}
inline ScalarFieldPtr lambda_field(int dim, std::function<Jet(const Eigen::VectorXd&)> fn) {
  return std::make_shared<LambdaField>(dim, std::move(fn));
}

// Chain rule through a composition f(phi(x)) where `outer` is the jet of f at
// phi(x) in m variables and `components` the jets of phi^1..phi^m at x.
inline Jet compose_jet(const Jet& outer, const std::vector<Jet>& components) {
  const int k = components.empty() ? 0 : components.front().dim();
  Jet r = Jet::constant(k, outer.v);
  for (int a = 0; a < outer.dim(); ++a) {
    r.g += outer.g(a) * components[a].g;
    r.h += outer.g(a) * components[a].h;
    for (int b = 0; b < outer.dim(); ++b)
      r.h += outer.h(a, b) * (components[a].g * components[b].g.transpose());
  }
  return r;
}

// The pullback field f . phi as a ScalarField over the domain of phi.
ScalarFieldPtr compose_field(ScalarFieldPtr outer, std::vector<ScalarFieldPtr> components);

}  // namespace calibra
