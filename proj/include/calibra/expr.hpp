#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "calibra/jet.hpp"

namespace calibra {

// Parsed scalar expression over a fixed list of named variables.  Immutable
// after parsing; nodes are shared so copies are cheap.
class Expression {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  enum class Kind { Number, Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

  struct Node {
    Kind kind;
    double number = 0.0;      // Number / Constant payload
    int var_index = -1;       // Variable payload
    std::string name;         // Constant ("pi","e"), Call function name
    NodePtr a, b;             // operands (a only for Neg/Call)
  };

  Expression() = default;

  int arity() const { return static_cast<int>(vars_.size()); }
  const std::vector<std::string>& variables() const { return vars_; }
  bool empty() const { return root_ == nullptr; }

  double value(const Eigen::VectorXd& x) const;
  Jet jet(const Eigen::VectorXd& x) const;
  // First-order forward pass; same result as jet(x).g without the Hessian work.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  // Canonical text form; reparsing it gives a structurally identical tree.
  std::string str() const;

  bool same_structure(const Expression& other) const;

  const NodePtr& root() const { return root_; }

  // Builders for programmatic construction (used by chart plumbing).
  static Expression number(double value, std::vector<std::string> vars);
  static Expression variable(int index, std::vector<std::string> vars);

 private:
  friend Expression parse_expression(std::string_view, std::vector<std::string>);
  friend Expression parse_expression(std::string_view, int);
  NodePtr root_;
  std::vector<std::string> vars_;
};

// Parse against an explicit variable list; names must match exactly and the
// position in the list is the evaluation index.
Expression parse_expression(std::string_view text, std::vector<std::string> variables);

// Parse against default names x1..xdim.  The usual aliases x,y,z -> x1,x2,x3
// and r,theta -> x1,x2 are accepted where dim allows.
Expression parse_expression(std::string_view text, int dim);

// Canonical double-to-text with round-trip fidelity (shortest of 15/16/17
// significant digits that parses back to the same bits).
std::string format_double(double v);

}  // namespace calibra
