#include "calibra/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "calibra/error.hpp"

namespace calibra {

namespace {

struct Token {
  enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Type type;
  double number = 0.0;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    tok_.line = line_;
    tok_.column = col_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::Type::End;
      tok_.text = "<end of input>";
      return;
    }
    const char c = src_[pos_];
    auto single = [&](Token::Type t) {
      tok_.type = t;
      tok_.text = std::string(1, c);
      ++pos_;
      ++col_;
    };
    switch (c) {
      case '+': single(Token::Type::Plus); return;
      case '-': single(Token::Type::Minus); return;
      case '*': single(Token::Type::Star); return;
      case '/': single(Token::Type::Slash); return;
      case '^': single(Token::Type::Caret); return;
      case '(': single(Token::Type::LParen); return;
      case ')': single(Token::Type::RParen); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
        ++col_;
      }
      tok_.type = Token::Type::Ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void lex_number() {
    size_t start = pos_;
    bool saw_digit = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
      saw_digit = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        saw_digit = true;
      }
    }
    if (!saw_digit) throw ParseError("malformed number", line_, col_);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // bare 'e' after a number belongs to the next token
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    tok_.type = Token::Type::Number;
    tok_.number = std::strtod(text.c_str(), nullptr);
    tok_.text = text;
    col_ += static_cast<int>(pos_ - start);
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

const char* kFunctions[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "cosh", "sinh"};

bool is_function(const std::string& name) {
  for (const char* f : kFunctions)
    if (name == f) return true;
  return false;
}

using NodePtr = Expression::NodePtr;
using Kind = Expression::Kind;

NodePtr make_node(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars,
         const std::map<std::string, int>& aliases)
      : lex_(src), vars_(vars), aliases_(aliases) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    const Token& t = lex_.peek();
    if (t.type != Token::Type::End)
      throw ParseError("unexpected '" + t.text + "'", t.line, t.column);
    return e;
  }

 private:
  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (true) {
      const Token& t = lex_.peek();
      if (t.type == Token::Type::Plus) {
        lex_.take();
        lhs = make_node(Kind::Add, lhs, parse_term());
      } else if (t.type == Token::Type::Minus) {
        lex_.take();
        lhs = make_node(Kind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (true) {
      const Token& t = lex_.peek();
      if (t.type == Token::Type::Star) {
        lex_.take();
        lhs = make_node(Kind::Mul, lhs, parse_factor());
      } else if (t.type == Token::Type::Slash) {
        lex_.take();
        lhs = make_node(Kind::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_factor() {
    if (lex_.peek().type == Token::Type::Minus) {
      lex_.take();
      return make_node(Kind::Neg, parse_power());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (lex_.peek().type == Token::Type::Caret) {
      lex_.take();
      return make_node(Kind::Pow, base, parse_factor());
    }
    return base;
  }

  NodePtr parse_atom() {
    Token t = lex_.take();
    switch (t.type) {
      case Token::Type::Number: {
        NodePtr n = make_node(Kind::Number);
        const_cast<Expression::Node&>(*n).number = t.number;
        return n;
      }
      case Token::Type::LParen: {
        NodePtr e = parse_expr();
        expect_rparen(t);
        return e;
      }
      case Token::Type::Ident:
        return parse_ident(t);
      default:
        throw ParseError("expected a number, identifier or '(' but found '" + t.text + "'",
                         t.line, t.column);
    }
  }

  NodePtr parse_ident(const Token& t) {
    if (lex_.peek().type == Token::Type::LParen) {
      if (!is_function(t.text))
        throw ParseError("unknown function '" + t.text + "'", t.line, t.column);
      Token open = lex_.take();
      NodePtr arg = parse_expr();
      expect_rparen(open);
      NodePtr n = make_node(Kind::Call, arg);
      const_cast<Expression::Node&>(*n).name = t.text;
      return n;
    }
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == t.text) {
        NodePtr n = make_node(Kind::Variable);
        const_cast<Expression::Node&>(*n).var_index = static_cast<int>(i);
        return n;
      }
    }
    if (auto it = aliases_.find(t.text); it != aliases_.end()) {
      NodePtr n = make_node(Kind::Variable);
      const_cast<Expression::Node&>(*n).var_index = it->second;
      return n;
    }
    if (t.text == "pi" || t.text == "e") {
      NodePtr n = make_node(Kind::Constant);
      auto& m = const_cast<Expression::Node&>(*n);
      m.name = t.text;
      m.number = t.text == "pi" ? M_PI : M_E;
      return n;
    }
    throw ParseError("unknown identifier '" + t.text + "'", t.line, t.column);
  }

  void expect_rparen(const Token& open) {
    const Token& t = lex_.peek();
    if (t.type != Token::Type::RParen)
      throw ParseError("expected ')' to match '(' at line " + std::to_string(open.line) +
                           ", column " + std::to_string(open.column) +
                           " but found '" + t.text + "'",
                       t.line, t.column);
    lex_.take();
  }

  Lexer lex_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, int>& aliases_;
};

double eval_value(const Expression::Node& n, const Eigen::VectorXd& x) {
  switch (n.kind) {
    case Kind::Number:
    case Kind::Constant: return n.number;
    case Kind::Variable: return x(n.var_index);
    case Kind::Neg: return -eval_value(*n.a, x);
    case Kind::Add: return eval_value(*n.a, x) + eval_value(*n.b, x);
    case Kind::Sub: return eval_value(*n.a, x) - eval_value(*n.b, x);
    case Kind::Mul: return eval_value(*n.a, x) * eval_value(*n.b, x);
    case Kind::Div: return eval_value(*n.a, x) / eval_value(*n.b, x);
    case Kind::Pow: return std::pow(eval_value(*n.a, x), eval_value(*n.b, x));
    case Kind::Call: {
      const double a = eval_value(*n.a, x);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "tan") return std::tan(a);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "log") return std::log(a);
      if (n.name == "sqrt") return std::sqrt(a);
      if (n.name == "cosh") return std::cosh(a);
      if (n.name == "sinh") return std::sinh(a);
      break;
    }
  }
  throw Error("corrupt expression node");
}

Jet eval_jet(const Expression::Node& n, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  switch (n.kind) {
    case Kind::Number:
    case Kind::Constant: return Jet::constant(d, n.number);
    case Kind::Variable: return Jet::variable(d, n.var_index, x(n.var_index));
    case Kind::Neg: return -eval_jet(*n.a, x);
    case Kind::Add: return eval_jet(*n.a, x) + eval_jet(*n.b, x);
    case Kind::Sub: return eval_jet(*n.a, x) - eval_jet(*n.b, x);
    case Kind::Mul: return eval_jet(*n.a, x) * eval_jet(*n.b, x);
    case Kind::Div: return eval_jet(*n.a, x) / eval_jet(*n.b, x);
    case Kind::Pow: {
      // Constant exponents are the overwhelmingly common case and must work
      // for non-positive bases.
      if (n.b->kind == Kind::Number || n.b->kind == Kind::Constant)
        return pow(eval_jet(*n.a, x), n.b->number);
      return pow(eval_jet(*n.a, x), eval_jet(*n.b, x));
    }
    case Kind::Call: {
      const Jet a = eval_jet(*n.a, x);
      if (n.name == "sin") return sin(a);
      if (n.name == "cos") return cos(a);
      if (n.name == "tan") return tan(a);
      if (n.name == "exp") return exp(a);
      if (n.name == "log") return log(a);
      if (n.name == "sqrt") return sqrt(a);
      if (n.name == "cosh") return cosh(a);
      if (n.name == "sinh") return sinh(a);
      break;
    }
  }
  throw Error("corrupt expression node");
}

// Value plus gradient, for callers that do not need the Hessian of a full
// jet.  Mirrors eval_jet with the second-order terms dropped.
struct D1 {
  double v;
  Eigen::VectorXd g;
};

D1 d1_chain(const D1& a, double f, double df) { return {f, df * a.g}; }

D1 eval_d1(const Expression::Node& n, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  switch (n.kind) {
    case Kind::Number:
    case Kind::Constant: return {n.number, Eigen::VectorXd::Zero(d)};
    case Kind::Variable: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
      g(n.var_index) = 1.0;
      return {x(n.var_index), std::move(g)};
    }
    case Kind::Neg: {
      D1 a = eval_d1(*n.a, x);
      return {-a.v, -a.g};
    }
    case Kind::Add: {
      const D1 a = eval_d1(*n.a, x), b = eval_d1(*n.b, x);
      return {a.v + b.v, a.g + b.g};
    }
    case Kind::Sub: {
      const D1 a = eval_d1(*n.a, x), b = eval_d1(*n.b, x);
      return {a.v - b.v, a.g - b.g};
    }
    case Kind::Mul: {
      const D1 a = eval_d1(*n.a, x), b = eval_d1(*n.b, x);
      return {a.v * b.v, b.v * a.g + a.v * b.g};
    }
    case Kind::Div: {
      const D1 a = eval_d1(*n.a, x), b = eval_d1(*n.b, x);
      const double q = a.v / b.v;
      return {q, (a.g - q * b.g) / b.v};
    }
    case Kind::Pow: {
      const D1 a = eval_d1(*n.a, x);
      if (n.b->kind == Kind::Number || n.b->kind == Kind::Constant) {
        const double p = n.b->number;
        // Same integer-exponent carve-out as the jet evaluator so that
        // nonpositive bases keep working.
        if (p == 0.0) return {1.0, Eigen::VectorXd::Zero(d)};
        if (std::round(p) == p && std::abs(p) < 64.0)
          return {std::pow(a.v, p), p * std::pow(a.v, p - 1.0) * a.g};
        return d1_chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0));
      }
      const D1 b = eval_d1(*n.b, x);
      const double f = std::pow(a.v, b.v);
      return {f, f * (std::log(a.v) * b.g + (b.v / a.v) * a.g)};
    }
    case Kind::Call: {
      const D1 a = eval_d1(*n.a, x);
      if (n.name == "sin") return d1_chain(a, std::sin(a.v), std::cos(a.v));
      if (n.name == "cos") return d1_chain(a, std::cos(a.v), -std::sin(a.v));
      if (n.name == "tan") {
        const double t = std::tan(a.v);
        return d1_chain(a, t, 1.0 + t * t);
      }
      if (n.name == "exp") {
        const double e = std::exp(a.v);
        return d1_chain(a, e, e);
      }
      if (n.name == "log") return d1_chain(a, std::log(a.v), 1.0 / a.v);
      if (n.name == "sqrt") {
        const double s = std::sqrt(a.v);
        return d1_chain(a, s, 0.5 / s);
      }
      if (n.name == "cosh") return d1_chain(a, std::cosh(a.v), std::sinh(a.v));
      if (n.name == "sinh") return d1_chain(a, std::sinh(a.v), std::cosh(a.v));
      break;
    }
  }
  throw Error("corrupt expression node");
}

// Precedence levels used when printing: additive 1, multiplicative 2,
// unary minus 3, power 4, atoms 5.
int precedence(Kind k) {
  switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

void print_node(const Expression::Node& n, const std::vector<std::string>& vars,
                std::string& out);

void print_child(const Expression::Node& c, const std::vector<std::string>& vars,
                 int min_prec, std::string& out) {
  if (precedence(c.kind) < min_prec) {
    out += '(';
    print_node(c, vars, out);
    out += ')';
  } else {
    print_node(c, vars, out);
  }
}

void print_node(const Expression::Node& n, const std::vector<std::string>& vars,
                std::string& out) {
  switch (n.kind) {
    case Kind::Number: out += format_double(n.number); return;
    case Kind::Constant: out += n.name; return;
    case Kind::Variable: out += vars[n.var_index]; return;
    case Kind::Neg:
      out += '-';
      print_child(*n.a, vars, 3, out);
      return;
    case Kind::Add:
      print_child(*n.a, vars, 1, out);
      out += " + ";
      print_child(*n.b, vars, 1, out);
      return;
    case Kind::Sub:
      print_child(*n.a, vars, 1, out);
      out += " - ";
      // A +/- chain on the right would rebind, so force at least term level.
      print_child(*n.b, vars, 2, out);
      return;
    case Kind::Mul:
      print_child(*n.a, vars, 2, out);
      out += '*';
      print_child(*n.b, vars, 2, out);
      return;
    case Kind::Div:
      print_child(*n.a, vars, 2, out);
      out += '/';
      print_child(*n.b, vars, 3, out);
      return;
    case Kind::Pow:
      // The base slot in the grammar is an atom, the exponent a factor.
      print_child(*n.a, vars, 5, out);
      out += '^';
      print_child(*n.b, vars, 3, out);
      return;
    case Kind::Call:
      out += n.name;
      out += '(';
      print_node(*n.a, vars, out);
      out += ')';
      return;
  }
}

bool nodes_equal(const Expression::Node& a, const Expression::Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Number: return a.number == b.number;
    case Kind::Constant: return a.name == b.name;
    case Kind::Variable: return a.var_index == b.var_index;
    case Kind::Neg: return nodes_equal(*a.a, *b.a);
    case Kind::Call: return a.name == b.name && nodes_equal(*a.a, *b.a);
    default: return nodes_equal(*a.a, *b.a) && nodes_equal(*a.b, *b.b);
  }
}

}  // namespace

double Expression::value(const Eigen::VectorXd& x) const {
  if (!root_) throw Error("evaluating an empty expression");
  if (x.size() != static_cast<Eigen::Index>(vars_.size()))
    throw Error("expression over " + std::to_string(vars_.size()) +
                " variable(s) evaluated at a point of dimension " + std::to_string(x.size()));
  return eval_value(*root_, x);
}

Jet Expression::jet(const Eigen::VectorXd& x) const {
  if (!root_) throw Error("evaluating an empty expression");
  if (x.size() != static_cast<Eigen::Index>(vars_.size()))
    throw Error("expression over " + std::to_string(vars_.size()) +
                " variable(s) evaluated at a point of dimension " + std::to_string(x.size()));
  return eval_jet(*root_, x);
}

Eigen::VectorXd Expression::gradient(const Eigen::VectorXd& x) const {
  if (!root_) throw Error("evaluating an empty expression");
  if (x.size() != static_cast<Eigen::Index>(vars_.size()))
    throw Error("expression over " + std::to_string(vars_.size()) +
                " variable(s) evaluated at a point of dimension " + std::to_string(x.size()));
  return eval_d1(*root_, x).g;
}

std::string Expression::str() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, vars_, out);
  return out;
}

bool Expression::same_structure(const Expression& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return nodes_equal(*root_, *other.root_);
}

Expression Expression::number(double value, std::vector<std::string> vars) {
  Expression e;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->number = value;
  e.root_ = n;
  e.vars_ = std::move(vars);
  return e;
}

Expression Expression::variable(int index, std::vector<std::string> vars) {
  Expression e;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->var_index = index;
  e.root_ = n;
  e.vars_ = std::move(vars);
  return e;
}

Expression parse_expression(std::string_view text, std::vector<std::string> variables) {
  static const std::map<std::string, int> no_aliases;
  Parser p(text, variables, no_aliases);
  Expression e;
  e.root_ = p.parse();
  e.vars_ = std::move(variables);
  return e;
}

Expression parse_expression(std::string_view text, int dim) {
  std::vector<std::string> vars;
  vars.reserve(dim);
  for (int i = 1; i <= dim; ++i) vars.push_back("x" + std::to_string(i));
  std::map<std::string, int> aliases;
  if (dim >= 1) {
    aliases["x"] = 0;
    aliases["r"] = 0;
  }
  if (dim >= 2) {
    aliases["y"] = 1;
    aliases["theta"] = 1;
  }
  if (dim >= 3) aliases["z"] = 2;
  Parser p(text, vars, aliases);
  Expression e;
  e.root_ = p.parse();
  e.vars_ = std::move(vars);
  return e;
}

std::string format_double(double v) {
  for (int prec : {15, 16, 17}) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    if (std::strtod(os.str().c_str(), nullptr) == v) return os.str();
  }
  return "0";
}

}  // namespace calibra
