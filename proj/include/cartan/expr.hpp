#pragma once

// Analytic expressions over named variables and scalar parameters.
//
// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := unary (("*"|"/") unary)*
//   unary  := "-" unary | power
//   power  := atom ("^" signed_int)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//   NUMBER := digits ("." digits)? (("e"|"E") ("+"|"-")? digits)?
//   IDENT  := letter (letter|digit|"_")*

#include <algorithm>
#include <charconv>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "cartan/errors.hpp"
#include "cartan/jet.hpp"

namespace cartan {

using Params = std::map<std::string, double>;

class Expr {
 public:
  enum class Kind { Number, Param, Var, Neg, Add, Sub, Mul, Div, PowInt, Call };

  struct Node {
    Kind kind = Kind::Number;
    std::size_t position = 0;
    double number = 0.0;
    std::string name;          // Param, Var, Call
    int var_index = -1;        // Var
    Function function{};       // Call
    int exponent = 0;          // PowInt
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  /// Parses `text`.  Identifiers resolve, in order, to a variable, a function name
  /// (when followed by "("), or a declared parameter.
  static Expr parse(std::string_view text, std::vector<std::string> variables,
                    const std::set<std::string>& parameters = {});

  const Node& root() const noexcept { return *root_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::string& source() const noexcept { return source_; }

  /// Parameter names referenced anywhere in the tree.
  std::set<std::string> parameters() const {
    std::set<std::string> out;
    collect_params(*root_, out);
    return out;
  }

  /// Canonical text; parse(print()) reproduces the same tree.
  std::string print() const { return print_node(*root_); }

  /// Structural equality (numbers compared exactly).
  friend bool operator==(const Expr& a, const Expr& b) {
    return a.variables_ == b.variables_ && same_tree(*a.root_, *b.root_);
  }

  static bool same_tree(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Number: return a.number == b.number;
      case Kind::Param: return a.name == b.name;
      case Kind::Var: return a.var_index == b.var_index;
      case Kind::PowInt: return a.exponent == b.exponent && same_tree(*a.lhs, *b.lhs);
      case Kind::Call: return a.function == b.function && same_tree(*a.lhs, *b.lhs);
      case Kind::Neg: return same_tree(*a.lhs, *b.lhs);
      default: return same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
    }
  }

 private:
  Expr(std::shared_ptr<const Node> root, std::vector<std::string> vars, std::string src)
      : root_(std::move(root)), variables_(std::move(vars)), source_(std::move(src)) {}

  static void collect_params(const Node& n, std::set<std::string>& out) {
    if (n.kind == Kind::Param) out.insert(n.name);
    if (n.lhs) collect_params(*n.lhs, out);
    if (n.rhs) collect_params(*n.rhs, out);
  }

  static int precedence(const Node& n) {
    switch (n.kind) {
      case Kind::Add:
      case Kind::Sub: return 1;
      case Kind::Mul:
      case Kind::Div: return 2;
      case Kind::Neg: return 3;
      case Kind::PowInt: return 4;
      default: return 5;
    }
  }

  std::string print_node(const Node& n) const {
    auto wrap = [&](const Node& child, int required) {
      std::string s = print_node(child);
      return precedence(child) < required ? "(" + s + ")" : s;
    };
    switch (n.kind) {
      case Kind::Number: {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, n.number);
        return std::string(buf, end);
      }
      case Kind::Param: return n.name;
      case Kind::Var: return variables_[static_cast<std::size_t>(n.var_index)];
      case Kind::Neg: return "-" + wrap(*n.lhs, 3);
      case Kind::Add: return wrap(*n.lhs, 1) + " + " + wrap(*n.rhs, 2);
      case Kind::Sub: return wrap(*n.lhs, 1) + " - " + wrap(*n.rhs, 2);
      case Kind::Mul: return wrap(*n.lhs, 2) + "*" + wrap(*n.rhs, 3);
      case Kind::Div: return wrap(*n.lhs, 2) + "/" + wrap(*n.rhs, 3);
      case Kind::PowInt: return wrap(*n.lhs, 5) + "^" + std::to_string(n.exponent);
      case Kind::Call: return std::string(function_name(n.function)) + "(" + print_node(*n.lhs) + ")";
    }
    return {};
  }

  std::shared_ptr<const Node> root_;
  std::vector<std::string> variables_;
  std::string source_;

  friend class ExprParser;
};

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& variables,
             const std::set<std::string>& parameters)
      : text_(text), variables_(variables), parameters_(parameters) {
    advance();
  }

  std::shared_ptr<const Expr::Node> parse_all() {
    auto e = parse_expr();
    if (tok_.kind == Tok::Comma) throw ParseError("functions take exactly one argument", tok_.pos);
    if (tok_.kind != Tok::End) throw ParseError("unexpected '" + std::string(tok_.text) + "'", tok_.pos);
    return e;
  }

 private:
  enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
  struct Token {
    Tok kind = Tok::End;
    std::string_view text;
    std::size_t pos = 0;
  };
  using NodePtr = std::shared_ptr<const Expr::Node>;

  void advance() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
    tok_.pos = i_;
    if (i_ == text_.size()) {
      tok_ = {Tok::End, {}, i_};
      return;
    }
    const char c = text_[i_];
    auto single = [&](Tok k) {
      tok_ = {k, text_.substr(i_, 1), i_};
      ++i_;
    };
    switch (c) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      default: break;
    }
    const std::size_t start = i_;
    auto digit = [&](std::size_t k) { return k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k])); };
    if (digit(i_)) {
      while (digit(i_)) ++i_;
      if (i_ < text_.size() && text_[i_] == '.') {
        if (!digit(i_ + 1)) throw ParseError("expected digits after '.'", i_ + 1);
        ++i_;
        while (digit(i_)) ++i_;
      }
      if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
        std::size_t k = i_ + 1;
        if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
        if (!digit(k)) throw ParseError("malformed exponent in number", k);
        i_ = k;
        while (digit(i_)) ++i_;
      }
      tok_ = {Tok::Number, text_.substr(start, i_ - start), start};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
        ++i_;
      tok_ = {Tok::Ident, text_.substr(start, i_ - start), start};
      return;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", i_);
  }

  void expect(Tok k, const char* what) {
    if (tok_.kind != k) throw ParseError(std::string("expected ") + what, tok_.pos);
    advance();
  }

  static Expr::Node node(Expr::Kind kind, std::size_t position) {
    Expr::Node n;
    n.kind = kind;
    n.position = position;
    return n;
  }

  static NodePtr make(Expr::Node n) { return std::make_shared<const Expr::Node>(std::move(n)); }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      Expr::Node n = node(tok_.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub, tok_.pos);
      advance();
      n.lhs = lhs;
      n.rhs = parse_term();
      lhs = make(std::move(n));
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      Expr::Node n = node(tok_.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div, tok_.pos);
      advance();
      n.lhs = lhs;
      n.rhs = parse_unary();
      lhs = make(std::move(n));
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (tok_.kind == Tok::Minus) {
      Expr::Node n = node(Expr::Kind::Neg, tok_.pos);
      advance();
      n.lhs = parse_unary();
      return make(std::move(n));
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (tok_.kind != Tok::Caret) return base;
    Expr::Node n = node(Expr::Kind::PowInt, tok_.pos);
    advance();
    bool negative = false;
    if (tok_.kind == Tok::Minus || tok_.kind == Tok::Plus) {
      negative = tok_.kind == Tok::Minus;
      advance();
    }
    if (tok_.kind != Tok::Number || tok_.text.find_first_not_of("0123456789") != std::string_view::npos)
      throw ParseError("exponent must be an integer", tok_.pos);
    int value = 0;
    auto [p, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), value);
    if (ec != std::errc{}) throw ParseError("exponent out of range", tok_.pos);
    advance();
    n.exponent = negative ? -value : value;
    n.lhs = base;
    return make(std::move(n));
  }

  NodePtr parse_atom() {
    const Token t = tok_;
    switch (t.kind) {
      case Tok::Number: {
        Expr::Node n = node(Expr::Kind::Number, t.pos);
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n.number);
        if (ec != std::errc{}) throw ParseError("number out of range", t.pos);
        advance();
        return make(std::move(n));
      }
      case Tok::LParen: {
        advance();
        NodePtr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        std::string name(t.text);
        advance();
        if (auto it = std::find(variables_.begin(), variables_.end(), name); it != variables_.end()) {
          Expr::Node n = node(Expr::Kind::Var, t.pos);
          n.name = name;
          n.var_index = static_cast<int>(it - variables_.begin());
          return make(std::move(n));
        }
        if (auto f = function_from_name(name)) {
          if (tok_.kind != Tok::LParen) throw ParseError("function '" + name + "' requires an argument", tok_.pos);
          advance();
          if (tok_.kind == Tok::RParen) throw ParseError("function '" + name + "' takes exactly one argument", tok_.pos);
          Expr::Node n = node(Expr::Kind::Call, t.pos);
          n.name = name;
          n.function = *f;
          n.lhs = parse_expr();
          if (tok_.kind == Tok::Comma) throw ParseError("function '" + name + "' takes exactly one argument", tok_.pos);
          expect(Tok::RParen, "')'");
          return make(std::move(n));
        }
        if (parameters_.contains(name)) {
          Expr::Node n = node(Expr::Kind::Param, t.pos);
          n.name = name;
          return make(std::move(n));
        }
        throw ParseError("unknown identifier '" + name + "'", t.pos);
      }
      case Tok::End: throw ParseError("unexpected end of input", t.pos);
      default: throw ParseError("unexpected '" + std::string(t.text) + "'", t.pos);
    }
  }

  std::string_view text_;
  const std::vector<std::string>& variables_;
  const std::set<std::string>& parameters_;
  std::size_t i_ = 0;
  Token tok_;
};

inline Expr Expr::parse(std::string_view text, std::vector<std::string> variables,
                        const std::set<std::string>& parameters) {
  ExprParser p(text, variables, parameters);
  auto root = p.parse_all();
  return Expr(std::move(root), std::move(variables), std::string(text));
}

namespace detail {

template <JetScalar T>
Jet<T> eval_node(const Expr::Node& n, std::span<const Jet<T>> vars, const Params& params) {
  const Jet<T>& shape = vars.front();
  try {
    switch (n.kind) {
      case Expr::Kind::Number: return Jet<T>::constant(T(n.number), shape.num_vars(), shape.degree());
      case Expr::Kind::Param: {
        auto it = params.find(n.name);
        if (it == params.end()) throw LookupError("unbound parameter '" + n.name + "'");
        return Jet<T>::constant(T(it->second), shape.num_vars(), shape.degree());
      }
      case Expr::Kind::Var: return vars[static_cast<std::size_t>(n.var_index)];
      case Expr::Kind::Neg: return -eval_node<T>(*n.lhs, vars, params);
      case Expr::Kind::Add: return eval_node<T>(*n.lhs, vars, params) + eval_node<T>(*n.rhs, vars, params);
      case Expr::Kind::Sub: return eval_node<T>(*n.lhs, vars, params) - eval_node<T>(*n.rhs, vars, params);
      case Expr::Kind::Mul: return eval_node<T>(*n.lhs, vars, params) * eval_node<T>(*n.rhs, vars, params);
      case Expr::Kind::Div: return eval_node<T>(*n.lhs, vars, params) / eval_node<T>(*n.rhs, vars, params);
      case Expr::Kind::PowInt: return pow_int(eval_node<T>(*n.lhs, vars, params), n.exponent);
      case Expr::Kind::Call: return apply_function(n.function, eval_node<T>(*n.lhs, vars, params));
    }
  } catch (const EvalError&) {
    throw;
  } catch (const DomainError& e) {
    throw EvalError(e.what(), n.position);
  }
  throw EvalError("corrupt expression node", n.position);
}

}  // namespace detail

/// Evaluates `e` with its variables bound positionally (same order as e.variables()).
template <JetScalar T>
Jet<T> eval_jet(const Expr& e, std::span<const Jet<T>> vars, const Params& params) {
  if (vars.size() != e.variables().size())
    throw ShapeError("expected " + std::to_string(e.variables().size()) + " variable bindings, got " +
                     std::to_string(vars.size()));
  if (vars.empty()) throw ShapeError("expressions need at least one variable binding");
  for (const auto& v : vars)
    if (v.layout_ptr() != vars.front().layout_ptr()) throw ShapeError("variable bindings have different jet shapes");
  return detail::eval_node<T>(e.root(), vars, params);
}

template <JetScalar T>
Jet<T> eval_jet(const Expr& e, const std::map<std::string, Jet<T>>& bindings, const Params& params) {
  std::vector<Jet<T>> vars;
  vars.reserve(e.variables().size());
  for (const auto& name : e.variables()) {
    auto it = bindings.find(name);
    if (it == bindings.end()) throw LookupError("unbound variable '" + name + "'");
    vars.push_back(it->second);
  }
  return eval_jet<T>(e, std::span<const Jet<T>>(vars), params);
}

/// Degree-0 evaluation at a point given positionally.
template <JetScalar T>
T eval_scalar(const Expr& e, std::span<const T> point, const Params& params) {
  std::vector<Jet<T>> vars;
  vars.reserve(point.size());
  const int n = static_cast<int>(std::max<std::size_t>(point.size(), 1));
  for (const T& v : point) vars.push_back(Jet<T>::constant(v, n, 0));
  return eval_jet<T>(e, std::span<const Jet<T>>(vars), params).value();
}

template <JetScalar T>
T eval_scalar(const Expr& e, const std::map<std::string, T>& point, const Params& params) {
  std::vector<T> values;
  for (const auto& name : e.variables()) {
    auto it = point.find(name);
    if (it == point.end()) throw LookupError("unbound variable '" + name + "'");
    values.push_back(it->second);
  }
  return eval_scalar<T>(e, std::span<const T>(values), params);
}

/// Seeds every variable of `e` as an independent jet variable at `point`.
template <JetScalar T>
Jet<T> taylor_expand(const Expr& e, std::span<const T> point, int degree, const Params& params) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet<T>> vars;
  vars.reserve(point.size());
  for (int i = 0; i < n; ++i) vars.push_back(Jet<T>::variable(i, point[static_cast<std::size_t>(i)], n, degree));
  return eval_jet<T>(e, std::span<const Jet<T>>(vars), params);
}

}  // namespace cartan
