#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delvar/autodiff.hpp"
#include "delvar/error.hpp"
#include "delvar/function.hpp"
#include "delvar/integrand.hpp"

namespace delvar::expr {

enum class NodeKind { Number, Variable, Constant, Negate, Binary, Call };
enum class Func { Sin, Cos, Exp, Log, Sqrt, Abs };

struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  /// Variable or constant name.
  std::string name;
  /// One of + - * / ^ for binary nodes.
  char op = 0;
  Func func = Func::Sin;
  int lhs = -1;
  int rhs = -1;

  bool operator==(const Node&) const = default;
};

/// Arena of nodes; children always precede their parents.
struct Ast {
  std::vector<Node> nodes;
  int root = -1;

  const Node& at(int i) const { return nodes.at(static_cast<std::size_t>(i)); }
  int add(Node n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }
};

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

inline std::optional<Func> func_from(std::string_view s) {
  for (Func f : {Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Abs})
    if (s == func_name(f)) return f;
  return std::nullopt;
}

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::vector<std::string> expected)
      : Error(ErrorCode::SyntaxError, describe(position, expected)), position_(position), expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string describe(std::size_t pos, const std::vector<std::string>& expected) {
    std::string s = "at offset " + std::to_string(pos) + ", expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) s += (i ? " | " : "") + expected[i];
    return s;
  }
  std::size_t position_;
  std::vector<std::string> expected_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Ast run() {
    ast_.root = expression();
    skip();
    if (pos_ != s_.size()) fail({"operator", "end of input"});
    return std::move(ast_);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  Ast ast_;

  [[noreturn]] void fail(std::vector<std::string> expected) const { throw SyntaxError(pos_, std::move(expected)); }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  int binary(char op, int l, int r) {
    Node n;
    n.kind = NodeKind::Binary;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return ast_.add(std::move(n));
  }

  int expression() {
    int lhs = term();
    while (true) {
      if (peek('+') || peek('-')) {
        const char op = s_[pos_++];
        lhs = binary(op, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    while (true) {
      if (peek('*') || peek('/')) {
        const char op = s_[pos_++];
        lhs = binary(op, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (peek('-')) {
      ++pos_;
      Node n;
      n.kind = NodeKind::Negate;
      n.lhs = unary();
      return ast_.add(std::move(n));
    }
    return power();
  }

  int power() {
    const int base = primary();
    if (peek('^')) {
      ++pos_;
      return binary('^', base, unary());
    }
    return base;
  }

  int primary() {
    skip();
    if (pos_ >= s_.size()) fail({"number", "identifier", "'('", "'-'"});
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expression();
      if (!peek(')')) fail({"')'", "operator"});
      ++pos_;
      return inner;
    }
    if (digit(c) || c == '.') return number();
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      if (auto f = func_from(name)) {
        if (!peek('(')) fail({"'('"});
        ++pos_;
        Node n;
        n.kind = NodeKind::Call;
        n.func = *f;
        n.lhs = expression();
        if (!peek(')')) fail({"')'", "operator"});
        ++pos_;
        return ast_.add(std::move(n));
      }
      Node n;
      n.kind = name == "pi" || name == "e" ? NodeKind::Constant : NodeKind::Variable;
      n.name = name;
      return ast_.add(std::move(n));
    }
    fail({"number", "identifier", "'('", "'-'"});
  }

  int number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && s_[start] == '.') {
      pos_ = start;
      fail({"number"});
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && digit(s_[p])) {
        while (p < s_.size() && digit(s_[p])) ++p;
        pos_ = p;
      }
    }
    Node n;
    n.kind = NodeKind::Number;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, n.number);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail({"number"});
    }
    return ast_.add(std::move(n));
  }
};

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Precedence levels used by the printer: + - (1), * / (2), unary minus (3), ^ (4), atoms (5).
inline int level(const Node& n) {
  switch (n.kind) {
    case NodeKind::Binary:
      return n.op == '^' ? 4 : (n.op == '*' || n.op == '/') ? 2 : 1;
    case NodeKind::Negate:
      return 3;
    default:
      return 5;
  }
}

inline void print(const Ast& ast, int i, int need, std::string& out) {
  const Node& n = ast.at(i);
  const bool paren = level(n) < need;
  if (paren) out += '(';
  switch (n.kind) {
    case NodeKind::Number: out += format_number(n.number); break;
    case NodeKind::Variable:
    case NodeKind::Constant: out += n.name; break;
    case NodeKind::Negate:
      out += '-';
      print(ast, n.lhs, 3, out);
      break;
    case NodeKind::Call:
      out += func_name(n.func);
      out += '(';
      print(ast, n.lhs, 1, out);
      out += ')';
      break;
    case NodeKind::Binary: {
      const int l = level(n);
      const int left_need = n.op == '^' ? 5 : l;
      const int right_need = n.op == '^' ? 3 : l + 1;
      print(ast, n.lhs, left_need, out);
      if (n.op == '^') {
        out += '^';
      } else {
        out += ' ';
        out += n.op;
        out += ' ';
      }
      print(ast, n.rhs, right_need, out);
      break;
    }
  }
  if (paren) out += ')';
}

inline bool structurally_equal(const Ast& a, int i, const Ast& b, int j) {
  const Node& x = a.at(i);
  const Node& y = b.at(j);
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case NodeKind::Number: return x.number == y.number;
    case NodeKind::Variable:
    case NodeKind::Constant: return x.name == y.name;
    case NodeKind::Negate: return structurally_equal(a, x.lhs, b, y.lhs);
    case NodeKind::Call: return x.func == y.func && structurally_equal(a, x.lhs, b, y.lhs);
    case NodeKind::Binary:
      return x.op == y.op && structurally_equal(a, x.lhs, b, y.lhs) && structurally_equal(a, x.rhs, b, y.rhs);
  }
  return false;
}

inline bool is_constant(const Ast& ast, int i) {
  const Node& n = ast.at(i);
  switch (n.kind) {
    case NodeKind::Variable: return false;
    case NodeKind::Number:
    case NodeKind::Constant: return true;
    case NodeKind::Negate:
    case NodeKind::Call: return is_constant(ast, n.lhs);
    case NodeKind::Binary: return is_constant(ast, n.lhs) && is_constant(ast, n.rhs);
  }
  return false;
}

}  // namespace detail

inline Ast parse(std::string_view text) { return detail::Parser(text).run(); }

inline std::string to_string(const Ast& ast) {
  std::string out;
  detail::print(ast, ast.root, 1, out);
  return out;
}

inline bool operator==(const Ast& a, const Ast& b) {
  return detail::structurally_equal(a, a.root, b, b.root);
}

/// Name table for one argument layout.
class Binding {
 public:
  enum class Kind { Variational, Group, Control, Time };

  static Binding variational(int m, int n) { return Binding(Kind::Variational, m, n, 0); }
  /// (t, q) arguments of group generators.
  static Binding group(int n) { return Binding(Kind::Group, 0, n, 0); }
  /// (t, q, u, q_tau, u_tau) arguments of control problems.
  static Binding control(int n, int mc) { return Binding(Kind::Control, 0, n, mc); }
  static Binding time() { return Binding(Kind::Time, 0, 1, 0); }

  Kind kind() const { return kind_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int mc() const { return mc_; }

  int arity() const {
    switch (kind_) {
      case Kind::Variational: return 1 + 2 * n_ * (m_ + 1);
      case Kind::Group: return 1 + n_;
      case Kind::Control: return 1 + 2 * (n_ + mc_);
      case Kind::Time: return 1;
    }
    return 0;
  }

  /// 0-based argument slot of a variable name.
  int slot(const std::string& name) const {
    if (name == "t") return 0;
    switch (kind_) {
      case Kind::Variational: return variational_slot(name);
      case Kind::Group: {
        if (auto i = indexed(name, "q", "", n_)) return 1 + *i;
        break;
      }
      case Kind::Control: {
        if (auto i = indexed(name, "q", "", n_)) return 1 + *i;
        if (auto i = indexed(name, "u", "", mc_)) return 1 + n_ + *i;
        if (auto i = indexed(name, "q", "_tau", n_)) return 1 + n_ + mc_ + *i;
        if (auto i = indexed(name, "u", "_tau", mc_)) return 1 + 2 * n_ + mc_ + *i;
        break;
      }
      case Kind::Time: break;
    }
    throw Error(ErrorCode::UnknownVariable, name);
  }

 private:
  Binding(Kind k, int m, int n, int mc) : kind_(k), m_(m), n_(n), mc_(mc) {}

  static std::optional<int> parse_index(std::string_view s) {
    if (s.empty() || s.size() > 6) return std::nullopt;
    int v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return v;
  }

  /// "<prefix><i><suffix>", or bare "<prefix><suffix>" when count == 1.
  static std::optional<int> indexed(std::string_view name, std::string_view prefix, std::string_view suffix, int count) {
    if (name.size() < prefix.size() + suffix.size() || !name.starts_with(prefix) || !name.ends_with(suffix))
      return std::nullopt;
    const std::string_view mid = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (mid.empty()) return count == 1 ? std::optional<int>(0) : std::nullopt;
    const auto i = parse_index(mid);
    if (!i || *i >= count) return std::nullopt;
    return i;
  }

  int block_slot(int j, int i, bool delayed) const {
    if (j > m_)
      throw Error(ErrorCode::DerivativeOrderTooHigh,
                  "derivative order " + std::to_string(j) + " exceeds m = " + std::to_string(m_));
    return 1 + (delayed ? (m_ + 1) * n_ : 0) + j * n_ + i;
  }

  int variational_slot(const std::string& name) const {
    std::string_view s = name;
    const bool delayed = s.ends_with("_tau");
    if (delayed) s.remove_suffix(4);
    if (n_ == 1) {
      if (s == "q") return block_slot(0, 0, delayed);
      if (s == "qd") return block_slot(1, 0, delayed);
      if (s == "qdd") return block_slot(2, 0, delayed);
    }
    if (s.size() >= 4 && s[0] == 'd') {
      const std::size_t qpos = s.find('q');
      if (qpos != std::string_view::npos) {
        const auto j = parse_index(s.substr(1, qpos - 1));
        const auto i = parse_index(s.substr(qpos + 1));
        if (j && i && *i < n_) return block_slot(*j, *i, delayed);
      }
    }
    throw Error(ErrorCode::UnknownVariable, name);
  }

  Kind kind_;
  int m_ = 0;
  int n_ = 1;
  int mc_ = 0;
};

/// Ast with every variable resolved to an argument slot.
struct BoundExpr {
  Ast ast;
  std::vector<int> slots;
  int arity = 0;
};

inline BoundExpr bind(Ast ast, const Binding& binding) {
  BoundExpr b;
  b.slots.assign(ast.nodes.size(), -1);
  for (std::size_t i = 0; i < ast.nodes.size(); ++i)
    if (ast.nodes[i].kind == NodeKind::Variable) b.slots[i] = binding.slot(ast.nodes[i].name);
  b.ast = std::move(ast);
  b.arity = binding.arity();
  return b;
}

namespace detail {

template <typename S>
S checked(S x, const char* what) {
  if (!std::isfinite(value(x))) throw Error(ErrorCode::EvaluationDomain, what);
  return x;
}

template <typename S>
S eval_node(const BoundExpr& b, int i, std::span<const S> args) {
  using std::abs, std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt;
  const Node& n = b.ast.at(i);
  switch (n.kind) {
    case NodeKind::Number: return S(n.number);
    case NodeKind::Constant: return S(n.name == "pi" ? M_PI : M_E);
    case NodeKind::Variable: return args[static_cast<std::size_t>(b.slots[static_cast<std::size_t>(i)])];
    case NodeKind::Negate: return -eval_node(b, n.lhs, args);
    case NodeKind::Call: {
      const S a = eval_node(b, n.lhs, args);
      switch (n.func) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Exp: return checked(exp(a), "exp overflow");
        case Func::Log:
          if (!(value(a) > 0.0)) throw Error(ErrorCode::EvaluationDomain, "log of a non-positive value");
          return log(a);
        case Func::Sqrt:
          if (value(a) < 0.0) throw Error(ErrorCode::EvaluationDomain, "sqrt of a negative value");
          if (value(a) == 0.0) return a * 0.0;
          return sqrt(a);
        case Func::Abs: return abs(a);
      }
      break;
    }
    case NodeKind::Binary: {
      const S l = eval_node(b, n.lhs, args);
      switch (n.op) {
        case '+': return l + eval_node(b, n.rhs, args);
        case '-': return l - eval_node(b, n.rhs, args);
        case '*': return l * eval_node(b, n.rhs, args);
        case '/': {
          const S r = eval_node(b, n.rhs, args);
          if (value(r) == 0.0) throw Error(ErrorCode::EvaluationDomain, "division by zero");
          return l / r;
        }
        case '^': {
          if (is_constant(b.ast, n.rhs)) {
            const double p = value(eval_node<double>(b, n.rhs, {}));
            if (std::isfinite(p) && p == std::round(p) && std::abs(p) <= 64.0) {
              if (p < 0.0 && value(l) == 0.0) throw Error(ErrorCode::EvaluationDomain, "zero to a negative power");
              return ipow(l, static_cast<int>(p));
            }
            if (value(l) < 0.0 || (value(l) == 0.0 && p < 1.0))
              throw Error(ErrorCode::EvaluationDomain, "fractional power of a non-positive value");
            if (value(l) == 0.0) return l * 0.0;
            return checked(pow(l, p), "power overflow");
          }
          if (!(value(l) > 0.0)) throw Error(ErrorCode::EvaluationDomain, "variable exponent needs a positive base");
          return checked(exp(eval_node(b, n.rhs, args) * log(l)), "power overflow");
        }
      }
      break;
    }
  }
  throw Error(ErrorCode::EvaluationDomain, "malformed expression");
}

}  // namespace detail

template <typename S>
S eval(const BoundExpr& b, std::span<const S> args) {
  if (static_cast<int>(args.size()) < b.arity)
    throw Error(ErrorCode::InvalidInput, "expression expects " + std::to_string(b.arity) + " arguments");
  return detail::checked(detail::eval_node(b, b.ast.root, args), "non-finite result");
}

inline double bind_eval(const Ast& ast, const Binding& binding, std::span<const double> args) {
  return eval(bind(ast, binding), args);
}

template <typename S>
S bind_eval(const Ast& ast, const Binding& binding, std::span<const S> args) {
  return eval(bind(ast, binding), args);
}

/// Differentiable function of the binding's arguments.
inline ScalarFunction to_function(const Ast& ast, const Binding& binding) {
  auto bound = std::make_shared<const BoundExpr>(bind(ast, binding));
  return ScalarFunction::generic([bound](auto args) { return eval(*bound, args); }, bound->arity);
}

inline ScalarFunction compile(std::string_view text, const Binding& binding) {
  return to_function(parse(text), binding);
}

inline Integrand compile_integrand(std::string_view text, const Binding& binding) {
  return Integrand(compile(text, binding));
}

}  // namespace delvar::expr
