#include "sbridge/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>

#include <fmt/core.h>

namespace sbridge {

ExprSyntaxError::ExprSyntaxError(const std::string& what, std::size_t offset)
    : InvalidArgument(fmt::format("{} at offset {}", what, offset)), offset_(offset) {}

UnknownIdentifierError::UnknownIdentifierError(std::string name, std::size_t offset)
    : InvalidArgument(fmt::format("unknown identifier '{}' at offset {}", name, offset)),
      name_(std::move(name)),
      offset_(offset) {}

enum class Func : std::uint8_t { sin, cos, exp, log, abs, tanh, sqrt };
enum class Kind : std::uint8_t { literal, variable, negate, add, sub, mul, div, pow, call };

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  Var var = Var::t;
  Func func = Func::sin;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
};

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 7> kFunctions{{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"exp", Func::exp},
    {"log", Func::log},
    {"abs", Func::abs},
    {"tanh", Func::tanh},
    {"sqrt", Func::sqrt},
}};

std::string_view func_name(Func f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

std::string_view var_name(Expr::Var v) {
  switch (v) {
    case Expr::Var::t: return "t";
    case Expr::Var::x1: return "x1";
    case Expr::Var::x2: return "x2";
  }
  return "?";
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::size_t parse_all(std::vector<Expr::Node>& nodes) {
    nodes_ = &nodes;
    const std::size_t root = sum();
    skip_space();
    if (pos_ != text_.size()) throw ExprSyntaxError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    return root;
  }

 private:
  std::size_t add(Expr::Node n) {
    nodes_->push_back(n);
    return nodes_->size() - 1;
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ExprSyntaxError(fmt::format("expected '{}' but input ended", c), pos_);
      throw ExprSyntaxError(fmt::format("expected '{}'", c), pos_);
    }
  }

  std::size_t sum() {
    std::size_t lhs = product();
    for (;;) {
      if (accept('+'))
        lhs = add({Kind::add, 0.0, {}, {}, lhs, product()});
      else if (accept('-'))
        lhs = add({Kind::sub, 0.0, {}, {}, lhs, product()});
      else
        return lhs;
    }
  }

  std::size_t product() {
    std::size_t lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = add({Kind::mul, 0.0, {}, {}, lhs, unary()});
      else if (accept('/'))
        lhs = add({Kind::div, 0.0, {}, {}, lhs, unary()});
      else
        return lhs;
    }
  }

  std::size_t unary() {
    if (accept('-')) return add({Kind::negate, 0.0, {}, {}, unary(), 0});
    return power();
  }

  std::size_t power() {
    const std::size_t base = primary();
    if (accept('^')) return add({Kind::pow, 0.0, {}, {}, base, unary()});
    return base;
  }

  std::size_t primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ExprSyntaxError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const std::size_t inner = sum();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    throw ExprSyntaxError(fmt::format("unexpected '{}'", c), pos_);
  }

  std::size_t number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (is_digit(text_[pos_]) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && is_digit(text_[p])) {
        pos_ = p;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ExprSyntaxError("malformed number", start);
    return add({Kind::literal, value, {}, {}, 0, 0});
  }

  std::size_t identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") return add({Kind::variable, 0.0, Expr::Var::t, {}, 0, 0});
    if (name == "x1") return add({Kind::variable, 0.0, Expr::Var::x1, {}, 0, 0});
    if (name == "x2") return add({Kind::variable, 0.0, Expr::Var::x2, {}, 0, 0});
    for (const auto& [fname, fn] : kFunctions) {
      if (name == fname) {
        expect('(');
        const std::size_t arg = sum();
        expect(')');
        return add({Kind::call, 0.0, {}, fn, arg, 0});
      }
    }
    throw UnknownIdentifierError(std::string(name), start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Expr::Node>* nodes_ = nullptr;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(fmt::format("non-finite result in {}", what));
  return v;
}

double eval_node(const std::vector<Expr::Node>& nodes, std::size_t k, double t, double x1, double x2) {
  const Expr::Node& n = nodes[k];
  switch (n.kind) {
    case Kind::literal: return n.value;
    case Kind::variable:
      switch (n.var) {
        case Expr::Var::t: return t;
        case Expr::Var::x1: return x1;
        case Expr::Var::x2: return x2;
      }
      return 0.0;
    case Kind::negate: return -eval_node(nodes, n.lhs, t, x1, x2);
    case Kind::add: return checked(eval_node(nodes, n.lhs, t, x1, x2) + eval_node(nodes, n.rhs, t, x1, x2), "+");
    case Kind::sub: return checked(eval_node(nodes, n.lhs, t, x1, x2) - eval_node(nodes, n.rhs, t, x1, x2), "-");
    case Kind::mul: return checked(eval_node(nodes, n.lhs, t, x1, x2) * eval_node(nodes, n.rhs, t, x1, x2), "*");
    case Kind::div: {
      const double a = eval_node(nodes, n.lhs, t, x1, x2);
      const double b = eval_node(nodes, n.rhs, t, x1, x2);
      if (b == 0.0) throw EvalError("division by zero");
      return checked(a / b, "/");
    }
    case Kind::pow: {
      const double a = eval_node(nodes, n.lhs, t, x1, x2);
      const double b = eval_node(nodes, n.rhs, t, x1, x2);
      // Small non-negative integer exponents by repeated multiplication: the
      // common polynomial case, and exact for the values it touches.
      if (b >= 0.0 && b <= 8.0 && b == std::floor(b)) {
        double r = 1.0;
        for (int e = 0; e < static_cast<int>(b); ++e) r *= a;
        return checked(r, "^");
      }
      return checked(std::pow(a, b), "^");
    }
    case Kind::call: {
      const double a = eval_node(nodes, n.lhs, t, x1, x2);
      switch (n.func) {
        case Func::sin: return std::sin(a);
        case Func::cos: return std::cos(a);
        case Func::exp: return checked(std::exp(a), "exp");
        case Func::log:
          if (a <= 0.0) throw EvalError(fmt::format("log of non-positive value {}", a));
          return std::log(a);
        case Func::abs: return std::abs(a);
        case Func::tanh: return std::tanh(a);
        case Func::sqrt:
          if (a < 0.0) throw EvalError(fmt::format("sqrt of negative value {}", a));
          return std::sqrt(a);
      }
      return 0.0;
    }
  }
  return 0.0;
}

void print_node(const std::vector<Expr::Node>& nodes, std::size_t k, std::string& out) {
  const Expr::Node& n = nodes[k];
  auto binary = [&](char op) {
    out += '(';
    print_node(nodes, n.lhs, out);
    out += ' ';
    out += op;
    out += ' ';
    print_node(nodes, n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::literal:
      // Negative literals cannot come out of the parser, but constant() may build them.
      if (n.value < 0.0)
        out += fmt::format("(-{:.17g})", -n.value);
      else
        out += fmt::format("{:.17g}", n.value);
      return;
    case Kind::variable: out += var_name(n.var); return;
    case Kind::negate:
      out += "(-";
      print_node(nodes, n.lhs, out);
      out += ')';
      return;
    case Kind::add: binary('+'); return;
    case Kind::sub: binary('-'); return;
    case Kind::mul: binary('*'); return;
    case Kind::div: binary('/'); return;
    case Kind::pow: binary('^'); return;
    case Kind::call:
      out += func_name(n.func);
      out += '(';
      print_node(nodes, n.lhs, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr::Expr(std::shared_ptr<const std::vector<Node>> nodes, std::size_t root, std::string source)
    : nodes_(std::move(nodes)), root_(root), source_(std::move(source)) {}

Expr Expr::parse(std::string_view text) {
  for (std::size_t k = 0; k < text.size(); ++k)
    if (static_cast<unsigned char>(text[k]) > 127) throw ExprSyntaxError("non-ASCII character", k);
  auto nodes = std::make_shared<std::vector<Node>>();
  Parser parser(text);
  const std::size_t root = parser.parse_all(*nodes);
  return Expr(std::move(nodes), root, std::string(text));
}

Expr Expr::constant(double value) {
  auto nodes = std::make_shared<std::vector<Node>>();
  nodes->push_back({Kind::literal, value, {}, {}, 0, 0});
  return Expr(std::move(nodes), 0, fmt::format("{:.17g}", value));
}

double Expr::eval(double t, double x1, double x2) const {
  return checked(eval_node(*nodes_, root_, t, x1, x2), "expression");
}

std::string Expr::print() const {
  std::string out;
  print_node(*nodes_, root_, out);
  return out;
}

bool Expr::depends_on(Var v) const {
  for (const Node& n : *nodes_)
    if (n.kind == Kind::variable && n.var == v) return true;
  return false;
}

}  // namespace sbridge
