#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sbridge/error.hpp"

namespace sbridge {

/// Syntax error at a byte offset of the source text.
class ExprSyntaxError : public InvalidArgument {
 public:
  ExprSyntaxError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public InvalidArgument {
 public:
  UnknownIdentifierError(std::string name, std::size_t offset);
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

/// Domain error or non-finite result during evaluation.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Scalar arithmetic expression in t, x1, x2.
///
/// Grammar, loosest to tightest binding:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          (right-associative)
///   primary := number | t | x1 | x2 | func '(' sum ')' | '(' sum ')'
///   func    := sin | cos | exp | log | abs | tanh | sqrt
///
/// Immutable after parsing; copies share the tree.
class Expr {
 public:
  enum class Var { t, x1, x2 };

  static Expr parse(std::string_view text);
  /// Constant expression.
  static Expr constant(double value);

  double eval(double t, double x1, double x2) const;

  /// Fully parenthesised canonical form; parse(print()) evaluates identically.
  std::string print() const;

  bool depends_on(Var v) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  Expr(std::shared_ptr<const std::vector<Node>> nodes, std::size_t root, std::string source);

  std::shared_ptr<const std::vector<Node>> nodes_;
  std::size_t root_ = 0;
  std::string source_;
};

inline Expr parse(std::string_view text) { return Expr::parse(text); }
inline double eval(const Expr& e, double t, double x1, double x2) { return e.eval(t, x1, x2); }

}  // namespace sbridge
