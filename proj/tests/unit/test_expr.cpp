#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "generators.hpp"
#include "sbridge/expr.hpp"

using namespace sbridge;
using namespace sbridge::testing;

TEST(Expr, VariableX2) {
  const Expr e = parse("x2");
  EXPECT_EQ(e.eval(0.0, 0.3, -0.7), -0.7);
  EXPECT_TRUE(e.depends_on(Expr::Var::x2));
  EXPECT_FALSE(e.depends_on(Expr::Var::x1));
  EXPECT_FALSE(e.depends_on(Expr::Var::t));
}

TEST(Expr, CubicDriftMatchesClosedForm) {
  const Expr e = parse("-x1^3 - 1*x2");
  for (double x1 : {-1.0, -0.3, 0.0, 0.5, 1.0})
    for (double x2 : {-1.0, 0.25, 0.9}) EXPECT_DOUBLE_EQ(e.eval(0.0, x1, x2), -x1 * x1 * x1 - x2);
}

TEST(Expr, LiteralArithmetic) {
  EXPECT_EQ(parse("2*(1+3)^2").eval(0, 0, 0), 32.0);
  EXPECT_EQ(parse("0").eval(1, 2, 3), 0.0);
  EXPECT_EQ(parse("x1*x2").eval(0, 0.5, -2), -1.0);
  EXPECT_EQ(parse("exp(0)+sin(0)").eval(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(parse("1.5e-1 * 4").eval(0, 0, 0), 0.6);
  EXPECT_DOUBLE_EQ(parse(" t + cos( 0 ) ").eval(2.0, 0, 0), 3.0);
}

TEST(Expr, PrecedenceAndAssociativity) {
  EXPECT_EQ(parse("1 + 2*3").eval(0, 0, 0), 7.0);
  EXPECT_EQ(parse("2^3^2").eval(0, 0, 0), 512.0);
  EXPECT_EQ(parse("-2^2").eval(0, 0, 0), -4.0);
  EXPECT_EQ(parse("2^-1").eval(0, 0, 0), 0.5);
  EXPECT_EQ(parse("8/2/2").eval(0, 0, 0), 2.0);
  EXPECT_EQ(parse("5-2-1").eval(0, 0, 0), 2.0);
}

TEST(Expr, SyntaxErrorReportsOffset) {
  try {
    parse("x1 + * 2");
    FAIL() << "expected a syntax error";
  } catch (const ExprSyntaxError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_THROW(parse("(x1 + 2"), ExprSyntaxError);
  EXPECT_THROW(parse(""), ExprSyntaxError);
  EXPECT_THROW(parse("x1 x2"), ExprSyntaxError);
  EXPECT_THROW(parse("sin x1"), ExprSyntaxError);
}

TEST(Expr, NonAsciiIsRejectedAtItsOffset) {
  try {
    parse("x1 \xc3\x97 2");
    FAIL() << "expected a syntax error";
  } catch (const ExprSyntaxError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(Expr, UnknownIdentifierIsNamed) {
  try {
    parse("x1 + y");
    FAIL() << "expected an unknown identifier";
  } catch (const UnknownIdentifierError& e) {
    EXPECT_EQ(e.name(), "y");
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_THROW(parse("foo(x1)"), UnknownIdentifierError);
}

TEST(Expr, DomainErrorsRaiseEvalError) {
  EXPECT_THROW(parse("1/x1").eval(0, 0.0, 0), EvalError);
  EXPECT_THROW(parse("log(x1)").eval(0, -1.0, 0), EvalError);
  EXPECT_THROW(parse("log(x1)").eval(0, 0.0, 0), EvalError);
  EXPECT_THROW(parse("sqrt(x1)").eval(0, -1e-3, 0), EvalError);
  EXPECT_THROW(parse("exp(x1)").eval(0, 1000.0, 0), EvalError);
  EXPECT_THROW(parse("x1^2").eval(0, 1e200, 0), EvalError);
  EXPECT_NO_THROW(parse("sqrt(x1)").eval(0, 0.0, 0));
}

TEST(Expr, CopiesShareBehaviour) {
  const Expr a = parse("x1 + t");
  const Expr b = a;
  EXPECT_EQ(a.eval(1, 2, 3), b.eval(1, 2, 3));
  EXPECT_EQ(b.source(), "x1 + t");
}

TEST(Expr, ConstantPrintsAndReparses) {
  const Expr c = Expr::constant(-0.1);
  EXPECT_EQ(parse(c.print()).eval(0, 0, 0), -0.1);
}

// Random expression trees for the print/parse round trip.
namespace {

std::string random_expr(Engine& e, int depth) {
  if (depth == 0 || uniform_int(e, 0, 3) == 0) {
    switch (uniform_int(e, 0, 4)) {
      case 0: return "x1";
      case 1: return "x2";
      case 2: return "t";
      default: return std::to_string(uniform_int(e, 1, 9)) + "." + std::to_string(uniform_int(e, 0, 99));
    }
  }
  const std::string a = random_expr(e, depth - 1);
  switch (uniform_int(e, 0, 8)) {
    case 0: return a + " + " + random_expr(e, depth - 1);
    case 1: return a + " - " + random_expr(e, depth - 1);
    case 2: return a + "*" + random_expr(e, depth - 1);
    case 3: return "-" + a;
    case 4: return "(" + a + ")^2";
    case 5: return "sin(" + a + ")";
    case 6: return "tanh(" + a + ")";
    case 7: return "abs(" + a + ")";
    default: return "cos(" + a + ")*(" + random_expr(e, depth - 1) + ")";
  }
}

}  // namespace

TEST(ExprProperty, PrintParseRoundTripEvaluatesIdentically) {
  Engine e(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string src = random_expr(e, 4);
    const Expr a = parse(src);
    const Expr b = parse(a.print());
    EXPECT_EQ(b.print(), a.print()) << src;
    for (int k = 0; k < 100; ++k) {
      const double t = uniform(e, 0, 1), x1 = uniform(e, -1, 1), x2 = uniform(e, -1, 1);
      const double va = a.eval(t, x1, x2), vb = b.eval(t, x1, x2);
      EXPECT_LE(std::abs(va - vb), 1e-15 * std::max(1.0, std::abs(va))) << src;
    }
  }
}

TEST(ExprProperty, SumOfProductFollowsPrecedence) {
  Engine e(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = uniform(e, -5, 5), b = uniform(e, -5, 5), c = uniform(e, -5, 5);
    const std::string src = std::to_string(a) + " + " + std::to_string(b) + "*" + std::to_string(c);
    const double want = std::stod(std::to_string(a)) + std::stod(std::to_string(b)) * std::stod(std::to_string(c));
    EXPECT_DOUBLE_EQ(parse(src).eval(0, 0, 0), want) << src;
  }
}
