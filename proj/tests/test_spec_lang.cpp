#include "refinery/spec_analysis.hpp"
#include "refinery/spec_eval.hpp"
#include "refinery/spec_syntax.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace refinery;

namespace {

Env sqrt_env() {
  return Env({{"x", SpecType::real(), ParamRole::Variant},
              {"y", SpecType::real(), ParamRole::Variant},
              {"N", SpecType::real(), ParamRole::Constant},
              {"e", SpecType::real(), ParamRole::Constant}});
}

Env array_env() {
  return Env({{"a", SpecType::array(SpecType::integer()), ParamRole::Variant},
              {"i", SpecType::nat(), ParamRole::Variant},
              {"y", SpecType::integer(), ParamRole::Variant}});
}

SpecExpr parse(const std::string& text, const Env& env) { return parse_spec_expr(text, env); }

}  // namespace

TEST(SpecParse, ConjunctionOfRelations) {
  auto e = parse("x*x <= N /\\ N < y*y", sqrt_env());
  ASSERT_EQ(e.kind(), ExprKind::And);
  EXPECT_EQ(e.arg(0).kind(), ExprKind::Le);
  EXPECT_EQ(e.arg(1).kind(), ExprKind::Lt);
  EXPECT_EQ(render_spec_expr(e), "x * x <= N /\\ N < y * y");
}

TEST(SpecParse, ChainedRelationDesugars) {
  auto env = sqrt_env();
  EXPECT_EQ(parse("x*x <= N < y*y", env), parse("x*x <= N /\\ N < y*y", env));
}

TEST(SpecParse, TrueLiteral) {
  auto e = parse("true", Env{});
  ASSERT_EQ(e.kind(), ExprKind::Bool);
  EXPECT_TRUE(e.bool_value());
}

TEST(SpecParse, QuantifierOverSelects) {
  auto e = parse("forall (i:nat), a[i] <= a[i+1]", array_env());
  ASSERT_EQ(e.kind(), ExprKind::Forall);
  EXPECT_EQ(e.body().arg(0).kind(), ExprKind::Select);
  EXPECT_EQ(parse(render_spec_expr(e), array_env()), e);
}

TEST(SpecParse, InitMarkers) {
  auto env = sqrt_env();
  auto e = parse("x = x_0", env);
  EXPECT_EQ(e.arg(1).kind(), ExprKind::Init);
  EXPECT_EQ(render_spec_expr(e.arg(1)), "x_0");
  auto v = parse("y - x < (y - x)_0", env);
  EXPECT_EQ(render_spec_expr(v), "y - x < (y - x)_0");
}

TEST(SpecParse, LeftAssociativeArithmetic) {
  auto e = parse("(x+y)/2*(x+y)/2 > N", sqrt_env());
  // ((((x+y)/2)*(x+y))/2) > N
  EXPECT_EQ(e.arg(0).kind(), ExprKind::Div);
  EXPECT_EQ(e.arg(0).arg(0).kind(), ExprKind::Mul);
}

TEST(SpecParse, Errors) {
  EXPECT_THROW(parse("x +", sqrt_env()), SpecSyntaxError);
  try {
    parse("z > 0", sqrt_env());
    FAIL();
  } catch (const UnknownIdentifier& err) {
    EXPECT_EQ(err.identifier(), "z");
  }
  try {
    parse("x >\n  )", sqrt_env());
    FAIL();
  } catch (const SpecSyntaxError& err) {
    EXPECT_EQ(err.line(), 2);
  }
}

TEST(SpecParse, RoundTripRandomTrees) {
  std::mt19937 rng(7);
  auto env = sqrt_env();
  std::vector<std::string> atoms = {"x", "y", "N", "e", "0", "1", "2", "x_0"};
  std::function<std::string(int)> term = [&](int depth) -> std::string {
    if (depth == 0) return atoms[rng() % atoms.size()];
    static const char* ops[] = {"+", "-", "*", "/"};
    switch (rng() % 4) {
      case 0: return "-" + term(depth - 1);
      case 1: return "(" + term(depth - 1) + ")";
      default: return term(depth - 1) + " " + ops[rng() % 4] + " " + term(depth - 1);
    }
  };
  std::function<std::string(int)> formula = [&](int depth) -> std::string {
    static const char* rels[] = {"<", "<=", "=", ">", ">=", "<>"};
    if (depth == 0) return term(2) + " " + rels[rng() % 6] + " " + term(2);
    switch (rng() % 6) {
      case 0: return "~" + formula(depth - 1);
      case 1: return "(" + formula(depth - 1) + " /\\ " + formula(depth - 1) + ")";
      case 2: return "(" + formula(depth - 1) + " \\/ " + formula(depth - 1) + ")";
      case 3: return "(" + formula(depth - 1) + " -> " + formula(depth - 1) + ")";
      case 4: return "(forall (k:int), k * x <= " + term(1) + " \\/ " + formula(depth - 1) + ")";
      default: return "(exists (k:float), " + formula(depth - 1) + ")";
    }
  };
  for (int n = 0; n < 300; ++n) {
    auto e = parse(formula(3), env);
    auto text = render_spec_expr(e);
    EXPECT_EQ(parse(text, env), e) << text;
  }
}

TEST(SpecRender, NestedQuantifierParenthesized) {
  auto env = sqrt_env();
  auto e = parse("x > 0 /\\ (forall (k:int), exists (j:int), k < j)", env);
  auto text = render_spec_expr(e);
  EXPECT_EQ(text, "x > 0 /\\ (forall (k:int), (exists (j:int), k < j))");
  EXPECT_EQ(parse(text, env), e);
}

TEST(Substitute, SqrtInitialisation) {
  auto env = sqrt_env();
  auto post = parse("x*x <= N /\\ N < y*y /\\ y <= x+e", env);
  auto out = substitute(post, {{"x", parse("0", env)}, {"y", parse("N+1", env)}});
  EXPECT_EQ(out, parse("0*0 <= N /\\ N < (N+1)*(N+1) /\\ N+1 <= 0+e", env));
}

TEST(Substitute, EmptyBindingsIdentity) {
  auto p = parse("x < y", sqrt_env());
  EXPECT_EQ(substitute(p, {}), p);
}

TEST(Substitute, CaptureAvoidance) {
  Env env({{"x", SpecType::integer(), ParamRole::Variant}, {"y", SpecType::integer(), ParamRole::Variant}});
  auto e = parse("exists (x:int), x > y", env);
  auto out = substitute(e, {{"y", SpecExpr::variable("x")}});
  EXPECT_EQ(render_spec_expr(out), "exists (x1:int), x1 > x");
}

TEST(Substitute, ConstantTargetRejected) {
  auto e = parse("N > 0", sqrt_env());
  EXPECT_THROW(substitute(e, {{"N", parse("1", sqrt_env())}}), SubstitutionError);
}

TEST(Substitute, InitUntouched) {
  auto env = sqrt_env();
  auto e = parse("x < x_0", env);
  EXPECT_EQ(substitute(e, {{"x", parse("y", env)}}), parse("y < x_0", env));
  EXPECT_EQ(init_vars(substitute(e, {{"x", parse("y", env)}})), std::set<std::string>{"x"});
}

TEST(Substitute, SoundnessOnGrid) {
  // eval(subst(e, x := E)) == eval(e) at v[x := eval(E)]
  auto env = sqrt_env();
  DomainSpec d;
  auto e = parse("x*x <= N /\\ (exists (k:int), k * e = y - x) \\/ y < x_0", env);
  std::vector<SpecExpr> repls = {parse("(x+y)/2", env), parse("N+1", env), parse("y", env)};
  std::vector<Rational> grid = {Rational(-1), Rational(0), Rational(1, 2), Rational(2)};
  for (const auto& r : repls)
    for (const auto& x : grid)
      for (const auto& y : grid)
        for (const auto& n : grid) {
          Valuation v{{"x", x}, {"y", y}, {"N", n}, {"e", Rational(1, 2)}};
          Valuation pre{{"x", Rational(1)}};
          Valuation shifted = v;
          shifted["x"] = eval_spec(r, v, pre, d);
          EXPECT_EQ(holds(substitute(e, {{"x", r}}), v, pre, d), holds(e, shifted, pre, d));
        }
}

TEST(FreeVars, Examples) {
  auto env = sqrt_env();
  EXPECT_EQ(free_vars(parse("x*x <= N", env)), (std::set<std::string>{"x", "N"}));
  EXPECT_EQ(free_vars(parse("forall (i:nat), a[i] = 0", array_env())), std::set<std::string>{"a"});
  EXPECT_EQ(free_vars(parse("x*x <= N /\\ N < y*y /\\ y <= x+e", env)),
            (std::set<std::string>{"x", "y", "N", "e"}));
}

TEST(TypeCheck, Examples) {
  auto env = sqrt_env();
  auto r = type_check(parse("N >= 0 /\\ e > 0", env), env);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.type->is_bool());

  auto bad = type_check(SpecExpr::binary(ExprKind::And, SpecExpr::boolean(true), SpecExpr::number(1)), Env{});
  ASSERT_FALSE(bad.ok());
  ASSERT_EQ(bad.issues.size(), 1u);
  EXPECT_EQ(bad.issues[0].at, "1");

  auto sel = type_check(parse("a[0] + 1", array_env()), array_env());
  ASSERT_TRUE(sel.ok());
  EXPECT_EQ(*sel.type, SpecType::integer());
}

TEST(TypeCheck, StableUnderSubstitution) {
  auto env = sqrt_env();
  auto post = parse("x*x <= N /\\ N < y*y", env);
  auto out = substitute(post, {{"x", parse("(x+y)/2", env)}});
  EXPECT_TRUE(type_check(out, env).ok());
}

TEST(TypeCheck, FloatIndexRejected) {
  Env env({{"a", SpecType::array(SpecType::integer()), ParamRole::Variant}, {"x", SpecType::real(), ParamRole::Variant}});
  EXPECT_THROW(parse("a[x] > 0", env), SpecTypeError);
}

TEST(Eval, Examples) {
  auto env = sqrt_env();
  DomainSpec d;
  Valuation half{{"N", Rational(1, 2)}, {"y", Rational(3, 2)}};
  EXPECT_TRUE(holds(parse("0*0 <= N", env), half, {}, d));
  Valuation v{{"x", Rational(3)}};
  EXPECT_TRUE(holds(parse("x = x_0", env), v, v, d));
  EXPECT_TRUE(holds(parse("N < y*y", env), half, {}, d));
}

TEST(Eval, Errors) {
  auto env = sqrt_env();
  DomainSpec d;
  Valuation v{{"x", Rational(1)}, {"y", Rational(0)}};
  try {
    eval_spec(parse("x / y", env), v, {}, d);
    FAIL();
  } catch (const EvalError& err) {
    EXPECT_EQ(err.kind(), EvalError::Kind::DivisionByZero);
  }
  Valuation arr{{"a", ArrayValue{Value(1), Value(2)}}, {"i", Rational(2)}, {"y", Rational(0)}};
  try {
    eval_spec(parse("a[i]", array_env()), arr, {}, d);
    FAIL();
  } catch (const EvalError& err) {
    EXPECT_EQ(err.kind(), EvalError::Kind::IndexOutOfBounds);
  }
  Env cenv({{"c", SpecType::character(), ParamRole::Variant}});
  try {
    eval_spec(SpecExpr::quantifier(ExprKind::Forall, "c", SpecType::character(), SpecExpr::boolean(true)), {}, {}, d);
    FAIL();
  } catch (const EvalError& err) {
    EXPECT_EQ(err.kind(), EvalError::Kind::UnboundedQuantifier);
  }
}

TEST(Eval, SlicesAndBuiltins) {
  auto env = array_env();
  DomainSpec d;
  Valuation v{{"a", ArrayValue{Value(4), Value(5), Value(6)}}, {"i", Rational(1)}, {"y", Rational(-7)}};
  EXPECT_EQ(render_value(eval_spec(parse("a[i:3]", env), v, {}, d)), "[5, 6]");
  EXPECT_EQ(render_value(eval_spec(parse("len(a[0:i])", env), v, {}, d)), "1");
  EXPECT_EQ(render_value(eval_spec(parse("mod(y, 3)", env), v, {}, d)), "2");
  EXPECT_TRUE(holds(parse("forall (k:nat), k < len(a) -> a[k] >= 4", env), v, {}, d));
}

TEST(Eval, Definitions) {
  Env base({{"n", SpecType::nat(), ParamRole::Variant}});
  auto defs = std::make_shared<Definitions>();
  auto def = parse_definition("even (k:nat) := mod(k, 2) = 0.", base);
  (*defs)[def.name] = def;
  Env env = base;
  env.definitions = defs;
  auto e = parse("even(n + 1)", env);
  DomainSpec d;
  EXPECT_TRUE(holds(e, {{"n", Rational(3)}}, {}, d, defs));
  EXPECT_FALSE(holds(e, {{"n", Rational(4)}}, {}, d, defs));
  EXPECT_EQ(render_spec_expr(expand_definitions(e, env)), "mod(n + 1, 2) = 0");
}

TEST(DivisionGuards, CollectsFreeDivisors) {
  auto env = sqrt_env();
  auto g = division_guards(parse("x / y > 0 /\\ (forall (k:int), k / x > 0 \\/ x / k > 0)", env));
  // k / x is guarded by x; x / k mentions the bound k and is not.
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(render_spec_expr(g[0]), "y");
  EXPECT_EQ(render_spec_expr(g[1]), "x");
}
