#include "refinery/prog_lang.hpp"
#include "refinery/spec_eval.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace refinery;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(REFINERY_SOURCE_DIR) + "/tests/fixtures/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Env sqrt_env() {
  return Env({{"x", SpecType::real(), ParamRole::Variant},
              {"y", SpecType::real(), ParamRole::Variant},
              {"N", SpecType::real(), ParamRole::Constant},
              {"e", SpecType::real(), ParamRole::Constant}});
}

}  // namespace

TEST(ProgParse, Pass) {
  auto p = parse_program("pass");
  EXPECT_EQ(render_program(p), "pass\n");
  EXPECT_EQ(normalize(p).kind, Statement::Kind::Pass);
}

TEST(ProgParse, SqrtLoopShape) {
  auto p = normalize(parse_program(fixture("sqrt_refined.py")));
  ASSERT_EQ(p.kind, Statement::Kind::Seq);
  ASSERT_EQ(p.body.size(), 3u);
  const Statement& loop = p.body[2];
  ASSERT_EQ(loop.kind, Statement::Kind::While);
  EXPECT_EQ(render_prog_expr(loop.expr), "y > x + e");
  const Statement& branch = loop.body.front();
  ASSERT_EQ(branch.kind, Statement::Kind::If);
  EXPECT_EQ(branch.body.front().kind, Statement::Kind::Assign);
  EXPECT_EQ(branch.orelse.front().kind, Statement::Kind::Assign);
  EXPECT_EQ(render_program(p), fixture("sqrt_refined.py"));
}

TEST(ProgParse, AssertNode) {
  auto p = normalize(parse_program("assert x != (x + N/x) / 2"));
  ASSERT_EQ(p.kind, Statement::Kind::Assert);
  EXPECT_EQ(render_prog_expr(p.expr), "x != (x + N / x) / 2");
}

TEST(ProgParse, ProceduresArraysAndSemicolons) {
  auto p = parse_program("def inc(k: nat):\n    a[k] = a[k] + 1\ni = 0; inc(i)\nb = a[0:2]\n");
  auto n = normalize(p);
  ASSERT_EQ(n.body.size(), 4u);
  EXPECT_EQ(n.body[0].kind, Statement::Kind::Def);
  EXPECT_EQ(n.body[2].kind, Statement::Kind::Call);
  EXPECT_EQ(render_program(n), "def inc(k: nat):\n    a[k] = a[k] + 1\ni = 0\ninc(i)\nb = a[0:2]\n");
}

TEST(ProgParse, Errors) {
  try {
    parse_program("x = 1\nwhile x > 0\n    x = x - 1\n");
    FAIL();
  } catch (const ProgSyntaxError& err) {
    EXPECT_EQ(err.line(), 2);
  }
  EXPECT_THROW(parse_program("while x:\nx = 1\n"), ProgSyntaxError);
  EXPECT_THROW(parse_program("x = = 1"), ProgSyntaxError);
  EXPECT_THROW(parse_program("x = 1\n    y = 2\n"), ProgSyntaxError);
}

TEST(ProgParse, RoundTripGenerated) {
  std::mt19937 rng(11);
  std::function<std::string(int)> expr = [&](int d) -> std::string {
    static const char* leaves[] = {"x", "y", "N", "1", "2", "0.5", "a[i]"};
    static const char* ops[] = {"+", "-", "*", "/"};
    if (d == 0) return leaves[rng() % 7];
    switch (rng() % 3) {
      case 0: return "(" + expr(d - 1) + ")";
      case 1: return "-" + expr(d - 1);
      default: return expr(d - 1) + " " + ops[rng() % 4] + " " + expr(d - 1);
    }
  };
  std::function<std::string(int)> cond = [&](int d) -> std::string {
    static const char* rels[] = {"<", "<=", "==", "!=", ">", ">="};
    if (d == 0) return expr(2) + " " + rels[rng() % 6] + " " + expr(2);
    switch (rng() % 3) {
      case 0: return "not (" + cond(d - 1) + ")";
      case 1: return "(" + cond(d - 1) + ") and (" + cond(d - 1) + ")";
      default: return "(" + cond(d - 1) + ") or (" + cond(d - 1) + ")";
    }
  };
  std::function<std::string(int, int)> prog = [&](int d, int indent) -> std::string {
    std::string pad(indent * 4, ' ');
    std::string out;
    int n = 1 + rng() % 3;
    for (int k = 0; k < n; ++k) {
      switch (d == 0 ? 0 : rng() % 4) {
        case 0: out += pad + "x = " + expr(2) + "\n"; break;
        case 1: out += pad + "while " + cond(1) + ":\n" + prog(d - 1, indent + 1); break;
        case 2:
          out += pad + "if " + cond(1) + ":\n" + prog(d - 1, indent + 1) + pad + "else:\n" + prog(d - 1, indent + 1);
          break;
        default: out += pad + "assert " + cond(1) + "\n"; break;
      }
    }
    return out;
  };
  for (int k = 0; k < 200; ++k) {
    auto p = normalize(parse_program(prog(3, 0)));
    auto text = render_program(p);
    EXPECT_EQ(normalize(parse_program(text)), p) << text;
  }
}

TEST(Interpret, SqrtBisectionExact) {
  auto p = parse_program(fixture("sqrt_refined.py"));
  auto out = interpret(p, {{"N", Rational(4)}, {"e", Rational(1, 2)}});
  ASSERT_EQ(out.status, RunOutcome::Status::Completed);
  // independently simulated with Python fractions
  EXPECT_EQ(out.final_state.at("x"), Value(Rational(15, 8)));
  EXPECT_EQ(out.final_state.at("y"), Value(Rational(35, 16)));
  auto post = parse_formula("x*x <= N < y*y /\\ y <= x+e", sqrt_env());
  EXPECT_TRUE(holds(post, out.final_state, {}, DomainSpec{}));
}

TEST(Interpret, PassKeepsState) {
  Valuation in{{"x", Rational(3)}, {"a", ArrayValue{Value(1)}}};
  auto out = interpret(parse_program("pass"), in);
  EXPECT_EQ(out.final_state, in);
}

TEST(Interpret, FixedPointAssertInBinary64) {
  auto p = parse_program(fixture("newton_unguarded.py"));
  RunOptions opts;
  opts.binary64 = true;
  auto out = interpret(p, {{"N", Rational(5)}}, opts);
  ASSERT_EQ(out.status, RunOutcome::Status::AssertFailed);
  EXPECT_EQ(out.location, "line 4: assert x != (x + N / x) / 2");
  double x = out.failing_state.at("x").as_double();
  EXPECT_GT(x * x, 5.0);
}

TEST(Interpret, StepLimitAndErrors) {
  RunOptions opts;
  opts.step_limit = 100;
  auto out = interpret(parse_program("while true:\n    pass\n"), {}, opts);
  EXPECT_EQ(out.status, RunOutcome::Status::StepLimit);
  EXPECT_THROW(interpret(parse_program("x = 1 / 0"), {}), InterpretError);
  EXPECT_THROW(interpret(parse_program("x = a[3]"), {{"a", ArrayValue{Value(1)}}}), InterpretError);
  try {
    interpret(parse_program("f(1)"), {});
    FAIL();
  } catch (const InterpretError& err) {
    EXPECT_EQ(err.kind(), InterpretError::Kind::UndefinedProcedure);
  }
}

TEST(Interpret, ExactNewtonStopsAtSizeLimit) {
  // Rational Newton steps for sqrt(2) never reach x*x <= 2 and double in size.
  auto p = parse_program(fixture("newton_unguarded.py"));
  auto out = interpret(p, {{"N", Value(2)}});
  EXPECT_EQ(out.status, RunOutcome::Status::SizeLimit);
  EXPECT_LT(out.steps, 100u);
}

TEST(Interpret, ProceduresAreCallByValue) {
  auto p = parse_program("def bump(k):\n    k = k + 1\n    total = total + k\ntotal = 0\nk = 10\nbump(k)\nbump(k)\n");
  auto out = interpret(p, {});
  EXPECT_EQ(out.final_state.at("k"), Value(10));
  EXPECT_EQ(out.final_state.at("total"), Value(22));
}

TEST(Interpret, ArrayStore) {
  auto out = interpret(parse_program("a[1] = 7"), {{"a", ArrayValue{Value(1), Value(2)}}});
  EXPECT_EQ(render_value(out.final_state.at("a")), "[1, 7]");
}

TEST(Interpret, Deterministic) {
  auto p = parse_program(fixture("sqrt_refined.py"));
  Valuation in{{"N", Rational(2)}, {"e", Rational(1, 4)}};
  auto a = interpret(p, in);
  auto b = interpret(p, in);
  EXPECT_EQ(a.final_state, b.final_state);
  EXPECT_EQ(a.steps, b.steps);
}

TEST(Lift, Examples) {
  auto env = sqrt_env();
  auto g = prog_expr_to_spec(parse_prog_expr("(x+y)/2*(x+y)/2 > N"), env);
  EXPECT_EQ(g, parse_formula("(x+y)/2*(x+y)/2 > N", env));
  EXPECT_EQ(prog_expr_to_spec(parse_prog_expr("true"), env), SpecExpr::boolean(true));
  Env aenv({{"a", SpecType::array(SpecType::integer()), ParamRole::Variant}, {"i", SpecType::nat(), ParamRole::Variant}});
  EXPECT_EQ(render_spec_expr(prog_expr_to_spec(parse_prog_expr("a[i] != 0"), aenv)), "a[i] <> 0");
}

TEST(Lift, AgreesWithInterpreter) {
  // division-free, slice-free expressions evaluate identically both ways
  std::mt19937 rng(3);
  auto env = sqrt_env();
  std::function<std::string(int)> term = [&](int d) -> std::string {
    static const char* leaves[] = {"x", "y", "N", "1", "3", "0.5"};
    static const char* ops[] = {"+", "-", "*"};
    if (d == 0) return leaves[rng() % 6];
    return "(" + term(d - 1) + " " + ops[rng() % 3] + " " + term(d - 1) + ")";
  };
  std::function<std::string(int)> cond = [&](int d) -> std::string {
    static const char* rels[] = {"<", "<=", "==", "!=", ">", ">="};
    if (d == 0) return term(2) + " " + rels[rng() % 6] + " " + term(2);
    return rng() % 2 ? "not (" + cond(d - 1) + ")" : "(" + cond(d - 1) + ") and (" + cond(d - 1) + ")";
  };
  std::vector<Rational> grid = {Rational(-1), Rational(0), Rational(1, 2), Rational(2)};
  for (int k = 0; k < 100; ++k) {
    auto e = parse_prog_expr(cond(2));
    auto s = prog_expr_to_spec(e, env);
    for (const auto& x : grid)
      for (const auto& n : grid) {
        Valuation v{{"x", x}, {"y", Rational(3, 2)}, {"N", n}, {"e", Rational(1)}};
        EXPECT_EQ(eval_prog_expr(e, v), eval_spec(s, v, v, DomainSpec{})) << render_prog_expr(e);
      }
  }
}

TEST(RunTests, SqrtFiveCases) {
  auto tf = parse_test_file(
      "constants: (N:float) (e:float)\n"
      "variants: (x:float) (y:float)\n"
      "check: x*x <= N < y*y /\\ y <= x+e\n"
      "input: N = 0, e = 1/2\n"
      "input: N = 1/2, e = 1/2\n"
      "input: N = 1, e = 1/4\n"
      "input: N = 2, e = 1/2\n"
      "input: N = 4, e = 1/8\n");
  ASSERT_EQ(tf.cases.size(), 5u);
  auto report = run_tests(parse_program(fixture("sqrt_refined.py")), tf.cases);
  EXPECT_EQ(report.passed(), 5u);
}

TEST(RunTests, EmptyIsPass) {
  auto report = run_tests(parse_program("pass"), {});
  EXPECT_TRUE(report.cases.empty());
  EXPECT_TRUE(report.all_passed());
}

TEST(RunTests, BuggyUpperBoundFails) {
  std::string buggy = fixture("sqrt_refined.py");
  buggy.replace(buggy.find("y = N + 1"), 9, "y = N");
  auto tf = parse_test_file(
      "constants: (N:float) (e:float)\nvariants: (x:float) (y:float)\n"
      "check: x*x <= N < y*y /\\ y <= x+e\ninput: N = 1/2, e = 1/2\n");
  auto report = run_tests(parse_program(buggy), tf.cases);
  ASSERT_EQ(report.cases.size(), 1u);
  EXPECT_FALSE(report.cases[0].passed);
}

TEST(RunTests, PerCaseCheckAndInitialValues) {
  auto tf = parse_test_file(
      "variants: (x:int)\n"
      "check: x = x_0 + 1\n"
      "input: x = 1\n"
      "input: x = 5\n"
      "check: x = 7\n");
  auto report = run_tests(parse_program("x = x + 1"), tf.cases);
  EXPECT_TRUE(report.cases[0].passed);
  EXPECT_FALSE(report.cases[1].passed);
}
