#include "refinery/spec_analysis.hpp"
#include "refinery/verifier.hpp"

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

ProofObligation obligation(const std::string& hyp, const std::string& concl, const Env& env) {
  ProofObligation ob;
  ob.label = "test";
  ob.env = env;
  ob.hypothesis = parse_formula(hyp, env);
  ob.conclusion = parse_formula(concl, env);
  return ob;
}

DomainSpec small_grid() {
  DomainSpec d;
  d.float_grid = {Rational(0), Rational(1, 2), Rational(1), Rational(2), Rational(4)};
  return d;
}

bool have_solver() {
  static bool ok = smt_available(SmtConfig{});
  return ok;
}

}  // namespace

TEST(Bounded, InitialAssignmentEstablishesInvariant) {
  auto ob = obligation("N >= 0", "0 * 0 <= N /\\ N < (N + 1) * (N + 1)", sqrt_env());
  auto r = check_bounded(ob, DomainSpec{});
  EXPECT_EQ(r.status, VcStatus::Proved) << r.reason;
}

TEST(Bounded, FirstCounterexampleOnGrid) {
  auto ob = obligation("N >= 0", "N * N >= N", sqrt_env());
  auto r = check_bounded(ob, small_grid());
  ASSERT_EQ(r.status, VcStatus::Refuted);
  ASSERT_TRUE(r.counterexample);
  EXPECT_EQ(render_value(r.counterexample->at("N")), "1/2");
  EXPECT_TRUE(validates(ob, *r.counterexample, small_grid()));
}

TEST(Bounded, ReflexiveEntailment) {
  auto env = sqrt_env();
  auto ob = obligation("x * x <= N /\\ N < y * y", "x * x <= N /\\ N < y * y", env);
  EXPECT_EQ(check_bounded(ob, DomainSpec{}).status, VcStatus::Proved);
}

TEST(Bounded, DivisionGuardsHypothesis) {
  // y / x is only meaningful where x <> 0
  auto ob = obligation("x > 0 \\/ x < 0", "y / x * x = y", sqrt_env());
  EXPECT_EQ(check_bounded(ob, DomainSpec{}).status, VcStatus::Proved);
}

TEST(Bounded, InitNamesAreEnumerated) {
  auto ob = obligation("x = x_0 + 1", "x > x_0", sqrt_env());
  EXPECT_EQ(check_bounded(ob, DomainSpec{}).status, VcStatus::Proved);
  auto bad = obligation("x = x_0 - 1", "x >= x_0", sqrt_env());
  auto r = check_bounded(bad, DomainSpec{});
  ASSERT_EQ(r.status, VcStatus::Refuted);
  EXPECT_TRUE(r.counterexample->count("x_0"));
  EXPECT_TRUE(validates(bad, *r.counterexample, DomainSpec{}));
}

TEST(Bounded, BudgetExceededIsUnknown) {
  DomainSpec d;
  d.budget = 10;
  auto ob = obligation("true", "x * y >= N", sqrt_env());
  auto r = check_bounded(ob, d);
  EXPECT_EQ(r.status, VcStatus::Unknown);
  EXPECT_NE(r.reason.find("budget"), std::string::npos);
}

TEST(Bounded, QuantifiedArrayProperty) {
  Env env({{"a", SpecType::array(SpecType::integer()), ParamRole::Variant}});
  auto ob = obligation("forall (i:nat), i + 1 < len(a) -> a[i] <= a[i + 1]", "len(a) < 2 \\/ a[0] <= a[1]", env);
  EXPECT_EQ(check_bounded(ob, DomainSpec{}).status, VcStatus::Proved);
}

TEST(Smtlib, ScriptDeclaresAndNegates) {
  auto ob = obligation("N >= 0", "N * N >= N", sqrt_env());
  std::string s = emit_smtlib(ob);
  EXPECT_NE(s.find("(declare-const |N| Real)"), std::string::npos);
  EXPECT_NE(s.find("(assert (not (>= (* |N| |N|) |N|)))"), std::string::npos);
  EXPECT_NE(s.find("(check-sat)"), std::string::npos);
}

TEST(Smtlib, NatGetsLowerBound) {
  Env env({{"i", SpecType::nat(), ParamRole::Variant}});
  auto s = emit_smtlib(obligation("true", "i >= 0", env));
  EXPECT_NE(s.find("(assert (>= |i| 0))"), std::string::npos);
}

TEST(Smt, ProvesTrueEntailment) {
  if (!have_solver()) GTEST_SKIP() << "no solver";
  auto ob = obligation("N >= 0", "0 * 0 <= N /\\ N < (N + 1) * (N + 1)", sqrt_env());
  EXPECT_EQ(check_smt(ob, SmtConfig{}).status, VcStatus::Proved);
}

TEST(Smt, RefutationModelValidates) {
  if (!have_solver()) GTEST_SKIP() << "no solver";
  auto ob = obligation("N >= 0", "N * N >= N", sqrt_env());
  auto r = check_smt(ob, SmtConfig{});
  ASSERT_EQ(r.status, VcStatus::Refuted);
  ASSERT_TRUE(r.counterexample);
  const Rational& n = r.counterexample->at("N").as_rational();
  EXPECT_TRUE(n > 0 && n < 1);
  EXPECT_TRUE(validates(ob, *r.counterexample, DomainSpec{}));
}

TEST(Smt, ArraysAndSlices) {
  if (!have_solver()) GTEST_SKIP() << "no solver";
  Env env({{"a", SpecType::array(SpecType::integer()), ParamRole::Variant},
           {"i", SpecType::nat(), ParamRole::Variant}});
  auto ok = obligation("0 < i /\\ i <= len(a)", "len(a[0:i]) = i /\\ a[1:i][0] = a[1]", env);
  EXPECT_EQ(check_smt(ok, SmtConfig{}).status, VcStatus::Proved);
  auto bad = obligation("len(a) = 2", "a[0] <= a[1]", env);
  auto r = check_smt(bad, SmtConfig{});
  ASSERT_EQ(r.status, VcStatus::Refuted);
  ASSERT_TRUE(r.counterexample);
  EXPECT_TRUE(validates(bad, *r.counterexample, DomainSpec{}));
}

TEST(Smt, MissingSolverIsUnknown) {
  SmtConfig cfg;
  cfg.command = "/nonexistent/solver";
  auto r = check_smt(obligation("N >= 0", "N >= 0", sqrt_env()), cfg);
  EXPECT_EQ(r.status, VcStatus::Unknown);
  EXPECT_FALSE(smt_available(cfg));
}

TEST(Portfolio, FallsBackToBoundedWithoutSolver) {
  VerifierConfig cfg;
  cfg.smt.command = "/nonexistent/solver";
  cfg.domains = small_grid();
  auto r = check(obligation("N >= 0", "N * N >= N", sqrt_env()), cfg);
  EXPECT_EQ(r.status, VcStatus::Refuted);
  EXPECT_EQ(r.backend, "bounded");
  auto p = check(obligation("N >= 0", "N >= 0", sqrt_env()), cfg);
  EXPECT_EQ(p.status, VcStatus::Proved);
}

TEST(Portfolio, IrrationalModelFallsBackNearby) {
  if (!have_solver()) GTEST_SKIP() << "no solver";
  // only witnesses are near +-sqrt 2, never on the default grid
  VerifierConfig cfg;
  auto ob = obligation("x * x > 1.9 /\\ x * x < 2.1", "false", sqrt_env());
  auto r = check(ob, cfg);
  ASSERT_EQ(r.status, VcStatus::Refuted) << r.reason;
  EXPECT_TRUE(validates(ob, *r.counterexample, cfg.domains));
}

TEST(Portfolio, BackendsAgreeOnRandomIntegerObligations) {
  if (!have_solver()) GTEST_SKIP() << "no solver";
  Env env({{"a", SpecType::integer(), ParamRole::Variant},
           {"b", SpecType::integer(), ParamRole::Variant},
           {"c", SpecType::integer(), ParamRole::Constant}});
  std::mt19937 rng(7);
  const char* names[] = {"a", "b", "c"};
  const char* rels[] = {"<", "<=", "=", "<>", ">="};
  auto atom = [&] {
    std::string lhs = std::string(names[rng() % 3]) + (rng() % 2 ? " + " + std::to_string(rng() % 3) : "");
    std::string rhs = rng() % 2 ? std::string(names[rng() % 3]) : std::to_string(static_cast<int>(rng() % 5) - 1);
    return lhs + " " + rels[rng() % 5] + " " + rhs;
  };
  int compared = 0;
  for (int n = 0; n < 60; ++n) {
    auto ob = obligation(atom() + " /\\ " + atom(), atom(), env);
    auto s = check_smt(ob, SmtConfig{});
    if (s.status == VcStatus::Unknown) continue;
    DomainSpec d;
    if (s.counterexample)
      for (const auto& [name, v] : *s.counterexample) {
        d.overrides[name] = d.carrier(SpecType::integer());
        d.overrides[name].push_back(v);
      }
    auto b = check_bounded(ob, d);
    if (s.status == VcStatus::Proved) {
      EXPECT_NE(b.status, VcStatus::Refuted) << ob.render();
    } else {
      ASSERT_TRUE(s.counterexample);
      EXPECT_TRUE(validates(ob, *s.counterexample, d)) << ob.render();
      EXPECT_EQ(b.status, VcStatus::Refuted) << ob.render();
    }
    ++compared;
  }
  EXPECT_GE(compared, 50);
}
