#include "refinery/refinement.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace refinery;

namespace {

const char* kSqrtSpec = R"(name: sqrt
constants: (N:float)(e:float)
variants: (x:float)(y:float)
pre: N >= 0 /\ e > 0
post: x*x <= N < y*y /\ y <= x+e
domain: float: 0, 1/2, 1, 2, 4
domain: e: 1/2
)";

const std::vector<std::string> kSqrtScript = {
    "seq mid: x*x <= N < y*y",
    "assign x := 0, y := N + 1",
    "iterate I: x*x <= N < y*y G: y > x + e V: y - x",
    "ifelse G: (x + y) / 2 * (x + y) / 2 > N",
    "assign y := (x + y) / 2",
    "assign x := (x + y) / 2",
};

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(REFINERY_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

VerifierConfig bounded_only(const SpecFile& f) {
  VerifierConfig cfg;
  cfg.order = {"bounded"};
  cfg.domains = f.domains;
  return cfg;
}

void run_script(SpecTree& t, const std::vector<std::string>& lines, const VerifierConfig& cfg,
                const std::vector<ProcedureEntry>* lib = nullptr) {
  for (const auto& l : lines) {
    auto p = t.leftmost_open();
    ASSERT_TRUE(p.has_value()) << l;
    t.apply(*p, l, lib);
    t.verify(*p, cfg);
  }
}

// Small statement `frame: [pre, post]` over int variables x, y and constant K.
SpecStatement stmt(const std::string& pre, const std::string& post) {
  SpecStatement s;
  s.frame = {{"x", SpecType::integer(), ParamRole::Variant}, {"y", SpecType::integer(), ParamRole::Variant}};
  s.constants = {{"K", SpecType::integer(), ParamRole::Constant}};
  Env env = s.env(nullptr);
  s.pre = parse_formula(pre, env);
  s.post = parse_formula(post, env);
  return s;
}

SpecExpr f(const std::string& text, const SpecStatement& s) { return parse_formula(text, s.env(nullptr)); }

RefinementStep step(const SpecStatement& s, const std::string& line, SchemeContext ctx = {}) {
  return apply_scheme(s, parse_law(line, s.env(nullptr)), ctx);
}

void expect_obligation(const ProofObligation& ob, const std::string& hyp, const std::string& concl,
                       const SpecStatement& s) {
  EXPECT_EQ(ob.hypothesis, f(hyp, s)) << render_spec_expr(ob.hypothesis);
  EXPECT_EQ(ob.conclusion, f(concl, s)) << render_spec_expr(ob.conclusion);
}

}  // namespace

TEST(SpecFile, ParsesSectionsAndRoundTrips) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  EXPECT_EQ(sf.name, "sqrt");
  ASSERT_EQ(sf.statement.frame.size(), 2u);
  ASSERT_EQ(sf.statement.constants.size(), 2u);
  EXPECT_EQ(render_spec_expr(sf.statement.pre), "N >= 0 /\\ e > 0");
  SpecFile again = parse_spec_file(render_spec_file(sf));
  EXPECT_EQ(again.statement.pre, sf.statement.pre);
  EXPECT_EQ(again.statement.post, sf.statement.post);
  EXPECT_EQ(again.domain_directives, sf.domain_directives);
}

TEST(SpecFile, ReportsLineOfBadFormula) {
  try {
    parse_spec_file("variants: (x:int)\npre: x >\npost: x = 1\n");
    FAIL();
  } catch (const SpecFileError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(SpecFile, RejectsInitialValuesInPrecondition) {
  EXPECT_THROW(parse_spec_file("variants: (x:int)\npre: x = x_0\npost: x = 1\n"), SpecFileError);
}

TEST(Law, ScriptLinesRoundTrip) {
  SpecStatement s = stmt("x >= 0", "x = K");
  Env env = s.env(nullptr);
  for (std::string line : {"skip", "seq mid: x = 0", "flexseq A: x >= 0 B: x = 0 C: x = 0 D: x = K",
                           "assign x := x + 1, y := K", "follow y := 2", "ifelse G: x < K",
                           "iterate I: x <= K G: x < K V: K - x", "iterate I: x <= K G: x < K V: K - x mode: flexible",
                           "expand (t:int) init: 3", "call f(x + 1, K)"}) {
    RefinementLaw law = parse_law(line, env);
    std::string text = render_law(law);
    RefinementLaw again = parse_law(text, env);
    EXPECT_EQ(render_law(again), text) << line;
  }
}

TEST(Law, RejectsIllTypedParameters) {
  SpecStatement s = stmt("x >= 0", "x = K");
  Env env = s.env(nullptr);
  EXPECT_THROW(parse_law("ifelse G: x + 1", env), LawError);
  EXPECT_THROW(parse_law("assign z := 1", env), LawError);
  EXPECT_THROW(parse_law("seq mid: x +", env), LawError);
  EXPECT_THROW(parse_law("teleport x", env), LawError);
  EXPECT_THROW(parse_law("expand (x:int)", env), LawError);
}

TEST(Scheme, SkipObligation) {
  SpecStatement s = stmt("x = K", "x = K");
  auto st = step(s, "skip");
  EXPECT_TRUE(st.children.empty());
  EXPECT_EQ(render_program(st.code), "pass\n");
  ASSERT_EQ(st.obligations.size(), 1u);
  expect_obligation(st.obligations[0], "x = x_0 /\\ y = y_0 /\\ x = K", "x = K", s);
}

TEST(Scheme, SeqSplitsAtMid) {
  SpecStatement s = stmt("x >= 0", "x = K");
  auto st = step(s, "seq mid: x = 0");
  ASSERT_EQ(st.children.size(), 2u);
  EXPECT_EQ(st.children[0].pre, f("x >= 0", s));
  EXPECT_EQ(st.children[0].post, f("x = 0", s));
  EXPECT_EQ(st.children[1].pre, f("x = 0", s));
  EXPECT_EQ(st.children[1].post, f("x = K", s));
  EXPECT_TRUE(st.obligations.empty());
  EXPECT_THROW(step(stmt("x >= 0", "x = x_0"), "seq mid: x = 0"), LawError);
}

TEST(Scheme, FlexSeqObligations) {
  SpecStatement s = stmt("x >= 0", "x = K");
  auto st = step(s, "flexseq A: x >= 0 B: x = 0 C: x <= 0 D: x = K");
  ASSERT_EQ(st.children.size(), 2u);
  EXPECT_EQ(st.children[0].pre, f("x >= 0", s));
  EXPECT_EQ(st.children[1].post, f("x = K", s));
  ASSERT_EQ(st.obligations.size(), 3u);
  expect_obligation(st.obligations[0], "x >= 0", "x >= 0", s);
  expect_obligation(st.obligations[1], "x = 0", "x <= 0", s);
  expect_obligation(st.obligations[2], "x = K", "x = K", s);
}

TEST(Scheme, AssignSubstitutesSimultaneously) {
  SpecStatement s = stmt("x = K", "y = K /\\ x = x_0 + 1");
  auto st = step(s, "assign x := x + 1, y := x");
  ASSERT_EQ(st.obligations.size(), 1u);
  expect_obligation(st.obligations[0], "x = x_0 /\\ y = y_0 /\\ x = K", "x = K /\\ x + 1 = x_0 + 1", s);
  // Executing the code must behave like the simultaneous assignment.
  RunOutcome out = interpret(st.code, {{"x", Value(Rational(3))}, {"y", Value(Rational(0))}, {"K", Value(Rational(3))}});
  EXPECT_EQ(render_value(out.final_state.at("x")), "4");
  EXPECT_EQ(render_value(out.final_state.at("y")), "3");
}

TEST(Scheme, SwapUsesTemporaries) {
  SpecStatement s = stmt("true", "x = y_0 /\\ y = x_0");
  auto st = step(s, "assign x := y, y := x");
  RunOutcome out = interpret(st.code, {{"x", Value(Rational(1))}, {"y", Value(Rational(2))}});
  EXPECT_EQ(render_value(out.final_state.at("x")), "2");
  EXPECT_EQ(render_value(out.final_state.at("y")), "1");
}

TEST(Scheme, IndexedAssignUsesStore) {
  SpecStatement s;
  s.frame = {{"a", SpecType::array(SpecType::integer()), ParamRole::Variant}};
  Env env = s.env(nullptr);
  s.pre = parse_formula("len(a) > 0", env);
  s.post = parse_formula("a[0] = 7\n", env);
  auto st = apply_scheme(s, parse_law("assign a[0] := 7", env), {});
  ASSERT_EQ(st.obligations.size(), 1u);
  SpecExpr a = SpecExpr::reference(s.frame[0]);
  SpecExpr stored = SpecExpr::store(a, SpecExpr::number(0), SpecExpr::number(7));
  EXPECT_EQ(st.obligations[0].conclusion, equals(SpecExpr::select(stored, SpecExpr::number(0)), SpecExpr::number(7)));
  EXPECT_EQ(render_program(st.code), "a[0] = 7\n");
}

TEST(Scheme, FollowAssignLeavesSubstitutedChild) {
  SpecStatement s = stmt("x >= 0", "y = x + 1");
  auto st = step(s, "follow y := x + 1");
  ASSERT_EQ(st.children.size(), 1u);
  EXPECT_EQ(st.children[0].pre, f("x >= 0", s));
  EXPECT_EQ(st.children[0].post, f("x + 1 = x + 1", s));
  EXPECT_TRUE(st.obligations.empty());
  EXPECT_EQ(render_program(st.code), "<child 1>\ny = x + 1\n");
}

TEST(Scheme, IfElseStrengthensPreconditions) {
  SpecStatement s = stmt("true", "x >= 0");
  auto st = step(s, "ifelse G: x < 0");
  ASSERT_EQ(st.children.size(), 2u);
  EXPECT_EQ(st.children[0].pre, f("x < 0", s));
  EXPECT_EQ(st.children[1].pre, f("~(x < 0)", s));
  EXPECT_EQ(st.children[0].post, s.post);
  EXPECT_EQ(render_program(st.code), "if x < 0:\n    <child 1>\nelse:\n    <child 2>\n");
}

TEST(Scheme, IterateInitialised) {
  SpecStatement s = stmt("x = 0 /\\ K >= 0", "x = K");
  auto st = step(s, "iterate I: x <= K G: x < K V: K - x");
  ASSERT_EQ(st.children.size(), 2u);
  EXPECT_EQ(st.children[0].pre, s.pre);
  EXPECT_EQ(st.children[0].post, f("x <= K", s));
  EXPECT_EQ(st.children[1].pre, f("x <= K /\\ x < K", s));
  EXPECT_EQ(st.children[1].post, f("x <= K /\\ 0 <= K - x /\\ K - x < (K - x)_0", s));
  ASSERT_EQ(st.obligations.size(), 1u);
  expect_obligation(st.obligations[0], "x <= K /\\ ~(x < K)", "x = K", s);
  EXPECT_EQ(render_program(st.code), "<child 1>\nwhile x < K:\n    <child 2>\n");
}

TEST(Scheme, IterateSkipsEstablishingChildWhenPreIsInvariant) {
  SpecStatement s = stmt("x <= K", "x = K");
  auto st = step(s, "iterate I: x <= K G: x < K V: K - x");
  ASSERT_EQ(st.children.size(), 1u);
  EXPECT_EQ(render_program(st.code), "while x < K:\n    <child 1>\n");
}

TEST(Scheme, IterateFlexibleChecksDecreaseAtRuntime) {
  SpecStatement s = stmt("x <= K", "x = K");
  auto st = step(s, "iterate I: x <= K G: x < K V: K - x mode: flexible");
  ASSERT_EQ(st.children.size(), 1u);
  EXPECT_EQ(st.children[0].post, f("x <= K /\\ K - x < (K - x)_0", s));
  std::string code = render_program(st.code);
  EXPECT_NE(code.find("assert"), std::string::npos) << code;
}

TEST(Scheme, TraverseArrayFill) {
  SpecStatement s;
  s.frame = {{"a", SpecType::array(SpecType::integer()), ParamRole::Variant}};
  s.constants = {{"N", SpecType::nat(), ParamRole::Constant}};
  Env env = s.env(nullptr);
  s.pre = parse_formula("len(a) = N", env);
  s.post = parse_formula("forall (k:nat), k < N -> a[k] = 0", env);
  auto law = parse_law("traverse a i m: 0 n: N P: len(a) = N /\\ (forall (k:nat), k < i -> a[k] = 0)", env);
  auto st = apply_scheme(s, law, {});
  ASSERT_EQ(st.children.size(), 2u);
  Env inner = env.with({"i", SpecType::nat(), ParamRole::Constant});
  EXPECT_EQ(st.children[0].post, parse_formula("len(a) = N /\\ (forall (k:nat), k < 0 -> a[k] = 0)", inner));
  EXPECT_EQ(st.children[1].pre,
            parse_formula("0 <= i /\\ i < N /\\ len(a) = N /\\ (forall (k:nat), k < i -> a[k] = 0)", inner));
  EXPECT_EQ(st.children[1].post, parse_formula("len(a) = N /\\ (forall (k:nat), k < i + 1 -> a[k] = 0)", inner));
  ASSERT_EQ(st.obligations.size(), 2u);
  EXPECT_EQ(st.obligations[0].conclusion, parse_formula("0 <= N", env));
  EXPECT_EQ(st.obligations[1].conclusion, s.post);
  EXPECT_EQ(render_program(st.code), "<child 1>\ni = 0\nwhile i < N:\n    <child 2>\n    i = i + 1\n");
}

TEST(Scheme, ExpandAddsLocal) {
  SpecStatement s = stmt("true", "x = K");
  auto st = step(s, "expand (t:int) init: K");
  ASSERT_EQ(st.children.size(), 1u);
  ASSERT_EQ(st.children[0].frame.size(), 3u);
  EXPECT_EQ(st.children[0].frame[2].name, "t");
  Env inner = st.children[0].env(nullptr);
  EXPECT_EQ(st.children[0].post, parse_formula("x = K /\\ t = K", inner));
}

TEST(Scheme, CallNeedsLibraryEntry) {
  SpecStatement s = stmt("true", "x = K");
  EXPECT_THROW(step(s, "call nothing(K)"), LawError);
}

TEST(Refine, SqrtScriptExtractsReferenceProgram) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  run_script(t, kSqrtScript, bounded_only(sf));
  EXPECT_EQ(t.status("root"), NodeStatus::Closed);
  EXPECT_FALSE(t.leftmost_open().has_value());
  EXPECT_EQ(t.paths(), (std::vector<std::string>{"root", "1", "2", "2.1", "2.1.1", "2.1.2"}));
  Statement program = extract_program(t);
  EXPECT_EQ(program, normalize(parse_program(fixture("sqrt_refined.py"))));

  // The extracted program meets the postcondition on sample inputs.
  for (auto [n, e] : std::vector<std::pair<Rational, Rational>>{{0, Rational(1, 2)}, {2, Rational(1, 100)}, {9, 1}}) {
    RunOutcome out = interpret(program, {{"N", Value(n)}, {"e", Value(e)}});
    Valuation st = out.final_state;
    Rational x = std::get<Rational>(st.at("x").data), y = std::get<Rational>(st.at("y").data);
    EXPECT_TRUE(x * x <= n && n < y * y && y <= x + e);
  }
}

TEST(Refine, WrongInitialisationIsRefutedWithWitness) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  auto cfg = bounded_only(sf);
  t.apply("root", "seq mid: x*x <= N < y*y");
  t.apply("1", "assign x := 0, y := N");
  auto results = t.verify("1", cfg);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].status, VcStatus::Refuted);
  ASSERT_TRUE(results[0].counterexample.has_value());
  Rational n = std::get<Rational>(results[0].counterexample->at("N").data);
  EXPECT_LE(n * n, n);  // y := N fails exactly when N*N <= N
  EXPECT_EQ(t.status("1"), NodeStatus::Failed);
  EXPECT_EQ(t.status("root"), NodeStatus::Refined);

  t.backtrack("1", "refuted");
  ASSERT_EQ(t.node("1").history.size(), 1u);
  EXPECT_EQ(t.node("1").history[0].law, "assign x := 0, y := N");
  t.apply("1", "assign x := 0, y := N + 1");
  t.verify("1", cfg);
  EXPECT_EQ(t.status("1"), NodeStatus::Closed);
}

TEST(Refine, BacktrackRestoresTree) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  std::string before = tree_to_json(t);
  t.apply("2", "iterate I: x*x <= N < y*y G: y > x + e V: y - x");
  t.apply("2.1", "ifelse G: (x + y) / 2 * (x + y) / 2 > N");
  t.backtrack("2", "test");
  auto without_history = [](const std::string& text) {
    auto j = nlohmann::json::parse(text);
    for (auto& n : j["nodes"]) n.erase("history");
    return j;
  };
  EXPECT_EQ(t.paths(), (std::vector<std::string>{"root", "1", "2"}));
  EXPECT_EQ(without_history(tree_to_json(t)), without_history(before));
  ASSERT_EQ(t.node("2").history.size(), 1u);
  EXPECT_FALSE(t.has("2.1.1"));
  EXPECT_THROW(t.apply("root", "skip"), NodeNotOpen);
}

TEST(Refine, ExtractionNeedsClosedRoot) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  EXPECT_THROW(extract_program(t), ExtractionError);
  EXPECT_THROW(extract_program(t, nullptr, true), ExtractionError);  // open holes
}

TEST(Library, SaveLookupAndCall) {
  auto dir = std::filesystem::temp_directory_path() / ("refinery_lib_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  run_script(t, kSqrtScript, bounded_only(sf));
  {
    Library lib(dir.string());
    lib.save(t, "sqrt");
    EXPECT_THROW(lib.save(t, "sqrt"), LibraryError);
  }
  Library lib(dir.string());
  ASSERT_EQ(lib.entries().size(), 1u);
  EXPECT_EQ(lib.entries()[0].program, normalize(parse_program(fixture("sqrt_refined.py"))));

  // Same shape with renamed constants matches, binding N -> M, e -> d.
  SpecFile caller = parse_spec_file(
      "constants: (M:float)(d:float)\nvariants: (x:float)(y:float)\n"
      "pre: M >= 0 /\\ d > 0\npost: x*x <= M < y*y /\\ y <= x+d\ndomain: float: 0, 1/2, 1, 2, 4\n");
  SchemeContext ctx;
  auto matches = lib.lookup(caller.statement, ctx);
  ASSERT_EQ(matches.size(), 1u);
  ASSERT_EQ(matches[0].args.size(), 2u);
  EXPECT_EQ(render_prog_expr(matches[0].args[0]), "M");
  EXPECT_EQ(render_prog_expr(matches[0].args[1]), "d");

  SpecTree ct(caller.statement, caller.definitions);
  run_script(ct, {"call sqrt(M, d)"}, bounded_only(caller), &lib.entries());
  EXPECT_EQ(ct.status("root"), NodeStatus::Closed);
  Statement program = extract_program(ct, &lib.entries());
  RunOutcome out = interpret(program, {{"M", Value(Rational(2))}, {"d", Value(Rational(1, 10))}});
  Rational x = std::get<Rational>(out.final_state.at("x").data), y = std::get<Rational>(out.final_state.at("y").data);
  EXPECT_TRUE(x * x <= 2 && 2 < y * y && y <= x + Rational(1, 10));

  // A different postcondition does not match.
  SpecFile other = parse_spec_file("constants: (M:float)\nvariants: (x:float)(y:float)\npre: M >= 0\npost: x = M\n");
  EXPECT_TRUE(lib.lookup(other.statement, ctx).empty());
  std::filesystem::remove_all(dir);
}
