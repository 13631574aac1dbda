#include "refinery/oracle.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <thread>

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

const char* kSqrtScript = R"(# bisection law sequence
seq mid: x*x <= N < y*y
assign x := 0, y := N + 1
iterate I: x*x <= N < y*y G: y > x + e V: y - x
ifelse G: (x + y) / 2 * (x + y) / 2 > N
assign y := (x + y) / 2
assign x := (x + y) / 2
)";

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

struct DriveRun {
  DriveReport report;
  std::string program;
  std::vector<DriveEvent> events;
};

DriveRun drive(const SpecFile& sf, Oracle& oracle, DriveLimits limits = {}) {
  SpecTree t(sf.statement, sf.definitions);
  DriveRun r;
  r.report = drive_refinement(t, oracle, bounded_only(sf), limits, nullptr,
                              [&](const DriveEvent& e) { r.events.push_back(e); });
  if (r.report.outcome == DriveOutcome::FullyRefined) r.program = render_program(extract_program(t));
  return r;
}

// Always answers with a law over an undeclared name.
class IllTypedOracle : public Oracle {
 public:
  std::string name() const override { return "ill-typed"; }
  LawProposal propose(const OracleContext& ctx) override { return parse_proposal("assign z := 0", ctx); }
};

}  // namespace

TEST(Prompt, ContainsStatementAndLawMenu) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  OracleContext ctx = make_context(t, "root", nullptr, sf.domains, 3);
  std::string prompt = build_prompt(ctx);
  EXPECT_NE(prompt.find("pre: N >= 0 /\\ e > 0"), std::string::npos);
  EXPECT_NE(prompt.find("post: x * x <= N /\\ N < y * y /\\ y <= x + e"), std::string::npos);
  for (std::string law : {"skip", "seq mid:", "assign x := E", "ifelse G:", "iterate I:", "traverse l i"})
    EXPECT_NE(prompt.find(law), std::string::npos) << law;
  EXPECT_EQ(prompt.find("Previous failures"), std::string::npos);
  EXPECT_EQ(prompt, build_prompt(ctx));
}

TEST(Prompt, CarriesCounterexampleAfterRefutation) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  t.apply("1", "assign x := 0, y := N");
  t.verify("1", bounded_only(sf));
  t.backtrack("1", describe_failure(t.node("1").obligations[0]));
  std::string prompt = build_prompt(make_context(t, "1", nullptr, sf.domains, 2));
  EXPECT_NE(prompt.find("Previous failures"), std::string::npos);
  EXPECT_NE(prompt.find("assign x := 0, y := N"), std::string::npos);
  EXPECT_NE(prompt.find("counterexample N = "), std::string::npos) << prompt;
}

TEST(Proposal, ParsesFirstLawLine) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  OracleContext ctx = make_context(t, "1", nullptr, sf.domains, 3);
  LawProposal p = parse_proposal("assign x := 0, y := N + 1", ctx);
  EXPECT_EQ(p.law.kind, LawKind::Assign);
  EXPECT_EQ(p.law.bindings.size(), 2u);

  LawProposal chatty = parse_proposal("Here is my answer.\n1. `assign x := 0, y := N + 1`\nStart below and above.", ctx);
  EXPECT_EQ(chatty.text, "assign x := 0, y := N + 1");
  EXPECT_EQ(chatty.rationale, "Start below and above.");

  EXPECT_THROW(parse_proposal("", ctx), NoProposalFound);
  EXPECT_THROW(parse_proposal("I am not sure.", ctx), NoProposalFound);
  try {
    parse_proposal("assign z := 0", ctx);
    FAIL();
  } catch (const IllTypedProposal& e) {
    EXPECT_EQ(e.line(), "assign z := 0");
  }
}

TEST(Scripted, SqrtFullyRefined) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  ScriptedOracle oracle(kSqrtScript);
  DriveRun r = drive(sf, oracle);
  EXPECT_EQ(r.report.outcome, DriveOutcome::FullyRefined);
  EXPECT_EQ(r.report.refuted + r.report.unknown, 0u);
  EXPECT_EQ(r.report.proved, 4u);
  EXPECT_EQ(r.program, render_program(normalize(parse_program(fixture("sqrt_refined.py")))));
  std::vector<std::string> laws;
  for (const auto& e : r.events)
    if (e.kind == "apply") laws.push_back(e.text.substr(0, e.text.find(' ')));
  EXPECT_EQ(laws, (std::vector<std::string>{"seq", "assign", "iterate", "ifelse", "assign", "assign"}));
}

TEST(Scripted, DeterministicReports) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  ScriptedOracle a(kSqrtScript), b(kSqrtScript);
  DriveRun ra = drive(sf, a), rb = drive(sf, b);
  EXPECT_EQ(ra.report.render(), rb.report.render());
  EXPECT_EQ(ra.program, rb.program);
}

TEST(Scripted, WrongUpperBoundIsRetried) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  std::string script = kSqrtScript;
  script.replace(script.find("assign x := 0, y := N + 1"), 0, "assign x := 0, y := N\n");
  ScriptedOracle oracle(script);
  SpecTree t(sf.statement, sf.definitions);
  DriveReport rep = drive_refinement(t, oracle, bounded_only(sf), {});
  EXPECT_EQ(rep.outcome, DriveOutcome::FullyRefined);
  EXPECT_EQ(rep.refuted, 1u);
  EXPECT_EQ(rep.attempts.at("1"), 2);
  const auto& hist = t.node("1").history;
  ASSERT_EQ(hist.size(), 1u);
  EXPECT_EQ(hist[0].law, "assign x := 0, y := N");
  auto at = hist[0].reason.find("N = ");
  ASSERT_NE(at, std::string::npos) << hist[0].reason;
  std::string n = hist[0].reason.substr(at + 4, hist[0].reason.find(',', at) - at - 4);
  EXPECT_LT(*parse_rational(n), Rational(1)) << hist[0].reason;
}

TEST(Driver, ThreeFailuresFallBackToParentOnce) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  ScriptedOracle oracle(R"(@root seq mid: x*x <= N < y*y
@1 assign x := 0, y := 0
@1 assign x := 1, y := 0
@1 assign x := 0, y := N
@root seq mid: x*x <= N < y*y
@1 assign x := 0, y := N + 1
@2 iterate I: x*x <= N < y*y G: y > x + e V: y - x
@2.1 ifelse G: (x + y) / 2 * (x + y) / 2 > N
@2.1.1 assign y := (x + y) / 2
@2.1.2 assign x := (x + y) / 2
)");
  DriveRun r = drive(sf, oracle);
  EXPECT_EQ(r.report.outcome, DriveOutcome::FullyRefined);
  EXPECT_EQ(r.report.parent_backtracks, 1);
  EXPECT_EQ(r.report.refuted, 3u);
  std::map<std::string, int> want{{"root", 2}, {"1", 4}, {"2", 1}, {"2.1", 1}, {"2.1.1", 1}, {"2.1.2", 1}};
  EXPECT_EQ(r.report.attempts, want);
  int fallbacks = 0;
  for (const auto& e : r.events) fallbacks += e.kind == "fallback";
  EXPECT_EQ(fallbacks, 1);
}

TEST(Driver, IllTypedOracleExhaustsRoot) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  IllTypedOracle oracle;
  DriveRun r = drive(sf, oracle);
  EXPECT_EQ(r.report.outcome, DriveOutcome::Exhausted);
  EXPECT_EQ(r.report.total_attempts(), 3);
  EXPECT_EQ(r.report.parent_backtracks, 0);
}

TEST(Driver, ScriptExhaustionStops) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  ScriptedOracle oracle("seq mid: x*x <= N < y*y\n");
  DriveRun r = drive(sf, oracle);
  EXPECT_EQ(r.report.outcome, DriveOutcome::Exhausted);
  EXPECT_NE(r.report.reason.find("exhausted"), std::string::npos);
}

TEST(Driver, AcceptUnknownLeavesTreeUnverified) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  ScriptedOracle oracle(kSqrtScript);
  SpecTree t(sf.statement, sf.definitions);
  VerifierConfig cfg;
  cfg.order = {"smt"};
  cfg.smt.command = "/nonexistent/solver";
  DriveLimits limits;
  limits.accept_unknown = true;
  DriveReport rep = drive_refinement(t, oracle, cfg, limits);
  EXPECT_EQ(rep.outcome, DriveOutcome::Unverified);
  EXPECT_EQ(rep.unknown, 4u);
  EXPECT_NE(t.status("root"), NodeStatus::Closed);
}

TEST(Heuristic, SkipWhenPreIsPost) {
  SpecFile sf = parse_spec_file("variants: (x:int)\npre: x >= 0\npost: x >= 0\n");
  HeuristicOracle h;
  DriveRun r = drive(sf, h);
  EXPECT_EQ(r.report.outcome, DriveOutcome::FullyRefined);
  EXPECT_EQ(r.program, "pass\n");
}

TEST(Heuristic, TraverseOnRangedForall) {
  SpecFile sf = parse_spec_file(
      "constants: (N:nat)\nvariants: (a:array int)\npre: len(a) = N\n"
      "post: forall (k:nat), 0 <= k /\\ k < N -> a[k] = 0\ndomain: nat: 0..3\ndomain: int: -1..1\n");
  SpecTree t(sf.statement, sf.definitions);
  HeuristicOracle h;
  LawProposal p = h.propose(make_context(t, "root", nullptr, sf.domains, 3));
  EXPECT_EQ(p.law.kind, LawKind::Traverse) << p.text;
  EXPECT_EQ(p.law.list, "a");
}

TEST(Heuristic, LoopBodySuggestion) {
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  t.apply("2", "iterate I: x*x <= N < y*y G: y > x + e V: y - x");
  HeuristicOracle h;
  LawProposal p = h.propose(make_context(t, "2.1", nullptr, sf.domains, 3));
  EXPECT_TRUE(p.law.kind == LawKind::IfElse || p.law.kind == LawKind::Assign) << p.text;
  EXPECT_FALSE(t.node("2.1").law.has_value());
}

TEST(Heuristic, EqualityPostIsAssigned) {
  SpecFile sf = parse_spec_file("constants: (K:int)\nvariants: (x:int)(y:int)\npost: x = K + 1 /\\ y = x_0\n");
  HeuristicOracle h;
  DriveRun r = drive(sf, h);
  EXPECT_EQ(r.report.outcome, DriveOutcome::FullyRefined);
  RunOutcome out = interpret(parse_program(r.program), {{"K", Value(Rational(4))}, {"x", Value(Rational(9))}, {"y", Value(Rational(0))}});
  EXPECT_EQ(render_value(out.final_state.at("x")), "5");
  EXPECT_EQ(render_value(out.final_state.at("y")), "9");
}

TEST(Remote, SpeaksChatCompletion) {
  httplib::Server srv;
  nlohmann::json seen;
  std::string auth;
  srv.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "assign x := 0, y := N + 1\nbracket the root"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.key = "secret";
  cfg.model = "test-model";
  RemoteOracle oracle(cfg);
  OracleContext ctx = make_context(t, "1", nullptr, sf.domains, 3);
  LawProposal p = oracle.propose(ctx);
  srv.stop();
  th.join();

  EXPECT_EQ(p.text, "assign x := 0, y := N + 1");
  EXPECT_EQ(p.rationale, "bracket the root");
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(seen["model"], "test-model");
  ASSERT_EQ(seen["messages"].size(), 2u);
  EXPECT_EQ(seen["messages"][1]["role"], "user");
  EXPECT_EQ(seen["messages"][1]["content"], build_prompt(ctx));
}

TEST(Remote, UnreachableEndpointIsTransportError) {
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:1/v1/chat/completions";
  cfg.timeout_seconds = 2;
  RemoteOracle oracle(cfg);
  SpecFile sf = parse_spec_file(kSqrtSpec);
  SpecTree t(sf.statement, sf.definitions);
  EXPECT_THROW(oracle.propose(make_context(t, "root", nullptr, sf.domains, 3)), OracleTransportError);
  RemoteOracle unconfigured(RemoteConfig{});
  EXPECT_THROW(unconfigured.complete("x"), OracleTransportError);
}
