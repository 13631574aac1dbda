// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits non-zero when any check fails.
//
//   acceptance                      run every check
//   acceptance --regen-laws CASES   print law renderings for a cases file

#include "refinery/frontends.hpp"
#include "refinery/spec_eval.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace refinery;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kSource = REFINERY_SOURCE_DIR;
const fs::path kCorpus = kSource / "corpus";
const fs::path kFixtures = kSource / "tests" / "fixtures";

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Fails the check with `why` unless `cond` holds.
struct Checker {
  Outcome out;
  bool expect(bool cond, const std::string& why) {
    if (!cond && out.ok) {
      out.ok = false;
      out.detail = why;
    }
    return cond;
  }
};

std::vector<std::string> corpus_problems() {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(kCorpus))
    if (e.is_directory()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

const char* kSqrtScript =
    "seq mid: x*x <= N < y*y\n"
    "assign x := 0, y := N + 1\n"
    "iterate I: x*x <= N < y*y G: y > x + e V: y - x\n"
    "ifelse G: (x + y) / 2 * (x + y) / 2 > N\n"
    "assign y := (x + y) / 2\n"
    "assign x := (x + y) / 2\n";

// Bisection square root -------------------------------------------------------------------

Outcome sqrt_reproduction() {
  Checker c;
  auto t0 = Clock::now();
  std::string spec = slurp(kCorpus / "sqrt" / "sqrt.spec");
  std::string golden = slurp(kFixtures / "sqrt_refined.py");

  Settings smt_only;
  smt_only.backends = {"smt"};
  smt_only.solver_timeout = 10;
  ScriptedOracle oracle(kSqrtScript);
  RefineRun run = refine_spec(spec, oracle, smt_only);
  if (!c.expect(run.verifier.order == std::vector<std::string>{"smt"}, "no SMT solver answers")) return c.out;
  if (!c.expect(run.program.has_value(), "not fully refined: " + run.report.reason)) return c.out;
  c.expect(render_program(*run.program) == golden, "program differs from the reference listing");
  std::size_t n = 0;
  double slowest = 0;
  for (const auto* ob : run.tree->obligations()) {
    ++n;
    slowest = std::max(slowest, ob->result.elapsed_ms / 1000);
    c.expect(ob->result.status == VcStatus::Proved && ob->result.backend == "smt",
             ob->label + " is " + to_string(ob->result.status) + " [" + ob->result.backend + "]");
  }
  c.expect(n > 0, "no obligations");
  c.expect(slowest <= 10, "an obligation took " + std::to_string(slowest) + " s");

  // The grid checker alone must agree on every obligation.
  SpecFile f = parse_spec_file(spec);
  VerifierConfig bounded;
  bounded.order = {"bounded"};
  bounded.domains = f.domains;
  SpecTree t(f.statement, f.definitions);
  replay_script(t, kSqrtScript, bounded);
  for (const auto* ob : t.obligations())
    c.expect(ob->result.status == VcStatus::Proved, "bounded: " + ob->label + " is " + to_string(ob->result.status));
  c.expect(t.obligations().size() == n, "bounded run has a different obligation count");

  double secs = since(t0);
  c.expect(secs < 60, "took " + std::to_string(secs) + " s");
  if (c.out.ok) {
    std::ostringstream d;
    d << n << "/" << n << " obligations proved by smt and by the grid, program matches, " << std::fixed
      << std::setprecision(1) << secs << " s";
    c.out.detail = d.str();
  }
  return c.out;
}

Outcome wrong_bound_refutation() {
  Checker c;
  std::string spec = slurp(kCorpus / "sqrt" / "sqrt.spec");
  SpecFile f = parse_spec_file(spec);
  VerifierConfig cfg = make_verifier(Settings{}, f);

  SpecTree t(f.statement, f.definitions);
  t.apply("root", "seq mid: x*x <= N < y*y");
  t.apply("1", "assign x := 0, y := N");
  auto r = t.verify("1", cfg);
  if (!c.expect(r.size() == 1 && r[0].status == VcStatus::Refuted, "`y := N` was not refuted")) return c.out;
  if (!c.expect(r[0].counterexample.has_value(), "refutation without counterexample")) return c.out;
  const Valuation& cex = *r[0].counterexample;
  Rational n = cex.at("N").as_rational();
  c.expect(n < 1, "counterexample has N = " + render_value(cex.at("N")));
  c.expect(validates(t.node("1").obligations[0], cex, cfg.domains), "counterexample does not re-validate");
  std::string shown = render_valuation(cex);

  // Driven with the wrong line first, the corrected line then closes the tree.
  std::string script = kSqrtScript;
  script.insert(script.find("assign x := 0, y := N + 1"), "assign x := 0, y := N\n");
  ScriptedOracle oracle(script);
  SpecTree d(f.statement, f.definitions);
  DriveReport rep = drive_refinement(d, oracle, cfg, {});
  c.expect(rep.outcome == DriveOutcome::FullyRefined, "driver: " + to_string(rep.outcome));
  c.expect(rep.refuted == 1, "driver saw " + std::to_string(rep.refuted) + " refutations");
  c.expect(d.status("root") == NodeStatus::Closed, "tree not closed after the correction");
  if (c.out.ok) c.out.detail = "refuted with " + shown + " [" + r[0].backend + "], corrected script closes";
  return c.out;
}

// Corpus ------------------------------------------------------------------------------------

Outcome soundness() {
  Checker c;
  auto t0 = Clock::now();
  std::uint64_t points = 0, admitted = 0;
  auto names = corpus_problems();
  for (const auto& name : names) {
    fs::path base = kCorpus / name / name;
    Settings s;
    auto oracle = make_oracle("scripted", s, base.string() + ".refine");
    RefineRun run = refine_spec(slurp(base.string() + ".spec"), *oracle, s);
    if (!c.expect(run.program.has_value(), name + ": not fully refined")) continue;
    try {
      SoundnessResult r = check_exhaustively(run.spec, *run.program, run.verifier.domains, 10'000);
      points += r.points;
      admitted += r.admitted;
      c.expect(r.admitted > 0, name + ": no grid point satisfies pre");
      c.expect(r.passed == r.admitted, name + ": " + std::to_string(r.admitted - r.passed) + " failures, first " +
                                           (r.failures.empty() ? "" : r.failures.front()));
    } catch (const GridTooLarge& e) {
      c.expect(false, name + ": " + e.what());
    }
  }
  double secs = since(t0);
  c.expect(names.size() == 10, std::to_string(names.size()) + " problems in the corpus");
  c.expect(secs < 300, "took " + std::to_string(secs) + " s");
  if (c.out.ok) {
    std::ostringstream d;
    d << names.size() << " programs, " << admitted << " admitted of " << points << " grid points, all pass, "
      << std::fixed << std::setprecision(1) << secs << " s";
    c.out.detail = d.str();
  }
  return c.out;
}

Outcome eval_corpus() {
  Checker c;
  EvalReport r = run_eval(kCorpus.string(), Settings{});
  std::size_t n = r.rows.size();
  c.expect(n == 10, std::to_string(n) + " problems");
  c.expect(r.verified() == n, "verified " + std::to_string(r.verified()) + "/" + std::to_string(n));
  c.expect(r.tests_all_passed() == n, "tests passed " + std::to_string(r.tests_all_passed()) + "/" + std::to_string(n));
  c.expect(r.regressions() == 0, std::to_string(r.regressions()) + " verified problems lose passes when enlarged");
  c.expect(r.extended_all_passed() == n,
           "enlarged tests passed " + std::to_string(r.extended_all_passed()) + "/" + std::to_string(n));
  std::size_t base = 0, big = 0;
  for (const auto& row : r.rows) {
    base += row.tests_total;
    big += row.extended_total;
    c.expect(row.extended_total >= 10 * row.tests_total, row.name + ": enlarged set is not 10x");
  }
  if (c.out.ok)
    c.out.detail = "verified " + std::to_string(n) + "/" + std::to_string(n) + ", tests " + std::to_string(base) +
                   "/" + std::to_string(base) + ", enlarged " + std::to_string(big) + "/" + std::to_string(big);
  return c.out;
}

// Backends ------------------------------------------------------------------------------------

Outcome backend_agreement() {
  Checker c;
  if (!smt_available(SmtConfig{})) {
    c.expect(false, "no SMT solver answers");
    return c.out;
  }
  Env env({{"a", SpecType::integer(), ParamRole::Variant},
           {"b", SpecType::integer(), ParamRole::Variant},
           {"K", SpecType::integer(), ParamRole::Constant},
           {"p", SpecType::real(), ParamRole::Variant},
           {"q", SpecType::real(), ParamRole::Variant}});
  DomainSpec grid;
  grid.int_lo = -3;
  grid.int_hi = 3;
  grid.float_grid = {Rational(-1), Rational(-1, 2), Rational(0), Rational(1, 2), Rational(1), Rational(2)};

  std::mt19937 rng(20240611);
  auto pick = [&](std::initializer_list<const char*> xs) { return std::string(*(xs.begin() + rng() % xs.size())); };
  auto int_term = [&] {
    switch (rng() % 4) {
      case 0: return pick({"a", "b", "K"});
      case 1: return pick({"a", "b", "K"}) + " + " + std::to_string(rng() % 3);
      case 2: return pick({"a", "b"}) + " * " + pick({"a", "b", "K"});
      default: return std::to_string(static_cast<int>(rng() % 5) - 2);
    }
  };
  auto real_term = [&] {
    switch (rng() % 4) {
      case 0: return pick({"p", "q"});
      case 1: return pick({"p", "q"}) + " + " + pick({"1/2", "1", "2"});
      case 2: return pick({"p", "q"}) + " * " + pick({"p", "q"});
      default: return pick({"0", "1/2", "1", "2"});
    }
  };
  auto atom = [&] {
    std::string rel = pick({"<", "<=", "=", "<>", ">="});
    return rng() % 2 ? int_term() + " " + rel + " " + int_term() : real_term() + " " + rel + " " + real_term();
  };

  int compared = 0, generated = 0, refuted = 0;
  while (compared < 60 && generated < 400) {
    ++generated;
    ProofObligation ob;
    ob.label = "random " + std::to_string(generated);
    ob.env = env;
    std::string hyp = rng() % 3 ? atom() + " /\\ " + atom() : atom();
    ob.hypothesis = parse_formula(hyp, env);
    ob.conclusion = parse_formula(atom(), env);

    VcResult s = check_smt(ob, SmtConfig{});
    if (s.status == VcStatus::Unknown) continue;
    DomainSpec d = grid;
    if (s.counterexample) {
      if (!c.expect(validates(ob, *s.counterexample, d), "smt model does not re-validate: " + ob.render()))
        return c.out;
      for (const auto& [name, v] : *s.counterexample) {
        const TypedParam* param = env.find(name);
        if (!param) continue;
        auto carrier = d.carrier(param->type);
        if (std::find(carrier.begin(), carrier.end(), v) == carrier.end()) carrier.push_back(v);
        d.overrides[name] = carrier;
      }
    }
    VcResult b = check_bounded(ob, d);
    if (b.status == VcStatus::Refuted &&
        !c.expect(validates(ob, *b.counterexample, d), "grid counterexample does not re-validate: " + ob.render()))
      return c.out;
    if (s.status == VcStatus::Proved)
      c.expect(b.status != VcStatus::Refuted, "smt proved, grid refuted: " + ob.render());
    else
      c.expect(b.status == VcStatus::Refuted, "smt refuted, grid " + to_string(b.status) + ": " + ob.render());
    refuted += s.status == VcStatus::Refuted;
    ++compared;
  }
  c.expect(compared >= 50, "only " + std::to_string(compared) + " definitive smt answers");
  if (c.out.ok)
    c.out.detail = std::to_string(compared) + " obligations compared (" + std::to_string(refuted) +
                   " refuted), no contradictions, every counterexample re-validates";
  return c.out;
}

// Laws ------------------------------------------------------------------------------------------

ProcedureEntry setk_entry() {
  SpecFile f = parse_spec_file("name: setk\nconstants: (K:int)\nvariants: (x:int)\npre: true\npost: x = K\n");
  ProcedureEntry e;
  e.name = "setk";
  e.frame = f.statement.frame;
  e.params = f.statement.constants;
  e.pre = f.statement.pre;
  e.post = f.statement.post;
  e.program = parse_program("x = K\n");
  return e;
}

std::string indent(const std::string& text) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) out += "  " + line + "\n";
  return out;
}

// Children, code and obligations of one law applied at the root.
std::string render_case(const std::string& spec_text, const std::string& law) {
  static const std::vector<ProcedureEntry> library = {setk_entry()};
  SpecFile f = parse_spec_file(spec_text);
  SpecTree t(f.statement, f.definitions);
  auto children = t.apply("root", law, &library);
  const RefineNode& root = t.root();
  std::string out = "children:\n";
  for (const auto& p : children) out += "  " + p + " " + t.node(p).statement.render() + "\n";
  out += "code:\n" + indent(render_program(root.code));
  out += "obligations:\n";
  for (const auto& ob : root.obligations) out += "  " + ob.label + ": " + ob.render() + "\n";
  return out;
}

struct LawCase {
  std::string name, spec, law, expected;
};

std::vector<LawCase> read_cases(const std::string& text) {
  std::vector<LawCase> cases;
  std::istringstream in(text);
  std::string line;
  int section = 0;  // 0 spec, 1 expected
  while (std::getline(in, line)) {
    if (line.rfind("### ", 0) == 0) {
      cases.push_back({line.substr(4), "", "", ""});
      section = 0;
    } else if (cases.empty()) {
      continue;
    } else if (section == 0 && line.rfind("law: ", 0) == 0) {
      cases.back().law = line.substr(5);
      section = 1;
    } else {
      (section == 0 ? cases.back().spec : cases.back().expected) += line + "\n";
    }
  }
  return cases;
}

Outcome law_goldens() {
  Checker c;
  auto cases = read_cases(slurp(kFixtures / "laws.golden"));
  std::set<std::string> kinds;
  for (const auto& k : cases) {
    try {
      std::string got = render_case(k.spec, k.law);
      c.expect(got == k.expected, k.name + " differs:\n" + got);
      kinds.insert(k.law.substr(0, k.law.find(' ')));
    } catch (const std::exception& e) {
      c.expect(false, k.name + ": " + e.what());
    }
  }
  // skip/initskip and seq/flexseq are variants of one constructor each.
  std::set<std::string> families;
  for (const auto& k : kinds) families.insert(k == "initskip" ? "skip" : k == "flexseq" ? "seq" : k);
  c.expect(families.size() == 9, std::to_string(families.size()) + " law constructors covered");
  if (c.out.ok)
    c.out.detail = std::to_string(cases.size()) + " cases over " + std::to_string(families.size()) +
                   " constructors match the pinned renderings";
  return c.out;
}

// Driver -----------------------------------------------------------------------------------------

Outcome driver_fallback() {
  Checker c;
  SpecFile f = parse_spec_file(slurp(kCorpus / "sqrt" / "sqrt.spec"));
  VerifierConfig cfg = make_verifier(Settings{}, f);
  ScriptedOracle oracle(
      "@root seq mid: x*x <= N < y*y\n"
      "@1 assign x := 0, y := 0\n"
      "@1 assign x := 1, y := 0\n"
      "@1 assign x := 0, y := N\n"
      "@root seq mid: x*x <= N < y*y\n"
      "@1 assign x := 0, y := N + 1\n"
      "@2 iterate I: x*x <= N < y*y G: y > x + e V: y - x\n"
      "@2.1 ifelse G: (x + y) / 2 * (x + y) / 2 > N\n"
      "@2.1.1 assign y := (x + y) / 2\n"
      "@2.1.2 assign x := (x + y) / 2\n");
  SpecTree t(f.statement, f.definitions);
  DriveLimits limits;
  limits.retries = 3;
  int fallbacks = 0;
  DriveReport r = drive_refinement(t, oracle, cfg, limits, nullptr,
                                   [&](const DriveEvent& e) { fallbacks += e.kind == "fallback"; });
  std::map<std::string, int> want{{"root", 2}, {"1", 4}, {"2", 1}, {"2.1", 1}, {"2.1.1", 1}, {"2.1.2", 1}};
  c.expect(r.outcome == DriveOutcome::FullyRefined, "outcome " + to_string(r.outcome));
  c.expect(r.parent_backtracks == 1, std::to_string(r.parent_backtracks) + " parent backtracks");
  c.expect(fallbacks == 1, std::to_string(fallbacks) + " fallback events");
  c.expect(r.refuted == 3, std::to_string(r.refuted) + " refutations");
  c.expect(r.attempts == want, "attempt counts differ");
  if (c.out.ok) c.out.detail = "3 refutations at node 1, one fallback to root, attempts root=2 1=4 others=1";
  return c.out;
}

int regen(const std::string& path) {
  for (const auto& k : read_cases(slurp(path))) {
    std::cout << "### " << k.name << "\n" << k.spec << "law: " << k.law << "\n";
    std::cout << render_case(k.spec, k.law);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--regen-laws") return regen(argv[2]);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"sqrt-reproduction", sqrt_reproduction},
      {"wrong-bound-refutation", wrong_bound_refutation},
      {"corpus-soundness", soundness},
      {"backend-agreement", backend_agreement},
      {"law-goldens", law_goldens},
      {"driver-fallback", driver_fallback},
      {"corpus-eval", eval_corpus},
  };
  int failed = 0;
  for (const auto& [name, run] : checks) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS  " : "FAIL  ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " acceptance checks passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
