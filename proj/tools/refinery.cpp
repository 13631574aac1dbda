// refinery: command-line front end.
//
//   refinery refine SPEC [--oracle scripted --script FILE] [-o PROGRAM]
//   refinery check SPEC (--script FILE | --session FILE)
//   refinery run PROGRAM TESTS
//   refinery eval CORPUS
//   refinery serve [--port N]
//
// Exit codes: 0 ok, 1 input does not parse or cannot be read, 2 refinement
// exhausted or a check/test failed, 3 solver misconfigured.

#include "refinery/frontends.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace refinery;

namespace {

enum Exit { kOk = 0, kParse = 1, kFailed = 2, kSolver = 3 };

struct Common {
  std::string config;
  std::string backends;
  int retries = 0;
  bool accept_unknown = false;
  std::string library;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--backends", c.backends, "backend order, e.g. smt,bounded");
  app->add_option("--retries", c.retries, "failures per node before falling back (K)");
  app->add_flag("--accept-unknown", c.accept_unknown, "do not retry on Unknown verdicts");
  app->add_option("--library", c.library, "procedure library directory");
}

Settings settings_from(const Common& c) {
  Settings s;
  if (!c.config.empty()) s = load_settings(c.config, s);
  apply_env(s);
  if (!c.backends.empty()) {
    s.backends.clear();
    std::stringstream in(c.backends);
    for (std::string b; std::getline(in, b, ',');)
      if (!b.empty()) s.backends.push_back(b);
  }
  if (c.retries > 0) s.limits.retries = c.retries;
  if (c.accept_unknown) s.limits.accept_unknown = true;
  if (!c.library.empty()) s.library_dir = c.library;
  return s;
}

// Runs a command body and maps exceptions to exit codes.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const SolverMisconfigured& e) {
    std::cerr << "refinery: " << e.what() << "\n";
    return kSolver;
  } catch (const SpecFileError& e) {
    std::cerr << "refinery: spec: " << e.what() << "\n";
    return kParse;
  } catch (const ConfigError& e) {
    std::cerr << "refinery: " << e.what() << "\n";
    return kParse;
  } catch (const DomainError& e) {
    std::cerr << "refinery: domain: " << e.what() << "\n";
    return kParse;
  } catch (const LawError& e) {
    std::cerr << "refinery: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "refinery: " << e.what() << "\n";
    return kParse;
  }
}

int cmd_refine(const Common& c, const std::string& spec_path, const std::string& oracle_kind,
               const std::string& script, const std::string& output, std::string report_path,
               std::string transcript_path, const std::string& save_as) {
  Settings s = settings_from(c);
  std::string spec_text = slurp(spec_path);
  auto oracle = make_oracle(oracle_kind, s, script);
  std::unique_ptr<Library> lib;
  if (!s.library_dir.empty()) lib = std::make_unique<Library>(s.library_dir);
  RefineRun run = refine_spec(spec_text, *oracle, s, lib.get());
  if (!run.warning.empty()) std::cerr << "refinery: " << run.warning << "\n";

  if (!output.empty()) {
    if (report_path.empty()) report_path = output + ".report";
    if (transcript_path.empty()) transcript_path = output + ".transcript.jsonl";
  }
  std::string report = run.report.render() + render_obligation_report(*run.tree);
  if (!report_path.empty()) spit(report_path, report);
  else std::cerr << run.report.render();
  if (!transcript_path.empty()) write_transcript(transcript_path, run.transcript);

  if (!run.program) {
    std::cerr << "refinery: " << to_string(run.report.outcome) << ": " << run.report.reason << "\n";
    return kFailed;
  }
  std::string code = render_program(*run.program);
  if (output.empty()) std::cout << code;
  else spit(output, code);
  if (!save_as.empty()) {
    if (!lib) throw ConfigError("--save-as needs --library");
    lib->save(*run.tree, save_as, run.spec.definition_texts);
  }
  return kOk;
}

int cmd_check(const Common& c, const std::string& spec_path, const std::string& script, const std::string& session) {
  Settings s = settings_from(c);
  std::unique_ptr<Library> lib;
  if (!s.library_dir.empty()) lib = std::make_unique<Library>(s.library_dir);
  std::string spec_text = slurp(spec_path);
  SpecFile f = parse_spec_file(spec_text);
  std::string warning;
  VerifierConfig cfg = make_verifier(s, f, &warning);
  if (!warning.empty()) std::cerr << "refinery: " << warning << "\n";
  SpecTree tree(f.statement, f.definitions);
  if (!script.empty()) {
    replay_script(tree, slurp(script), cfg, lib.get());
  } else if (!session.empty()) {
    // Laws come from the session log; verdicts are recomputed.
    auto snap = nlohmann::json::parse(slurp(session));
    for (const auto& j : snap.at("events")) {
      SessionEvent e = event_from_json(j);
      if (e.kind == "apply") tree.apply(e.path, e.text, lib ? &lib->entries() : nullptr);
      if (e.kind == "backtrack") tree.backtrack(e.path, e.text);
    }
    for (const auto& path : tree.paths())
      if (tree.node(path).law) tree.verify(path, cfg);
  } else {
    throw ConfigError("check needs --script or --session");
  }
  std::cout << render_obligation_report(tree);
  std::cout << "root: " << to_string(tree.status("root")) << "\n";
  return tree.status("root") == NodeStatus::Closed ? kOk : kFailed;
}

int cmd_run(const std::string& program_path, const std::string& tests_path, bool binary64, std::uint64_t steps) {
  Statement prog = parse_program(slurp(program_path));
  TestFile tests = parse_test_file(slurp(tests_path));
  RunOptions opt;
  opt.binary64 = binary64;
  opt.step_limit = steps;
  TestReport r = run_tests(prog, tests.cases, {}, opt);
  for (const auto& c : r.cases)
    std::cout << (c.passed ? "pass  " : "FAIL  ") << render_valuation(c.input)
              << (c.message.empty() ? "" : "  " + c.message) << "\n";
  std::cout << r.passed() << "/" << r.cases.size() << " passed\n";
  return r.all_passed() ? kOk : kFailed;
}

int cmd_eval(const Common& c, const std::string& corpus, const std::string& oracle, std::size_t enlarge,
             const std::string& json_path) {
  Settings s = settings_from(c);
  EvalOptions opt;
  opt.oracle = oracle;
  opt.enlarge = enlarge;
  EvalReport r = run_eval(corpus, s, opt);
  std::cout << r.render_table();
  if (!json_path.empty()) spit(json_path, r.to_json().dump(2) + "\n");
  return kOk;
}

SessionServer* g_server = nullptr;

int cmd_serve(const Common& c, const std::string& host, int port, const std::string& oracle, const ServerOptions& opt) {
  Settings s = settings_from(c);
  if (!oracle.empty()) s.oracle = oracle;
  SessionServer server(s, opt);
  int bound = server.bind(host, port);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  std::cerr << "refinery: serving api " << kApiVersion << " on http://" << host << ":" << bound << "\n";
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refinery: stepwise program refinement with checked laws"};
  app.require_subcommand(1);
  Common common;

  std::string spec, oracle = "heuristic", script, output, report, transcript, save_as;
  auto* refine = app.add_subcommand("refine", "refine a specification into a program");
  refine->add_option("spec", spec, "specification file")->required();
  refine->add_option("--oracle", oracle, "scripted, heuristic, remote or replay");
  refine->add_option("--script", script, "refinement script, or the transcript for --oracle replay");
  refine->add_option("-o,--output", output, "program file (default: stdout)");
  refine->add_option("--report", report, "obligation report (default: PROGRAM.report)");
  refine->add_option("--transcript", transcript, "oracle transcript (default: PROGRAM.transcript.jsonl)");
  refine->add_option("--save-as", save_as, "store the result in --library under this name");
  add_common(refine, common);

  std::string check_script, session;
  auto* check = app.add_subcommand("check", "re-generate and discharge obligations of a refinement");
  check->add_option("spec", spec, "specification file")->required();
  auto* check_src = check->add_option("--script", check_script, "refinement script");
  check->add_option("--session", session, "session snapshot from the server")->excludes(check_src);
  add_common(check, common);

  std::string program, tests;
  bool binary64 = false;
  std::uint64_t steps = 1'000'000;
  auto* run = app.add_subcommand("run", "run a program on a test file");
  run->add_option("program", program, "program file")->required();
  run->add_option("tests", tests, "test file")->required();
  run->add_flag("--binary64", binary64, "IEEE doubles instead of exact rationals");
  run->add_option("--step-limit", steps, "interpreter step limit");

  std::string corpus, json_out, eval_oracle = "scripted";
  std::size_t enlarge = 10;
  auto* eval = app.add_subcommand("eval", "refine, verify and test every problem in a corpus");
  eval->add_option("corpus", corpus, "corpus directory")->required();
  eval->add_option("--oracle", eval_oracle, "scripted, heuristic or remote");
  eval->add_option("--enlarge", enlarge, "enlarged test set size as a multiple of the base set");
  eval->add_option("--json", json_out, "also write the report as JSON");
  add_common(eval, common);

  std::string host = "127.0.0.1", serve_oracle;
  int port = 8080;
  ServerOptions sopt;
  auto* serve = app.add_subcommand("serve", "JSON session API over HTTP");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--oracle", serve_oracle, "default oracle for suggest (heuristic or remote)");
  serve->add_option("--state-dir", sopt.state_dir, "snapshot sessions here and restore them on start");
  serve->add_option("--static", sopt.static_dir, "serve a UI bundle from this directory");
  add_common(serve, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kParse;
  }

  if (*refine)
    return guarded([&] { return cmd_refine(common, spec, oracle, script, output, report, transcript, save_as); });
  if (*check) return guarded([&] { return cmd_check(common, spec, check_script, session); });
  if (*run) return guarded([&] { return cmd_run(program, tests, binary64, steps); });
  if (*eval) return guarded([&] { return cmd_eval(common, corpus, eval_oracle, enlarge, json_out); });
  if (*serve) return guarded([&] { return cmd_serve(common, host, port, serve_oracle, sopt); });
  return kParse;
}
