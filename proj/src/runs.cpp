#include "refinery/frontends.hpp"

#include <fstream>
#include <sstream>

namespace refinery {

LawProposal RecordingOracle::propose(const OracleContext& ctx) {
  TranscriptRecord r = {{"kind", "oracle"}, {"oracle", inner_.name()}, {"path", ctx.path}, {"prompt", build_prompt(ctx)}};
  auto fail = [&](const char* kind, const std::string& message) {
    r["error"] = kind;
    r["message"] = message;
    sink_.push_back(r);
  };
  try {
    LawProposal p = inner_.propose(ctx);
    r["reply"] = p.raw.empty() ? p.text : p.raw;
    sink_.push_back(r);
    return p;
  } catch (const IllTypedProposal& e) {
    r["line"] = e.line();
    fail("ill-typed", e.details());
    throw;
  } catch (const NoProposalFound& e) {
    fail("no-proposal", e.what());
    throw;
  } catch (const OracleExhausted& e) {
    fail("exhausted", e.what());
    throw;
  } catch (const OracleTransportError& e) {
    fail("transport", e.what());
    throw;
  }
}

ReplayOracle::ReplayOracle(const std::vector<TranscriptRecord>& transcript) {
  for (const auto& r : transcript)
    if (r.value("kind", "") == "oracle") by_path_[r.value("path", "")].push_back(r);
}

LawProposal ReplayOracle::propose(const OracleContext& ctx) {
  auto& q = by_path_[ctx.path];
  if (q.empty()) throw OracleExhausted("transcript has no more replies for node " + ctx.path);
  TranscriptRecord r = q.front();
  q.pop_front();
  std::string error = r.value("error", "");
  std::string message = r.value("message", "");
  if (error == "ill-typed") throw IllTypedProposal(r.value("line", ""), message);
  if (error == "no-proposal") throw NoProposalFound(message);
  if (error == "exhausted") throw OracleExhausted(message);
  if (error == "transport") throw OracleTransportError(message);
  return parse_proposal(r.value("reply", ""), ctx);
}

std::vector<TranscriptRecord> read_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read transcript " + path);
  std::vector<TranscriptRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_transcript(const std::string& path, const std::vector<TranscriptRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : records) out << r.dump() << "\n";
}

RefineRun refine_spec(const std::string& spec_text, Oracle& oracle, const Settings& s, const Library* library) {
  RefineRun run;
  run.spec = parse_spec_file(spec_text);
  run.verifier = make_verifier(s, run.spec, &run.warning);
  run.tree = std::make_unique<SpecTree>(run.spec.statement, run.spec.definitions);
  run.transcript.push_back({{"kind", "header"},
                            {"api", kApiVersion},
                            {"spec", run.spec.name},
                            {"oracle", oracle.name()},
                            {"backends", run.verifier.order},
                            {"retries", s.limits.retries}});
  RecordingOracle recorder(oracle, run.transcript);
  run.report = drive_refinement(*run.tree, recorder, run.verifier, s.limits, library, [&](const DriveEvent& e) {
    run.transcript.push_back({{"kind", "event"}, {"event", e.kind}, {"path", e.path}, {"text", e.text}, {"detail", e.detail}});
  });
  if (run.report.outcome == DriveOutcome::FullyRefined)
    run.program = extract_program(*run.tree, library ? &library->entries() : nullptr);
  run.transcript.push_back({{"kind", "report"},
                            {"outcome", to_string(run.report.outcome)},
                            {"reason", run.report.reason},
                            {"attempts", run.report.attempts},
                            {"parent_backtracks", run.report.parent_backtracks}});
  return run;
}

std::string render_obligation_report(const SpecTree& tree) {
  std::ostringstream out;
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& path : tree.paths()) {
    const RefineNode& n = tree.node(path);
    for (const auto& ob : n.obligations) {
      ++counts[static_cast<int>(ob.result.status)];
      out << path << "  " << ob.label << "  " << to_string(ob.result.status);
      if (!ob.result.backend.empty()) out << " [" << ob.result.backend << "]";
      if (ob.result.counterexample) out << "  counterexample: " << render_valuation(*ob.result.counterexample);
      if (ob.result.status == VcStatus::Unknown && !ob.result.reason.empty()) out << "  (" << ob.result.reason << ")";
      out << "\n    " << ob.render() << "\n";
    }
  }
  out << "obligations: " << (counts[0] + counts[1] + counts[2] + counts[3]) << " total, " << counts[1] << " proved, "
      << counts[2] << " refuted, " << counts[3] << " unknown, " << counts[0] << " pending\n";
  return out.str();
}

void replay_script(SpecTree& tree, const std::string& script, const VerifierConfig& cfg, const Library* library) {
  const auto* entries = library ? &library->entries() : nullptr;
  std::istringstream in(script);
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    auto b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos || raw[b] == '#') continue;
    std::string line = raw.substr(b, raw.find_last_not_of(" \t\r") - b + 1);
    std::optional<std::string> path;
    if (line.front() == '@') {
      auto sp = line.find_first_of(" \t");
      if (sp == std::string::npos) throw LawError("line " + std::to_string(n) + ": no law after node path");
      path = line.substr(1, sp - 1);
      line = line.substr(line.find_first_not_of(" \t", sp));
    } else {
      path = tree.leftmost_open();
      if (!path) throw LawError("line " + std::to_string(n) + ": no open node left for `" + line + "`");
    }
    try {
      tree.apply(*path, line, entries);
    } catch (const std::exception& e) {
      throw LawError("line " + std::to_string(n) + " at node " + *path + ": " + e.what());
    }
  }
  for (const auto& path : tree.paths())
    if (tree.node(path).law) tree.verify(path, cfg);
}

}  // namespace refinery
