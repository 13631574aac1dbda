#include "refinery/oracle.hpp"

#include <sstream>

namespace refinery {

std::string to_string(DriveOutcome o) {
  switch (o) {
    case DriveOutcome::FullyRefined: return "fully-refined";
    case DriveOutcome::Exhausted: return "exhausted";
    case DriveOutcome::Unverified: return "unverified";
  }
  return "?";
}

int DriveReport::total_attempts() const {
  int n = 0;
  for (const auto& [path, k] : attempts) n += k;
  return n;
}

std::string DriveReport::render() const {
  std::ostringstream out;
  out << "outcome: " << to_string(outcome) << "\n";
  if (!reason.empty()) out << "reason: " << reason << "\n";
  out << "attempts:";
  for (const auto& [path, k] : attempts) out << " " << path << "=" << k;
  out << "\nparent backtracks: " << parent_backtracks << "\n";
  out << "obligations: proved=" << proved << " refuted=" << refuted << " unknown=" << unknown << "\n";
  return out.str();
}

std::string render_bindings(const Valuation& v) {
  std::string out;
  for (const auto& [name, value] : v) out += (out.empty() ? "" : ", ") + name + " = " + render_value(value);
  return out;
}

std::string describe_failure(const ProofObligation& ob) {
  std::string out = ob.label + ": " + to_string(ob.result.status);
  if (ob.result.counterexample) out += "; counterexample " + render_bindings(*ob.result.counterexample);
  if (!ob.result.reason.empty()) out += " (" + ob.result.reason + ")";
  out += "; needed " + render_spec_expr(ob.hypothesis) + " => " + render_spec_expr(ob.conclusion);
  return out;
}

DriveReport drive_refinement(SpecTree& tree, Oracle& oracle, const VerifierConfig& cfg, const DriveLimits& limits,
                             const Library* library, const DriveLog& log) {
  auto started = std::chrono::steady_clock::now();
  DriveReport report;
  auto emit = [&](const std::string& kind, const std::string& path, const std::string& text,
                  const std::string& detail) {
    if (log) log({kind, path, text, detail});
  };
  auto finish = [&](DriveOutcome o, std::string reason) {
    report.outcome = o;
    report.reason = std::move(reason);
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
  };
  const int k = std::max(1, limits.retries);
  const std::vector<ProcedureEntry>* entries = library ? &library->entries() : nullptr;

  while (true) {
    if (tree.status("root") == NodeStatus::Closed) return finish(DriveOutcome::FullyRefined, "");
    auto open = tree.leftmost_open();
    if (!open) return finish(DriveOutcome::Unverified, "every node has a law but some obligations are not proved");
    if (static_cast<std::size_t>(report.total_attempts()) >= limits.max_attempts)
      return finish(DriveOutcome::Exhausted, "attempt limit reached");
    const std::string path = *open;
    ++report.attempts[path];
    int failures = static_cast<int>(tree.node(path).history.size());
    OracleContext ctx = make_context(tree, path, library, cfg.domains, k - failures);

    bool failed = false;
    std::string proposed;
    try {
      LawProposal p = oracle.propose(ctx);
      proposed = p.text;
      emit("propose", path, p.text, p.rationale);
      tree.apply(path, p.law, entries);
      emit("apply", path, p.text, "");
      if (tree.paths().size() > limits.max_nodes) {
        tree.backtrack(path, "node limit reached");
        emit("backtrack", path, p.text, "node limit reached");
        return finish(DriveOutcome::Exhausted, "node limit reached");
      }
      tree.verify(path, cfg);
      const ProofObligation* bad = nullptr;
      for (const auto& ob : tree.node(path).obligations) {
        emit("verify", path, ob.label, to_string(ob.result.status));
        switch (ob.result.status) {
          case VcStatus::Proved: ++report.proved; break;
          case VcStatus::Refuted: ++report.refuted; break;
          default: ++report.unknown; break;
        }
        bool counts = ob.result.status == VcStatus::Refuted ||
                      (ob.result.status != VcStatus::Proved && !limits.accept_unknown);
        if (counts && !bad) bad = &ob;
      }
      if (bad) {
        std::string reason = describe_failure(*bad);
        tree.backtrack(path, reason);
        emit("backtrack", path, p.text, reason);
        failed = true;
      }
    } catch (const OracleExhausted& e) {
      emit("reject", path, "", e.what());
      return finish(DriveOutcome::Exhausted, e.what());
    } catch (const IllTypedProposal& e) {
      tree.record_failure(path, {e.line(), std::string("ill-typed: ") + e.details()});
      emit("reject", path, e.line(), e.details());
      failed = true;
    } catch (const NoProposalFound& e) {
      tree.record_failure(path, {"", std::string("no proposal: ") + e.what()});
      emit("reject", path, "", e.what());
      failed = true;
    } catch (const OracleTransportError& e) {
      tree.record_failure(path, {"", std::string("oracle unavailable: ") + e.what()});
      emit("reject", path, "", e.what());
      failed = true;
    } catch (const LawError& e) {
      tree.record_failure(path, {proposed, std::string("law does not apply: ") + e.what()});
      emit("reject", path, proposed, e.what());
      failed = true;
    }
    if (!failed) continue;

    // Fall back while the current node has used up its retries.
    std::string at = path;
    while (static_cast<int>(tree.node(at).history.size()) >= k) {
      if (at == "root") return finish(DriveOutcome::Exhausted, "root failed " + std::to_string(k) + " times");
      std::string parent = tree.node(at).parent;
      std::string reason = "child " + at + " failed " + std::to_string(k) + " times";
      tree.backtrack(parent, reason);
      emit("fallback", parent, "", reason);
      ++report.parent_backtracks;
      at = parent;
    }
  }
}

}  // namespace refinery
