#pragma once

#include "refinery/refinement.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace refinery {

/// What an oracle sees when asked for the next law at one node.
struct OracleContext {
  std::string path;
  SpecStatement statement;
  Env env;
  std::vector<SpecExpr> constant_context;
  DomainSpec domains;
  std::vector<FailureRecord> history;         // oldest first
  std::vector<std::string> library_hints;     // signatures of matching entries
  std::vector<std::string> library_calls;     // ready `call f(args)` lines, same order
  int remaining = 0;                          // attempts left at this node
};

OracleContext make_context(const SpecTree& tree, const std::string& path, const Library* library,
                           const DomainSpec& domains, int remaining);

/// Law menu with each law's proviso scheme.
std::string law_catalog();

/// Deterministic prompt for one node.
std::string build_prompt(const OracleContext& ctx);

struct LawProposal {
  RefinementLaw law;
  std::string text;       // canonical script line
  std::string rationale;
  std::string raw;        // reply as received
};

class NoProposalFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllTypedProposal : public std::runtime_error {
 public:
  IllTypedProposal(const std::string& line, const std::string& details)
      : std::runtime_error("ill-typed proposal `" + line + "`: " + details), line_(line), details_(details) {}
  const std::string& line() const { return line_; }
  const std::string& details() const { return details_; }

 private:
  std::string line_, details_;
};

/// Script cursor or heuristic rules ran dry.
class OracleExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Network or endpoint failure; the driver retries.
class OracleTransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First line of `reply` that parses as a law against ctx.env.
LawProposal parse_proposal(std::string_view reply, const OracleContext& ctx);

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string name() const = 0;
  virtual LawProposal propose(const OracleContext& ctx) = 0;
};

/// Plays back a refinement script. Lines `@2.1 assign ...` are reserved for
/// that node path; the rest are handed out in file order to whichever node
/// asks. Blank lines and `#` comments are skipped.
class ScriptedOracle : public Oracle {
 public:
  explicit ScriptedOracle(std::string_view script);
  static ScriptedOracle from_file(const std::string& path);

  std::string name() const override { return "scripted"; }
  LawProposal propose(const OracleContext& ctx) override;
  std::size_t remaining() const;

 private:
  std::vector<std::string> general_;
  std::size_t cursor_ = 0;
  std::map<std::string, std::vector<std::string>> keyed_;
  std::map<std::string, std::size_t> keyed_cursor_;
};

/// Fixed rules: Skip when bounded-provable; Iterate when post is pre plus one
/// relation; Traverse on a ranged forall; Assign on equalities or by
/// candidate search; IfElse on a conjunct a candidate misses; Seq that
/// establishes the leading conjuncts. Proposals already in the node's history are skipped.
class HeuristicOracle : public Oracle {
 public:
  explicit HeuristicOracle(std::size_t check_budget = 128) : budget_(check_budget) {}
  std::string name() const override { return "heuristic"; }
  LawProposal propose(const OracleContext& ctx) override;

 private:
  std::size_t budget_;
};

struct RemoteConfig {
  std::string url;          // http(s)://host[:port]/path
  std::string key;
  std::string model = "gpt-4";
  double temperature = 0.0;
  int timeout_seconds = 60;

  /// REFINERY_LLM_URL, REFINERY_LLM_KEY, REFINERY_LLM_MODEL.
  static RemoteConfig from_env();
};

/// Chat-completion client: posts build_prompt as one user message and parses
/// the first choice's text.
class RemoteOracle : public Oracle {
 public:
  explicit RemoteOracle(RemoteConfig cfg);
  std::string name() const override { return "remote"; }
  LawProposal propose(const OracleContext& ctx) override;

  /// Raw completion text for a prompt.
  std::string complete(const std::string& prompt);

 private:
  RemoteConfig cfg_;
};

// Driver ---------------------------------------------------------------------------

struct DriveLimits {
  int retries = 3;                  // K failures per node before falling back
  std::size_t max_nodes = 256;
  std::size_t max_attempts = 1000;
  bool accept_unknown = false;      // Unknown verdicts do not trigger retries
};

enum class DriveOutcome { FullyRefined, Exhausted, Unverified };
std::string to_string(DriveOutcome o);

struct DriveEvent {
  std::string kind;    // propose, reject, apply, verify, backtrack, fallback
  std::string path;
  std::string text;    // law line or reply
  std::string detail;
};

struct DriveReport {
  DriveOutcome outcome = DriveOutcome::Exhausted;
  std::string reason;
  std::map<std::string, int> attempts;   // by node path
  int parent_backtracks = 0;
  std::size_t proved = 0, refuted = 0, unknown = 0;
  double elapsed_seconds = 0;

  int total_attempts() const;
  /// Everything except elapsed time, one field per line.
  std::string render() const;
};

using DriveLog = std::function<void(const DriveEvent&)>;

/// Leftmost-open loop: propose, apply, verify; a failed node is backtracked
/// and retried; after K failures the parent falls back too.
DriveReport drive_refinement(SpecTree& tree, Oracle& oracle, const VerifierConfig& cfg, const DriveLimits& limits,
                             const Library* library = nullptr, const DriveLog& log = {});

/// `N = 1/2, e = 1/2` in name order.
std::string render_bindings(const Valuation& v);

/// Reason text for a failed obligation, with its counterexample.
std::string describe_failure(const ProofObligation& ob);

}  // namespace refinery
