#pragma once

#include "refinery/oracle.hpp"

#include <json.hpp>

#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace refinery {

inline constexpr int kApiVersion = 1;

// Settings ----------------------------------------------------------------------------

/// Shared by the CLI, the eval harness and the server. Layering: defaults,
/// then the config file, then environment variables, then flags.
struct Settings {
  std::vector<std::string> backends = {"smt", "bounded"};
  std::string solver;               // empty: REFINERY_SMT_CMD, else z3
  bool solver_explicit = false;     // set by config or environment
  double solver_timeout = 10;
  std::vector<std::string> domains; // directives applied before the spec's own
  DriveLimits limits;
  RemoteConfig llm;
  std::string library_dir;
  std::string oracle = "heuristic"; // server default for suggest
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverMisconfigured : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON object with optional keys solver, solver_timeout, backends, domains,
/// retries, max_nodes, max_attempts, accept_unknown, library, oracle and
/// llm {url, key, model, temperature, timeout}. Unknown keys are errors.
Settings parse_settings(const std::string& json_text, Settings base = {});
Settings load_settings(const std::string& path, Settings base = {});

/// REFINERY_SMT_CMD and REFINERY_LLM_*; overrides what is already set.
void apply_env(Settings& s);

DomainSpec effective_domains(const Settings& s, const SpecFile& f);

/// A solver that was asked for explicitly but does not answer throws
/// SolverMisconfigured; a missing default solver is dropped from the order
/// and a note is left in `*warning`.
VerifierConfig make_verifier(const Settings& s, const SpecFile& f, std::string* warning = nullptr);

// Oracles and transcripts ----------------------------------------------------------------

/// One line of a transcript file (JSON lines).
using TranscriptRecord = nlohmann::json;

/// Forwards to another oracle and records each prompt with its reply or error.
class RecordingOracle : public Oracle {
 public:
  RecordingOracle(Oracle& inner, std::vector<TranscriptRecord>& sink) : inner_(inner), sink_(sink) {}
  std::string name() const override { return inner_.name(); }
  LawProposal propose(const OracleContext& ctx) override;

 private:
  Oracle& inner_;
  std::vector<TranscriptRecord>& sink_;
};

/// Answers from the `oracle` records of a transcript, per node path in order,
/// rethrowing recorded errors with their original type.
class ReplayOracle : public Oracle {
 public:
  explicit ReplayOracle(const std::vector<TranscriptRecord>& transcript);
  std::string name() const override { return "replay"; }
  LawProposal propose(const OracleContext& ctx) override;

 private:
  std::map<std::string, std::deque<TranscriptRecord>> by_path_;
};

std::vector<TranscriptRecord> read_transcript(const std::string& path);
void write_transcript(const std::string& path, const std::vector<TranscriptRecord>& records);

/// kind: scripted (script_path required), heuristic, remote, replay
/// (script_path is the transcript).
std::unique_ptr<Oracle> make_oracle(const std::string& kind, const Settings& s, const std::string& script_path = "");

// Refinement runs -------------------------------------------------------------------------

struct RefineRun {
  SpecFile spec;
  VerifierConfig verifier;
  std::unique_ptr<SpecTree> tree;
  DriveReport report;
  std::optional<Statement> program;     // when FullyRefined
  std::vector<TranscriptRecord> transcript;
  std::string warning;
};

/// Parses the spec, drives it with `oracle` and extracts the program.
/// Throws SpecFileError and SolverMisconfigured.
RefineRun refine_spec(const std::string& spec_text, Oracle& oracle, const Settings& s, const Library* library = nullptr);

/// One line per obligation: path, label, status, backend, counterexample.
std::string render_obligation_report(const SpecTree& tree);

/// Applies each script line at the leftmost open node, then verifies every
/// node. Throws LawError when a line does not fit.
void replay_script(SpecTree& tree, const std::string& script, const VerifierConfig& cfg,
                   const Library* library = nullptr);

// Exhaustive runs ---------------------------------------------------------------------------

struct SoundnessResult {
  std::uint64_t points = 0;      // enumerated inputs
  std::uint64_t admitted = 0;    // inputs satisfying pre
  std::uint64_t passed = 0;      // program ran and post held
  std::vector<std::string> failures;  // first few, rendered
};

class GridTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the program on every in-domain valuation of the spec's constants
/// and frame; throws GridTooLarge above `limit` points.
SoundnessResult check_exhaustively(const SpecFile& f, const Statement& program, const DomainSpec& d,
                                   std::uint64_t limit = 10'000);

/// `count` test cases drawn from the spec's domains with a fixed seed;
/// inputs satisfy pre, the check is post.
std::vector<TestCase> sample_cases(const SpecFile& f, const DomainSpec& d, std::size_t count, std::uint64_t seed);

// Eval harness ------------------------------------------------------------------------------

struct EvalRow {
  std::string name;
  DriveOutcome outcome = DriveOutcome::Exhausted;
  std::string reason;
  std::size_t vcs_proved = 0, vcs_total = 0;
  bool verified = false;                       // fully refined and every obligation Proved
  std::size_t tests_passed = 0, tests_total = 0;
  std::size_t extended_passed = 0, extended_total = 0;
  double seconds = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  std::size_t verified() const;
  std::size_t tests_all_passed() const;        // rows whose base tests all pass
  std::size_t extended_all_passed() const;
  /// Verified rows that pass the base tests but fail the enlarged set.
  std::size_t regressions() const;

  std::string render_table() const;
  nlohmann::json to_json() const;
};

struct EvalOptions {
  std::string oracle = "scripted";
  std::size_t enlarge = 10;                    // enlarged set is this many times the base set
  std::uint64_t seed = 20240101;
};

/// Each subdirectory of `corpus_dir` holding `<name>.spec`, `<name>.refine`
/// and `<name>.tests` is one problem, in name order. Per-problem failures
/// become rows.
EvalReport run_eval(const std::string& corpus_dir, const Settings& s, const EvalOptions& opt = {});

// Sessions -----------------------------------------------------------------------------------

struct SessionEvent {
  std::string kind;                 // apply, verify, backtrack
  std::string path;
  std::string text;                 // law line or backtrack reason
  std::vector<VcResult> results;    // verify
};

nlohmann::json event_to_json(const SessionEvent& e);
SessionEvent event_from_json(const nlohmann::json& j);

class Session {
 public:
  Session(std::string id, std::string spec_text, const Settings& settings, const Library* library = nullptr);

  const std::string& id() const { return id_; }
  const std::string& spec_text() const { return spec_text_; }
  const SpecFile& spec() const { return spec_; }
  const SpecTree& tree() const { return *tree_; }
  const VerifierConfig& verifier() const { return verifier_; }
  const std::vector<SessionEvent>& events() const { return events_; }

  /// Each mutation either completes and appends one event or throws with
  /// the tree unchanged.
  std::vector<std::string> apply(const std::string& path, const std::string& law_line);
  std::vector<VcResult> verify(const std::string& path);
  void backtrack(const std::string& path, const std::string& reason);

  LawProposal suggest(const std::string& path, Oracle& oracle) const;
  Statement program() const;

  /// `{api, id, spec, events}`.
  nlohmann::json snapshot() const;
  static std::unique_ptr<Session> restore(const nlohmann::json& snapshot, const Settings& settings,
                                          const Library* library = nullptr);

  /// Tree obtained by replaying `events` from the spec text.
  static SpecTree replay(const std::string& spec_text, const std::vector<SessionEvent>& events,
                         const Library* library = nullptr);

  mutable std::shared_mutex mutex;

 private:
  std::string id_;
  std::string spec_text_;
  SpecFile spec_;
  VerifierConfig verifier_;
  const Library* library_;
  std::unique_ptr<SpecTree> tree_;
  std::vector<SessionEvent> events_;
};

struct ServerOptions {
  std::string state_dir;            // snapshot per event when set
  std::string static_dir;           // UI bundle mounted at /
};

/// JSON session API over HTTP.
class SessionServer {
 public:
  SessionServer(Settings settings, ServerOptions options = {});
  ~SessionServer();

  /// Binds to host:port (0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();
  void wait_until_ready();

 private:
  void routes();
  std::shared_ptr<Session> find(const std::string& id);
  void persist(const Session& s);

  Settings settings_;
  ServerOptions options_;
  std::unique_ptr<Library> library_;
  std::unique_ptr<httplib::Server> http_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<unsigned> next_id_{1};
};

}  // namespace refinery
