#pragma once

#include "refinery/domain.hpp"
#include "refinery/prog_lang.hpp"
#include "refinery/spec_analysis.hpp"
#include "refinery/spec_syntax.hpp"
#include "refinery/verifier.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace refinery {

/// `frame: [pre, post]` with read-only constants.
struct SpecStatement {
  std::vector<TypedParam> frame;
  std::vector<TypedParam> constants;
  SpecExpr pre;
  SpecExpr post;

  /// Constants first, then the frame; roles are forced to match.
  Env env(std::shared_ptr<const Definitions> defs) const;
  bool in_frame(const std::string& name) const;
  std::string render() const;  // `x, y: [pre, post]`
};

/// A parsed specification file.
struct SpecFile {
  std::string name;
  SpecStatement statement;
  std::shared_ptr<const Definitions> definitions;
  std::vector<std::string> definition_texts;
  DomainSpec domains;
  std::vector<std::string> domain_directives;
};

class SpecFileError : public std::runtime_error {
 public:
  SpecFileError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Sections `name:`, `constants:`, `variants:`, `define:`, `pre:`, `post:`,
/// `domain:`. A section value may continue on indented lines.
SpecFile parse_spec_file(std::string_view text);
std::string render_spec_file(const SpecFile& f);

// Laws --------------------------------------------------------------------------

enum class LawKind { Skip, InitSkip, Seq, FlexSeq, Assign, FollowAssign, IfElse, Iterate, Traverse, Expand, ProcCall };
enum class IterateMode { Initialised, Flexible };

std::string to_string(LawKind k);

/// `x := e` or `a[i] := e`.
struct Binding {
  std::string target;
  std::optional<ProgExpr> index;
  ProgExpr value;
};

struct RefinementLaw {
  LawKind kind = LawKind::Skip;
  SpecExpr mid;                              // Seq
  SpecExpr a, b, c, d;                       // FlexSeq
  std::vector<Binding> bindings;             // Assign, FollowAssign
  std::optional<ProgExpr> guard;             // IfElse, Iterate
  SpecExpr invariant, variant;               // Iterate
  IterateMode mode = IterateMode::Initialised;
  std::string list, index;                   // Traverse
  SpecExpr from, to, property;               // Traverse: m, n, P(l, i)
  std::optional<TypedParam> local;           // Expand
  std::optional<SpecExpr> local_value;       // Expand
  std::string entry;                         // ProcCall
  std::vector<ProgExpr> args;                // ProcCall
};

class LawError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One refinement-script line, e.g. `seq mid: x*x <= N < y*y`. Parameters
/// are parsed and type-checked against `env`; Traverse's index may be a
/// fresh name. Throws LawError (with syntax or typing details).
RefinementLaw parse_law(std::string_view line, const Env& env);

/// Script-line text; parse_law(render_law(l)) reproduces l.
std::string render_law(const RefinementLaw& law);

/// Whether `line` starts with a law keyword.
bool looks_like_law(std::string_view line);

// Steps ---------------------------------------------------------------------------

struct ProcedureEntry;

/// What a law does to one statement: child statements, code with
/// `<child k>` holes (k is 1-based), and proof obligations.
struct RefinementStep {
  std::vector<SpecStatement> children;
  Statement code;
  std::vector<ProofObligation> obligations;
  std::vector<std::string> procedures;  // library entries called
};

struct SchemeContext {
  std::shared_ptr<const Definitions> definitions;
  /// Conjuncts over constants only, conjoined into every hypothesis.
  std::vector<SpecExpr> constant_context;
  /// Names that temporaries must avoid.
  std::set<std::string> reserved;
  const std::vector<ProcedureEntry>* library = nullptr;
  std::string origin;  // node path, used in labels
};

/// The per-law scheme. Throws LawError on law/statement mismatch.
RefinementStep apply_scheme(const SpecStatement& s, const RefinementLaw& law, const SchemeContext& ctx);

// Tree ------------------------------------------------------------------------------

enum class NodeStatus { Open, Refined, Closed, Failed };
std::string to_string(NodeStatus s);

struct FailureRecord {
  std::string law;     // script text, or the raw reply when unparsable
  std::string reason;
};

struct RefineNode {
  std::string path;    // "root", "1", "2.1", ...
  std::string parent;  // empty for the root
  SpecStatement statement;
  std::optional<RefinementLaw> law;
  std::string law_text;
  std::vector<std::string> children;
  Statement code = Statement::pass();
  std::vector<ProofObligation> obligations;
  std::vector<std::string> procedures;
  std::vector<FailureRecord> history;
};

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NodeNotOpen : public TreeError {
 public:
  using TreeError::TreeError;
};

class SpecTree {
 public:
  SpecTree(SpecStatement root, std::shared_ptr<const Definitions> defs);

  const RefineNode& node(const std::string& path) const;
  bool has(const std::string& path) const { return nodes_.count(path) > 0; }
  const RefineNode& root() const { return node("root"); }
  /// Paths in depth-first, left-to-right order.
  std::vector<std::string> paths() const;

  Env env(const std::string& path) const;
  const std::shared_ptr<const Definitions>& definitions() const { return defs_; }
  const std::vector<SpecExpr>& constant_context() const { return context_; }

  /// Status is derived from obligations and children.
  NodeStatus status(const std::string& path) const;
  std::optional<std::string> leftmost_open() const;

  /// Installs the scheme at an Open node; returns the new child paths.
  std::vector<std::string> apply(const std::string& path, const RefinementLaw& law,
                                 const std::vector<ProcedureEntry>* library = nullptr);
  /// Parses the script line against the node's environment, then applies.
  std::vector<std::string> apply(const std::string& path, std::string_view law_line,
                                 const std::vector<ProcedureEntry>* library = nullptr);

  /// Discharges the node's Pending obligations; returns the new results.
  std::vector<VcResult> verify(const std::string& path, const VerifierConfig& cfg);
  /// Records an externally computed result.
  void set_result(const std::string& path, std::size_t obligation, const VcResult& r);

  /// Removes the node's law, children and obligations, appending
  /// (law, reason) to its history.
  void backtrack(const std::string& path, const std::string& reason);
  /// Appends a rejected proposal that never got applied.
  void record_failure(const std::string& path, FailureRecord f);

  /// All obligations in the tree, in node order.
  std::vector<const ProofObligation*> obligations() const;

 private:
  RefineNode& mut(const std::string& path);
  void erase_subtree(const std::string& path);

  std::map<std::string, RefineNode> nodes_;
  std::shared_ptr<const Definitions> defs_;
  std::vector<SpecExpr> context_;
};

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splices child code into holes. Requires a Closed root unless
/// `allow_unverified` (which still requires every node to carry a law).
Statement extract_program(const SpecTree& tree, const std::vector<ProcedureEntry>* library = nullptr,
                          bool allow_unverified = false);

// Library ---------------------------------------------------------------------------

/// A verified procedure. Its constants are the value parameters; its frame
/// variables are the results, shared with the caller by name.
struct ProcedureEntry {
  std::string name;
  std::vector<TypedParam> frame;
  std::vector<TypedParam> params;
  SpecExpr pre;
  SpecExpr post;
  Statement program;
  std::vector<std::string> definition_texts;
  std::shared_ptr<const Definitions> definitions;
  std::string provenance;  // tree as JSON text

  SpecStatement statement() const { return {frame, params, pre, post}; }
};

struct LibraryMatch {
  const ProcedureEntry* entry;
  Bindings substitution;           // param -> argument
  std::vector<ProgExpr> args;
  std::vector<ProofObligation> obligations;
};

class LibraryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A directory of `<name>.json` entries guarded by an advisory lock.
class Library {
 public:
  explicit Library(std::string dir = "");

  const std::vector<ProcedureEntry>& entries() const { return entries_; }
  void reload();

  /// Requires a Closed tree; throws LibraryError on duplicate names.
  const ProcedureEntry& save(const SpecTree& tree, const std::string& name,
                             const std::vector<std::string>& definition_texts = {});
  void add(ProcedureEntry e);

  std::vector<LibraryMatch> lookup(const SpecStatement& s, const SchemeContext& ctx) const;

 private:
  std::string dir_;
  std::vector<ProcedureEntry> entries_;
};

std::string entry_to_json(const ProcedureEntry& e);
ProcedureEntry entry_from_json(const std::string& text);

/// Tree with statuses, obligations and counterexamples.
std::string tree_to_json(const SpecTree& tree, int indent = -1);

}  // namespace refinery
