#pragma once

#include "refinery/domain.hpp"
#include "refinery/spec_syntax.hpp"
#include "refinery/value.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refinery {

enum class ProgOp {
  Num, Name, Bool,
  Eq, Lt, Le, Gt, Ge, Ne,
  And, Or, Not,
  Add, Sub, Mul, Div, Neg,
  Index,                                  // v[e]
  Slice,                                  // v[e1:e2]
};

/// Side-effect free program expression (Table 3 <Expr>).
class ProgExpr {
 public:
  ProgExpr() = default;

  static ProgExpr number(Rational q);
  static ProgExpr name(std::string n);
  static ProgExpr boolean(bool b);
  static ProgExpr unary(ProgOp op, ProgExpr e);
  static ProgExpr binary(ProgOp op, ProgExpr a, ProgExpr b);
  static ProgExpr index(ProgExpr v, ProgExpr i);
  static ProgExpr slice(ProgExpr v, ProgExpr lo, ProgExpr hi);

  bool valid() const { return node_ != nullptr; }
  ProgOp op() const { return node_->op; }
  const Rational& number_value() const { return node_->number; }
  bool bool_value() const { return node_->flag; }
  const std::string& identifier() const { return node_->name; }
  const std::vector<ProgExpr>& args() const { return node_->args; }
  const ProgExpr& arg(std::size_t i) const { return node_->args[i]; }

  friend bool operator==(const ProgExpr& a, const ProgExpr& b);

 private:
  struct Node {
    ProgOp op = ProgOp::Num;
    Rational number;
    bool flag = false;
    std::string name;
    std::vector<ProgExpr> args;
  };
  explicit ProgExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static ProgExpr make(Node n);
  std::shared_ptr<const Node> node_;
};

struct ProcParam {
  std::string name;
  std::optional<SpecType> type;

  friend bool operator==(const ProcParam&, const ProcParam&) = default;
};

/// Program statement. Blocks are Seq statements; `Hole` marks where a child
/// refinement's code is spliced in.
struct Statement {
  enum class Kind { Pass, Assign, Seq, While, If, Assert, Def, Call, Hole };

  Kind kind = Kind::Pass;
  std::string name;                 // Assign target, Def/Call name
  std::optional<ProgExpr> index;    // Assign to name[index]
  ProgExpr expr;                    // Assign value, While/If/Assert condition
  std::vector<Statement> body;      // Seq items, While body, If then-branch, Def body
  std::vector<Statement> orelse;    // If else-branch
  std::vector<ProcParam> params;    // Def
  std::vector<ProgExpr> args;       // Call
  int hole = -1;
  int line = 0;                     // source line, 0 when synthesized

  static Statement pass();
  static Statement assign(std::string target, ProgExpr value);
  static Statement assign_index(std::string target, ProgExpr index, ProgExpr value);
  static Statement seq(std::vector<Statement> items);
  static Statement while_loop(ProgExpr cond, Statement body);
  static Statement if_else(ProgExpr cond, Statement then_branch, Statement else_branch);
  static Statement assertion(ProgExpr cond);
  static Statement def(std::string name, std::vector<ProcParam> params, Statement body);
  static Statement call(std::string name, std::vector<ProgExpr> args);
  static Statement placeholder(int child);

  /// Structural equality ignoring line numbers.
  friend bool operator==(const Statement& a, const Statement& b);
};

class ProgSyntaxError : public std::runtime_error {
 public:
  ProgSyntaxError(const std::string& msg, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

ProgExpr parse_prog_expr(std::string_view text);
std::string render_prog_expr(const ProgExpr& e);

/// Parses a program with Python-style `:` blocks (4-space indentation is
/// rendered; any consistent indentation is accepted). `;` separates
/// statements on one line, `#` starts a comment. The result is a Seq.
Statement parse_program(std::string_view text);

/// Canonical text, one statement per line; holes render as `<child N>`.
std::string render_program(const Statement& s);

/// Flattens nested Seq nodes and drops `pass` items inside non-empty blocks.
Statement normalize(const Statement& s);

struct RunOptions {
  std::uint64_t step_limit = 1'000'000;
  /// Exact runs stop once an assigned rational needs more bits than this (0: no limit).
  std::size_t max_bits = 1 << 16;
  bool binary64 = false;
};

struct RunOutcome {
  enum class Status { Completed, AssertFailed, StepLimit, SizeLimit };
  Status status = Status::Completed;
  Valuation final_state;
  std::uint64_t asserts_executed = 0;
  std::uint64_t steps = 0;
  std::string location;             // failing assert, when AssertFailed
  Valuation failing_state;
};

class InterpretError : public std::runtime_error {
 public:
  enum class Kind { DivisionByZero, IndexOutOfBounds, UndefinedProcedure, UnboundName, TypeMismatch, Recursion };
  InterpretError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Deterministic reference interpreter. Throws InterpretError for runtime
/// faults; assert failures and step exhaustion are reported in the outcome.
RunOutcome interpret(const Statement& program, const Valuation& input, const RunOptions& options = {});

/// Evaluates a program expression in a state (exact unless doubles are present).
Value eval_prog_expr(const ProgExpr& e, const Valuation& state, bool binary64 = false);

/// Structural lift into L_spec; names resolve through `env` so constants
/// become Const nodes.
SpecExpr prog_expr_to_spec(const ProgExpr& e, const Env& env);

class NotExecutable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse lift for quantifier-, Init- and application-free expressions.
ProgExpr spec_to_prog_expr(const SpecExpr& e);

struct TestCase {
  Valuation input;
  SpecExpr check;
};

struct TestFile {
  Env env;
  std::vector<TestCase> cases;
};

/// Test file format:
///   constants: (N:float) (e:float)
///   variants: (x:float) (y:float)
///   check: <formula>          (default for the cases that follow)
///   input: N = 1/2, e = 1/2   (starts a case)
///   check: <formula>          (optional, overrides the default for that case)
TestFile parse_test_file(std::string_view text);

struct CaseResult {
  Valuation input;
  bool passed = false;
  std::string message;
};

struct TestReport {
  std::vector<CaseResult> cases;
  std::size_t passed() const;
  bool all_passed() const { return passed() == cases.size(); }
};

/// Runs every case and evaluates its check on the final state, with the
/// input as the initial state for `x_0` markers.
TestReport run_tests(const Statement& program, const std::vector<TestCase>& cases, const DomainSpec& domains = {},
                     const RunOptions& options = {}, const std::shared_ptr<const Definitions>& defs = nullptr);

}  // namespace refinery
