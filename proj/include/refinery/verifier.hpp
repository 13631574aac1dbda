#pragma once

#include "refinery/domain.hpp"
#include "refinery/spec_syntax.hpp"
#include "refinery/value.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace refinery {

enum class VcStatus { Pending, Proved, Refuted, Unknown };

std::string to_string(VcStatus s);

struct VcResult {
  VcStatus status = VcStatus::Unknown;
  std::string backend;              // "smt", "bounded" or "" when nothing ran
  std::optional<Valuation> counterexample;
  std::string reason;               // why Unknown, or a note
  double elapsed_ms = 0;
};

/// Entailment `hypothesis => conclusion` over the free names of both sides.
/// Names written `x_0` in a counterexample are Init snapshots of x.
struct ProofObligation {
  std::string label;
  SpecExpr hypothesis;
  SpecExpr conclusion;
  std::string origin;               // node path and law
  Env env;
  VcResult result{VcStatus::Pending, "", std::nullopt, "", 0};

  /// `hyp -> concl`.
  std::string render() const;
};

/// Exhaustive check over the finite carriers. Division guards are added to
/// the hypothesis. The counterexample is the first one in enumeration order
/// (names sorted, first name most significant, carrier order per name).
VcResult check_bounded(const ProofObligation& ob, const DomainSpec& d);

/// SMT-LIB v2 script asserting hypothesis /\ ~conclusion. Throws
/// SmtUnsupported for constructs the encoder does not handle.
std::string emit_smtlib(const ProofObligation& ob);

class SmtUnsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SmtConfig {
  /// Solver command; the script file path is appended. Empty: take
  /// REFINERY_SMT_CMD, else `z3`.
  std::string command;
  double timeout_s = 10;
};

/// Resolved solver command line.
std::string smt_command(const SmtConfig& cfg);

/// Whether the solver command can be started and answers a trivial query.
bool smt_available(const SmtConfig& cfg);

/// Runs the solver once. Refuted results carry the decoded model (not yet
/// re-validated).
VcResult check_smt(const ProofObligation& ob, const SmtConfig& cfg);

struct VerifierConfig {
  std::vector<std::string> order = {"smt", "bounded"};
  SmtConfig smt;
  DomainSpec domains;
};

/// Portfolio: backends in order, first Proved/Refuted wins. SMT models are
/// re-validated with eval_spec; an invalid model falls back to a bounded
/// search around the model's values.
VcResult check(const ProofObligation& ob, const VerifierConfig& cfg);

/// Whether `cex` satisfies the hypothesis and falsifies the conclusion
/// (with guards). Keys `x_0` populate the initial state.
bool validates(const ProofObligation& ob, const Valuation& cex, const DomainSpec& d);

}  // namespace refinery
