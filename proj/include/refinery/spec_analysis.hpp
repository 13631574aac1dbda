#pragma once

#include "refinery/spec_syntax.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace refinery {

/// Builtin functions: `len(array) : nat`, `mod(int, int) : int`.
bool is_builtin(const std::string& name);

/// Free Var/Const names, including those under Init markers.
std::set<std::string> free_vars(const SpecExpr& e);

/// Names occurring free inside Init markers.
std::set<std::string> init_vars(const SpecExpr& e);

bool contains_init(const SpecExpr& e);

using Bindings = std::vector<std::pair<std::string, SpecExpr>>;

class SubstitutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simultaneous capture-avoiding substitution of variants. Init markers are
/// left untouched. Throws SubstitutionError if a target names a constant.
SpecExpr substitute(const SpecExpr& e, const Bindings& bindings);

/// Parameter instantiation: like substitute but may also replace constants.
SpecExpr instantiate(const SpecExpr& e, const Bindings& bindings);

/// `name` with the smallest positive integer suffix not in `taken`.
std::string fresh_name(const std::string& name, const std::set<std::string>& taken);

struct TypeCheckResult {
  std::optional<SpecType> type;
  std::vector<TypeIssue> issues;
  bool ok() const { return issues.empty() && type.has_value(); }
};

TypeCheckResult type_check(const SpecExpr& e, const Env& env);

/// Divisors (of `/` and `mod`) whose free names are not bound inside `e`;
/// the checker adds `d <> 0` for each to an obligation's hypothesis.
std::vector<SpecExpr> division_guards(const SpecExpr& e);

/// Replaces Apply nodes of definitions by their instantiated bodies.
SpecExpr expand_definitions(const SpecExpr& e, const Env& env);

}  // namespace refinery
