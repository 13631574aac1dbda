#pragma once

#include "refinery/spec_expr.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refinery {

/// Named condition `name (p:T)... := body.`; never recursive.
struct Definition {
  std::string name;
  std::vector<TypedParam> params;
  SpecExpr body;
  SpecType result;
};

using Definitions = std::map<std::string, Definition>;

/// Typing environment: declared names plus the definitions in scope.
struct Env {
  std::vector<TypedParam> params;
  std::shared_ptr<const Definitions> definitions;

  Env() = default;
  explicit Env(std::vector<TypedParam> ps, std::shared_ptr<const Definitions> defs = nullptr)
      : params(std::move(ps)), definitions(std::move(defs)) {}

  /// Last declaration wins, so inner bindings shadow outer ones.
  const TypedParam* find(const std::string& name) const;
  const Definition* find_definition(const std::string& name) const;
  Env with(TypedParam p) const;
};

class SpecSyntaxError : public std::runtime_error {
 public:
  SpecSyntaxError(const std::string& msg, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

class UnknownIdentifier : public SpecSyntaxError {
 public:
  UnknownIdentifier(const std::string& name, int line, int column)
      : SpecSyntaxError("unknown identifier '" + name + "'", line, column), name_(name) {}
  const std::string& identifier() const { return name_; }

 private:
  std::string name_;
};

struct TypeIssue {
  std::string message;
  std::string at;  // rendered offending node
};

class SpecTypeError : public std::runtime_error {
 public:
  explicit SpecTypeError(std::vector<TypeIssue> issues);
  const std::vector<TypeIssue>& issues() const { return issues_; }

 private:
  std::vector<TypeIssue> issues_;
};

/// Parses and type-checks an L_spec formula or term. Chained relations
/// desugar to conjunctions; `x_0` and `(e)_0` become Init nodes.
SpecExpr parse_spec_expr(std::string_view text, const Env& env);

/// As parse_spec_expr, additionally requiring a bool result.
SpecExpr parse_formula(std::string_view text, const Env& env);

/// Parses one or more `(name:type)` groups.
std::vector<TypedParam> parse_params(std::string_view text);

/// Parses `name (p:T)... := body.`; the body may use earlier definitions.
Definition parse_definition(std::string_view text, const Env& env);

/// Canonical text; parse_spec_expr(render_spec_expr(e)) == e for every
/// parser-producible tree.
std::string render_spec_expr(const SpecExpr& e);

std::string render_params(const std::vector<TypedParam>& params);

}  // namespace refinery
