#pragma once

#include "refinery/numeric.hpp"
#include "refinery/spec_type.hpp"

#include <memory>
#include <string>
#include <vector>

namespace refinery {

enum class ExprKind {
  Num, Bool, Var, Const,
  Init,                                   // e_0: value of e in the pre-state
  Neg, Add, Sub, Mul, Div,
  Lt, Le, Eq, Gt, Ge, Ne,
  And, Or, Not, Implies,
  Forall, Exists,
  Select,                                 // a[i]
  Slice,                                  // a[i:j], half-open
  Store,                                  // a[i := v], functional update
  Apply,                                  // name(args): definition or builtin
};

bool is_relation(ExprKind k);
bool is_arithmetic(ExprKind k);
bool is_connective(ExprKind k);
bool is_quantifier(ExprKind k);

enum class ParamRole { Variant, Constant };

struct TypedParam {
  std::string name;
  SpecType type;
  ParamRole role = ParamRole::Variant;

  friend bool operator==(const TypedParam&, const TypedParam&) = default;
};

/// Lower-case initial letter marks a variant, upper-case a constant.
ParamRole role_from_name(const std::string& name);

/// Immutable first-order term/formula. Copies share structure.
class SpecExpr {
 public:
  SpecExpr() = default;

  static SpecExpr number(Rational q);
  static SpecExpr boolean(bool b);
  static SpecExpr variable(std::string name);
  static SpecExpr constant(std::string name);
  static SpecExpr reference(const TypedParam& p);
  static SpecExpr init(SpecExpr e);
  static SpecExpr unary(ExprKind k, SpecExpr e);
  static SpecExpr binary(ExprKind k, SpecExpr a, SpecExpr b);
  static SpecExpr quantifier(ExprKind k, std::string bound, SpecType type, SpecExpr body);
  static SpecExpr select(SpecExpr array, SpecExpr index);
  static SpecExpr slice(SpecExpr array, SpecExpr lo, SpecExpr hi);
  static SpecExpr store(SpecExpr array, SpecExpr index, SpecExpr value);
  static SpecExpr apply(std::string name, std::vector<SpecExpr> args);

  bool valid() const { return node_ != nullptr; }
  ExprKind kind() const { return node_->kind; }
  const Rational& number_value() const { return node_->number; }
  bool bool_value() const { return node_->flag; }
  /// Var/Const name, quantifier bound name, or Apply function name.
  const std::string& name() const { return node_->name; }
  const SpecType& bound_type() const { return node_->type; }
  const std::vector<SpecExpr>& args() const { return node_->args; }
  const SpecExpr& arg(std::size_t i) const { return node_->args[i]; }
  /// Quantifier body.
  const SpecExpr& body() const { return node_->args[0]; }

  bool is_reference() const { return kind() == ExprKind::Var || kind() == ExprKind::Const; }
  bool same_node(const SpecExpr& o) const { return node_ == o.node_; }

  friend bool operator==(const SpecExpr& a, const SpecExpr& b);
  friend bool operator!=(const SpecExpr& a, const SpecExpr& b) { return !(a == b); }

 private:
  struct Node {
    ExprKind kind = ExprKind::Bool;
    Rational number;
    bool flag = false;
    std::string name;
    SpecType type;
    std::vector<SpecExpr> args;
  };
  explicit SpecExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static SpecExpr make(Node n);

  std::shared_ptr<const Node> node_;
};

// Formula construction helpers. conj flattens nested conjunctions and drops
// literal `true` units.
SpecExpr conj(const std::vector<SpecExpr>& parts);
SpecExpr conj(const SpecExpr& a, const SpecExpr& b);
SpecExpr negate(const SpecExpr& e);
SpecExpr implies(const SpecExpr& a, const SpecExpr& b);
SpecExpr equals(const SpecExpr& a, const SpecExpr& b);

/// Top-level conjuncts (nested And flattened, left to right).
std::vector<SpecExpr> conjuncts(const SpecExpr& e);

}  // namespace refinery
