#include "refinery/spec_expr.hpp"

#include <cctype>

namespace refinery {

bool is_relation(ExprKind k) {
  switch (k) {
    case ExprKind::Lt: case ExprKind::Le: case ExprKind::Eq:
    case ExprKind::Gt: case ExprKind::Ge: case ExprKind::Ne:
      return true;
    default:
      return false;
  }
}

bool is_arithmetic(ExprKind k) {
  switch (k) {
    case ExprKind::Add: case ExprKind::Sub: case ExprKind::Mul: case ExprKind::Div:
      return true;
    default:
      return false;
  }
}

bool is_connective(ExprKind k) {
  return k == ExprKind::And || k == ExprKind::Or || k == ExprKind::Implies || k == ExprKind::Not;
}

bool is_quantifier(ExprKind k) { return k == ExprKind::Forall || k == ExprKind::Exists; }

ParamRole role_from_name(const std::string& name) {
  if (!name.empty() && std::isupper(static_cast<unsigned char>(name.front()))) return ParamRole::Constant;
  return ParamRole::Variant;
}

SpecExpr SpecExpr::make(Node n) { return SpecExpr(std::make_shared<const Node>(std::move(n))); }

SpecExpr SpecExpr::number(Rational q) {
  Node n;
  n.kind = ExprKind::Num;
  n.number = std::move(q);
  return make(std::move(n));
}

SpecExpr SpecExpr::boolean(bool b) {
  Node n;
  n.kind = ExprKind::Bool;
  n.flag = b;
  return make(std::move(n));
}

SpecExpr SpecExpr::variable(std::string name) {
  Node n;
  n.kind = ExprKind::Var;
  n.name = std::move(name);
  return make(std::move(n));
}

SpecExpr SpecExpr::constant(std::string name) {
  Node n;
  n.kind = ExprKind::Const;
  n.name = std::move(name);
  return make(std::move(n));
}

SpecExpr SpecExpr::reference(const TypedParam& p) {
  return p.role == ParamRole::Constant ? constant(p.name) : variable(p.name);
}

SpecExpr SpecExpr::init(SpecExpr e) {
  Node n;
  n.kind = ExprKind::Init;
  n.args = {std::move(e)};
  return make(std::move(n));
}

SpecExpr SpecExpr::unary(ExprKind k, SpecExpr e) {
  Node n;
  n.kind = k;
  n.args = {std::move(e)};
  return make(std::move(n));
}

SpecExpr SpecExpr::binary(ExprKind k, SpecExpr a, SpecExpr b) {
  Node n;
  n.kind = k;
  n.args = {std::move(a), std::move(b)};
  return make(std::move(n));
}

SpecExpr SpecExpr::quantifier(ExprKind k, std::string bound, SpecType type, SpecExpr body) {
  Node n;
  n.kind = k;
  n.name = std::move(bound);
  n.type = std::move(type);
  n.args = {std::move(body)};
  return make(std::move(n));
}

SpecExpr SpecExpr::select(SpecExpr array, SpecExpr index) {
  Node n;
  n.kind = ExprKind::Select;
  n.args = {std::move(array), std::move(index)};
  return make(std::move(n));
}

SpecExpr SpecExpr::slice(SpecExpr array, SpecExpr lo, SpecExpr hi) {
  Node n;
  n.kind = ExprKind::Slice;
  n.args = {std::move(array), std::move(lo), std::move(hi)};
  return make(std::move(n));
}

SpecExpr SpecExpr::store(SpecExpr array, SpecExpr index, SpecExpr value) {
  Node n;
  n.kind = ExprKind::Store;
  n.args = {std::move(array), std::move(index), std::move(value)};
  return make(std::move(n));
}

SpecExpr SpecExpr::apply(std::string name, std::vector<SpecExpr> args) {
  Node n;
  n.kind = ExprKind::Apply;
  n.name = std::move(name);
  n.args = std::move(args);
  return make(std::move(n));
}

bool operator==(const SpecExpr& a, const SpecExpr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || x.args.size() != y.args.size()) return false;
  switch (x.kind) {
    case ExprKind::Num:
      if (x.number != y.number) return false;
      break;
    case ExprKind::Bool:
      if (x.flag != y.flag) return false;
      break;
    case ExprKind::Var: case ExprKind::Const: case ExprKind::Apply:
      if (x.name != y.name) return false;
      break;
    case ExprKind::Forall: case ExprKind::Exists:
      if (x.name != y.name || !(x.type == y.type)) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (x.args[i] != y.args[i]) return false;
  return true;
}

namespace {
void flatten(const SpecExpr& e, ExprKind op, std::vector<SpecExpr>& out) {
  if (e.kind() == op) {
    flatten(e.arg(0), op, out);
    flatten(e.arg(1), op, out);
  } else {
    out.push_back(e);
  }
}
}  // namespace

std::vector<SpecExpr> conjuncts(const SpecExpr& e) {
  std::vector<SpecExpr> out;
  flatten(e, ExprKind::And, out);
  return out;
}

SpecExpr conj(const std::vector<SpecExpr>& parts) {
  std::vector<SpecExpr> flat;
  for (const auto& p : parts) flatten(p, ExprKind::And, flat);
  std::vector<SpecExpr> kept;
  for (auto& f : flat) {
    if (f.kind() == ExprKind::Bool && f.bool_value()) continue;
    kept.push_back(std::move(f));
  }
  if (kept.empty()) return SpecExpr::boolean(true);
  SpecExpr acc = kept.front();
  for (std::size_t i = 1; i < kept.size(); ++i) acc = SpecExpr::binary(ExprKind::And, acc, kept[i]);
  return acc;
}

SpecExpr conj(const SpecExpr& a, const SpecExpr& b) { return conj(std::vector<SpecExpr>{a, b}); }

SpecExpr negate(const SpecExpr& e) { return SpecExpr::unary(ExprKind::Not, e); }

SpecExpr implies(const SpecExpr& a, const SpecExpr& b) { return SpecExpr::binary(ExprKind::Implies, a, b); }

SpecExpr equals(const SpecExpr& a, const SpecExpr& b) { return SpecExpr::binary(ExprKind::Eq, a, b); }

}  // namespace refinery
