#include "refinery/spec_analysis.hpp"

#include <map>

namespace refinery {

bool is_builtin(const std::string& name) { return name == "len" || name == "mod"; }

namespace {

void collect_free(const SpecExpr& e, std::set<std::string>& bound, std::set<std::string>& out, bool only_init,
                  bool in_init) {
  switch (e.kind()) {
    case ExprKind::Var: case ExprKind::Const:
      // Constants never change, so their initial value is the current one.
      if (!bound.count(e.name()) && (!only_init || (in_init && e.kind() == ExprKind::Var))) out.insert(e.name());
      return;
    case ExprKind::Init:
      collect_free(e.arg(0), bound, out, only_init, true);
      return;
    case ExprKind::Forall: case ExprKind::Exists: {
      bool fresh = bound.insert(e.name()).second;
      collect_free(e.body(), bound, out, only_init, in_init);
      if (fresh) bound.erase(e.name());
      return;
    }
    default:
      for (const auto& a : e.args()) collect_free(a, bound, out, only_init, in_init);
  }
}

// Renames free occurrences of `from` (a variable) to `to`, including under Init.
SpecExpr rename_var(const SpecExpr& e, const std::string& from, const std::string& to) {
  switch (e.kind()) {
    case ExprKind::Num: case ExprKind::Bool: case ExprKind::Const:
      return e;
    case ExprKind::Var:
      return e.name() == from ? SpecExpr::variable(to) : e;
    case ExprKind::Forall: case ExprKind::Exists:
      if (e.name() == from) return e;
      return SpecExpr::quantifier(e.kind(), e.name(), e.bound_type(), rename_var(e.body(), from, to));
    default: {
      std::vector<SpecExpr> args;
      for (const auto& a : e.args()) args.push_back(rename_var(a, from, to));
      switch (e.kind()) {
        case ExprKind::Init: return SpecExpr::init(args[0]);
        case ExprKind::Neg: case ExprKind::Not: return SpecExpr::unary(e.kind(), args[0]);
        case ExprKind::Select: return SpecExpr::select(args[0], args[1]);
        case ExprKind::Slice: return SpecExpr::slice(args[0], args[1], args[2]);
        case ExprKind::Store: return SpecExpr::store(args[0], args[1], args[2]);
        case ExprKind::Apply: return SpecExpr::apply(e.name(), args);
        default: return SpecExpr::binary(e.kind(), args[0], args[1]);
      }
    }
  }
}

SpecExpr rebuild(const SpecExpr& e, std::vector<SpecExpr> args) {
  switch (e.kind()) {
    case ExprKind::Init: return SpecExpr::init(args[0]);
    case ExprKind::Neg: case ExprKind::Not: return SpecExpr::unary(e.kind(), args[0]);
    case ExprKind::Select: return SpecExpr::select(args[0], args[1]);
    case ExprKind::Slice: return SpecExpr::slice(args[0], args[1], args[2]);
    case ExprKind::Store: return SpecExpr::store(args[0], args[1], args[2]);
    case ExprKind::Apply: return SpecExpr::apply(e.name(), std::move(args));
    case ExprKind::Forall: case ExprKind::Exists:
      return SpecExpr::quantifier(e.kind(), e.name(), e.bound_type(), args[0]);
    default: return SpecExpr::binary(e.kind(), args[0], args[1]);
  }
}

using BindingMap = std::map<std::string, SpecExpr>;

SpecExpr subst(const SpecExpr& e, const BindingMap& b, bool allow_constants) {
  if (b.empty()) return e;
  switch (e.kind()) {
    case ExprKind::Num: case ExprKind::Bool:
      return e;
    case ExprKind::Var: {
      auto it = b.find(e.name());
      return it == b.end() ? e : it->second;
    }
    case ExprKind::Const: {
      auto it = b.find(e.name());
      if (it == b.end()) return e;
      if (!allow_constants) throw SubstitutionError("cannot substitute constant '" + e.name() + "'");
      return it->second;
    }
    case ExprKind::Init:
      return e;
    case ExprKind::Forall: case ExprKind::Exists: {
      BindingMap inner = b;
      inner.erase(e.name());
      std::set<std::string> body_free = free_vars(e.body());
      for (auto it = inner.begin(); it != inner.end();) {
        if (!body_free.count(it->first)) it = inner.erase(it);
        else ++it;
      }
      if (inner.empty()) return e;
      std::set<std::string> repl_free;
      for (const auto& [name, r] : inner) {
        auto fv = free_vars(r);
        repl_free.insert(fv.begin(), fv.end());
      }
      std::string bound = e.name();
      SpecExpr body = e.body();
      if (repl_free.count(bound)) {
        std::set<std::string> taken = body_free;
        taken.insert(repl_free.begin(), repl_free.end());
        for (const auto& [name, r] : inner) taken.insert(name);
        std::string renamed = fresh_name(bound, taken);
        body = rename_var(body, bound, renamed);
        bound = renamed;
      }
      return SpecExpr::quantifier(e.kind(), bound, e.bound_type(), subst(body, inner, allow_constants));
    }
    default: {
      std::vector<SpecExpr> args;
      bool changed = false;
      for (const auto& a : e.args()) {
        args.push_back(subst(a, b, allow_constants));
        changed = changed || !args.back().same_node(a);
      }
      return changed ? rebuild(e, std::move(args)) : e;
    }
  }
}

BindingMap to_map(const Bindings& bindings) {
  BindingMap m;
  for (const auto& [name, r] : bindings) m.insert_or_assign(name, r);
  return m;
}

}  // namespace

std::set<std::string> free_vars(const SpecExpr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out, false, false);
  return out;
}

std::set<std::string> init_vars(const SpecExpr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out, true, false);
  return out;
}

bool contains_init(const SpecExpr& e) {
  if (e.kind() == ExprKind::Init) return true;
  for (const auto& a : e.args())
    if (contains_init(a)) return true;
  return false;
}

SpecExpr substitute(const SpecExpr& e, const Bindings& bindings) { return subst(e, to_map(bindings), false); }

SpecExpr instantiate(const SpecExpr& e, const Bindings& bindings) { return subst(e, to_map(bindings), true); }

std::string fresh_name(const std::string& name, const std::set<std::string>& taken) {
  for (int k = 1;; ++k) {
    std::string candidate = name + std::to_string(k);
    if (!taken.count(candidate)) return candidate;
  }
}

// Type checking ---------------------------------------------------------------

namespace {

class TypeChecker {
 public:
  explicit TypeChecker(const Env& env) : env_(env) {}

  std::optional<SpecType> check(const SpecExpr& e) {
    switch (e.kind()) {
      case ExprKind::Num: {
        const Rational& q = e.number_value();
        if (!is_integer(q)) return SpecType::real();
        return q >= 0 ? SpecType::nat() : SpecType::integer();
      }
      case ExprKind::Bool:
        return SpecType::boolean();
      case ExprKind::Var: case ExprKind::Const:
        if (const TypedParam* p = env_.find(e.name())) return p->type;
        return issue("unknown identifier '" + e.name() + "'", e);
      case ExprKind::Init:
        return check(e.arg(0));
      case ExprKind::Neg: {
        auto t = check(e.arg(0));
        if (!t) return std::nullopt;
        if (!t->is_numeric()) return issue("expected a numeric operand", e.arg(0));
        return t->kind() == SpecType::Kind::Nat ? SpecType::integer() : *t;
      }
      case ExprKind::Add: case ExprKind::Sub: case ExprKind::Mul: case ExprKind::Div: {
        auto a = numeric(e.arg(0));
        auto b = numeric(e.arg(1));
        if (!a || !b) return std::nullopt;
        if (e.kind() == ExprKind::Div) return SpecType::real();
        SpecType j = *numeric_join(*a, *b);
        if (e.kind() == ExprKind::Sub && j.kind() == SpecType::Kind::Nat) return SpecType::integer();
        return j;
      }
      case ExprKind::Lt: case ExprKind::Le: case ExprKind::Gt: case ExprKind::Ge: {
        auto a = numeric(e.arg(0));
        auto b = numeric(e.arg(1));
        if (!a || !b) return std::nullopt;
        return SpecType::boolean();
      }
      case ExprKind::Eq: case ExprKind::Ne: {
        auto a = check(e.arg(0));
        auto b = check(e.arg(1));
        if (!a || !b) return std::nullopt;
        if (!comparable(*a, *b)) return issue("cannot compare " + to_string(*a) + " with " + to_string(*b), e);
        return SpecType::boolean();
      }
      case ExprKind::And: case ExprKind::Or: case ExprKind::Implies: {
        auto a = boolean(e.arg(0));
        auto b = boolean(e.arg(1));
        if (!a || !b) return std::nullopt;
        return SpecType::boolean();
      }
      case ExprKind::Not:
        if (!boolean(e.arg(0))) return std::nullopt;
        return SpecType::boolean();
      case ExprKind::Forall: case ExprKind::Exists: {
        Env saved = env_;
        env_ = env_.with({e.name(), e.bound_type(), ParamRole::Variant});
        auto b = boolean(e.body());
        env_ = saved;
        if (!b) return std::nullopt;
        return SpecType::boolean();
      }
      case ExprKind::Select: {
        auto a = array(e.arg(0));
        auto i = index(e.arg(1));
        if (!a || !i) return std::nullopt;
        return a->element();
      }
      case ExprKind::Slice: {
        auto a = array(e.arg(0));
        auto i = index(e.arg(1));
        auto j = index(e.arg(2));
        if (!a || !i || !j) return std::nullopt;
        return *a;
      }
      case ExprKind::Store: {
        auto a = array(e.arg(0));
        auto i = index(e.arg(1));
        auto v = check(e.arg(2));
        if (!a || !i || !v) return std::nullopt;
        if (!widens_to(*v, a->element()))
          return issue("cannot store " + to_string(*v) + " into " + to_string(*a), e.arg(2));
        return *a;
      }
      case ExprKind::Apply:
        return apply(e);
    }
    return std::nullopt;
  }

  std::vector<TypeIssue> issues;

 private:
  std::nullopt_t issue(const std::string& msg, const SpecExpr& at) {
    issues.push_back({msg, render_spec_expr(at)});
    return std::nullopt;
  }

  static bool comparable(const SpecType& a, const SpecType& b) {
    if (a.is_numeric() && b.is_numeric()) return true;
    if (a.is_array() && b.is_array()) return comparable(a.element(), b.element());
    return a == b && a.kind() != SpecType::Kind::Char;
  }

  std::optional<SpecType> numeric(const SpecExpr& e) {
    auto t = check(e);
    if (!t) return std::nullopt;
    if (!t->is_numeric()) return issue("expected a numeric operand, found " + to_string(*t), e);
    return t;
  }

  std::optional<SpecType> boolean(const SpecExpr& e) {
    auto t = check(e);
    if (!t) return std::nullopt;
    if (!t->is_bool()) return issue("expected a bool operand, found " + to_string(*t), e);
    return t;
  }

  std::optional<SpecType> array(const SpecExpr& e) {
    auto t = check(e);
    if (!t) return std::nullopt;
    if (!t->is_array()) return issue("expected an array, found " + to_string(*t), e);
    return t;
  }

  std::optional<SpecType> index(const SpecExpr& e) {
    auto t = check(e);
    if (!t) return std::nullopt;
    if (t->kind() != SpecType::Kind::Nat && t->kind() != SpecType::Kind::Int)
      return issue("array index must be nat or int, found " + to_string(*t), e);
    return t;
  }

  std::optional<SpecType> apply(const SpecExpr& e) {
    const auto& args = e.args();
    if (e.name() == "len") {
      if (args.size() != 1) return issue("len expects one argument", e);
      if (!array(args[0])) return std::nullopt;
      return SpecType::nat();
    }
    if (e.name() == "mod") {
      if (args.size() != 2) return issue("mod expects two arguments", e);
      auto a = index(args[0]);
      auto b = index(args[1]);
      if (!a || !b) return std::nullopt;
      return SpecType::integer();
    }
    const Definition* d = env_.find_definition(e.name());
    if (!d) return issue("unknown function '" + e.name() + "'", e);
    if (args.size() != d->params.size())
      return issue(e.name() + " expects " + std::to_string(d->params.size()) + " arguments", e);
    bool ok = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
      auto t = check(args[i]);
      if (!t) {
        ok = false;
        continue;
      }
      if (!widens_to(*t, d->params[i].type) &&
          !(t->is_array() && d->params[i].type.is_array() && comparable(*t, d->params[i].type))) {
        issue("argument " + std::to_string(i + 1) + " of " + e.name() + " expects " + to_string(d->params[i].type), args[i]);
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return d->result;
  }

  Env env_;
};

void collect_guards(const SpecExpr& e, std::set<std::string>& bound, bool in_init, std::vector<SpecExpr>& out) {
  auto add = [&](const SpecExpr& divisor) {
    for (const auto& n : free_vars(divisor))
      if (bound.count(n)) return;
    SpecExpr g = in_init ? SpecExpr::init(divisor) : divisor;
    for (const auto& existing : out)
      if (existing == g) return;
    out.push_back(g);
  };
  switch (e.kind()) {
    case ExprKind::Div:
      add(e.arg(1));
      break;
    case ExprKind::Apply:
      if (e.name() == "mod" && e.args().size() == 2) add(e.arg(1));
      break;
    case ExprKind::Init:
      collect_guards(e.arg(0), bound, true, out);
      return;
    case ExprKind::Forall: case ExprKind::Exists: {
      bool fresh = bound.insert(e.name()).second;
      collect_guards(e.body(), bound, in_init, out);
      if (fresh) bound.erase(e.name());
      return;
    }
    default:
      break;
  }
  for (const auto& a : e.args()) collect_guards(a, bound, in_init, out);
}

}  // namespace

TypeCheckResult type_check(const SpecExpr& e, const Env& env) {
  TypeChecker tc(env);
  TypeCheckResult r;
  r.type = tc.check(e);
  r.issues = std::move(tc.issues);
  if (!r.type && r.issues.empty()) r.issues.push_back({"ill-typed expression", render_spec_expr(e)});
  return r;
}

std::vector<SpecExpr> division_guards(const SpecExpr& e) {
  std::vector<SpecExpr> out;
  std::set<std::string> bound;
  collect_guards(e, bound, false, out);
  return out;
}

SpecExpr expand_definitions(const SpecExpr& e, const Env& env) {
  if (e.kind() == ExprKind::Num || e.kind() == ExprKind::Bool || e.is_reference()) return e;
  std::vector<SpecExpr> args;
  for (const auto& a : e.args()) args.push_back(expand_definitions(a, env));
  if (e.kind() == ExprKind::Apply) {
    if (const Definition* d = env.find_definition(e.name())) {
      Bindings b;
      for (std::size_t i = 0; i < d->params.size() && i < args.size(); ++i) b.emplace_back(d->params[i].name, args[i]);
      return expand_definitions(instantiate(d->body, b), env);
    }
  }
  return rebuild(e, std::move(args));
}

}  // namespace refinery
