#include "refinery/oracle.hpp"
#include "refinery/spec_analysis.hpp"

#include <algorithm>

namespace refinery {

namespace {

class Rules {
 public:
  Rules(const OracleContext& ctx, std::size_t budget) : ctx_(ctx), budget_(budget) {
    for (const auto& h : ctx.history) tried_.insert(h.law);
    domains_ = ctx.domains;
    domains_.budget = std::min<std::uint64_t>(domains_.budget, 200'000);
    scheme_.definitions = ctx.env.definitions;
    scheme_.constant_context = ctx.constant_context;
    scheme_.origin = ctx.path;
    for (const auto& p : ctx.env.params) scheme_.reserved.insert(p.name);
  }

  std::optional<LawProposal> run() {
    const SpecStatement& s = ctx_.statement;
    if (auto p = skip()) return p;
    if (!contains_init(s.post)) {
      if (auto p = iterate()) return p;
      if (auto p = traverse()) return p;
    }
    if (auto p = equalities()) return p;
    if (auto p = split()) return p;
    if (auto p = search()) return p;
    return std::nullopt;
  }

 private:
  // Parsed, not yet tried, and its scheme applies.
  std::optional<LawProposal> candidate(const std::string& line) {
    try {
      RefinementLaw law = parse_law(line, ctx_.env);
      std::string text = render_law(law);
      if (tried_.count(text)) return std::nullopt;
      apply_scheme(ctx_.statement, law, scheme_);
      return LawProposal{law, text, "", line};
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  std::optional<LawProposal> accept(const std::string& line, const std::string& why) {
    auto p = candidate(line);
    if (p) p->rationale = why;
    return p;
  }

  VcStatus bounded(const SpecExpr& hyp, const SpecExpr& concl) {
    if (checks_ >= budget_) return VcStatus::Unknown;
    ++checks_;
    ProofObligation ob;
    ob.label = "heuristic";
    ob.env = ctx_.env;
    ob.hypothesis = hyp;
    ob.conclusion = concl;
    return check_bounded(ob, domains_).status;
  }

  // Every obligation of the law proves on the grid.
  bool proves(const LawProposal& p) {
    try {
      for (const auto& ob : apply_scheme(ctx_.statement, p.law, scheme_).obligations)
        if (bounded(ob.hypothesis, ob.conclusion) != VcStatus::Proved) return false;
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  std::optional<LawProposal> skip() {
    auto p = candidate("skip");
    if (p && proves(*p)) {
      p->rationale = "the precondition already implies the postcondition";
      return p;
    }
    return std::nullopt;
  }

  // post = I /\ R with I taken from pre; the loop runs while R fails.
  std::optional<LawProposal> iterate() {
    auto pre = conjuncts(ctx_.statement.pre);
    std::vector<SpecExpr> inv, rest;
    for (const auto& c : conjuncts(ctx_.statement.post))
      (std::find(pre.begin(), pre.end(), c) != pre.end() ? inv : rest).push_back(c);
    if (inv.empty() || rest.size() != 1 || rest[0].args().size() != 2) return std::nullopt;
    const SpecExpr& r = rest[0];
    SpecExpr a = r.arg(0), b = r.arg(1);
    ExprKind guard;
    bool flip = false;  // variant is b - a
    switch (r.kind()) {
      case ExprKind::Le: guard = ExprKind::Gt; break;
      case ExprKind::Lt: guard = ExprKind::Ge; break;
      case ExprKind::Ge: guard = ExprKind::Lt; flip = true; break;
      case ExprKind::Gt: guard = ExprKind::Le; flip = true; break;
      default: return std::nullopt;
    }
    SpecExpr g = SpecExpr::binary(guard, a, b);
    // The gap itself, then the gap between the variable parts only.
    std::vector<SpecExpr> variants;
    auto gap = [&](const SpecExpr& x, const SpecExpr& y) {
      variants.push_back(flip ? SpecExpr::binary(ExprKind::Sub, y, x) : SpecExpr::binary(ExprKind::Sub, x, y));
    };
    gap(a, b);
    SpecExpr va = variable_part(a), vb = variable_part(b);
    if (!(va == a && vb == b)) gap(va, vb);
    for (const auto& v : variants)
      if (auto p = accept("iterate I: " + render_spec_expr(conj(inv)) + " G: " + render_spec_expr(g) +
                              " V: " + render_spec_expr(v),
                          "keep the shared conjuncts invariant and loop until the remaining one holds"))
        return p;
    return std::nullopt;
  }

  // Drops addends that mention only constants: `x + e` -> `x`.
  SpecExpr variable_part(const SpecExpr& e) {
    auto constant = [&](const SpecExpr& t) {
      for (const auto& n : free_vars(t))
        if (ctx_.statement.in_frame(n)) return false;
      return true;
    };
    if (e.kind() == ExprKind::Add || e.kind() == ExprKind::Sub) {
      if (constant(e.arg(1))) return variable_part(e.arg(0));
      if (e.kind() == ExprKind::Add && constant(e.arg(0))) return variable_part(e.arg(1));
    }
    return e;
  }

  // post = forall (k:T), m <= k /\ k < n -> Q
  std::optional<LawProposal> traverse() {
    const SpecExpr& post = ctx_.statement.post;
    if (post.kind() != ExprKind::Forall || post.body().kind() != ExprKind::Implies) return std::nullopt;
    const std::string& k = post.name();
    auto range = conjuncts(post.body().arg(0));
    const SpecExpr& q = post.body().arg(1);
    auto is_k = [&](const SpecExpr& e) { return e.is_reference() && e.name() == k; };
    std::optional<SpecExpr> lo, hi;
    for (const auto& c : range) {
      if (c.kind() == ExprKind::Le && is_k(c.arg(1))) lo = c.arg(0);
      else if (c.kind() == ExprKind::Lt && is_k(c.arg(0))) hi = c.arg(1);
      else return std::nullopt;
    }
    if (!hi) return std::nullopt;
    SpecExpr m = lo ? *lo : SpecExpr::number(0);
    std::string list;
    auto used = free_vars(q);
    for (const auto& p : ctx_.statement.frame)
      if (p.type.is_array() && used.count(p.name)) {
        list = p.name;
        break;
      }
    if (list.empty()) return std::nullopt;
    std::set<std::string> taken = scheme_.reserved;
    taken.insert(k);
    std::string i = fresh_name("i", taken);
    // P(l, i): the prefix property plus whatever the precondition says about l.
    TypedParam ip{i, SpecType::nat(), ParamRole::Variant};
    SpecExpr iref = SpecExpr::reference(ip);
    std::vector<SpecExpr> ranged;
    if (lo) ranged.push_back(SpecExpr::binary(ExprKind::Le, m, SpecExpr::variable(k)));
    ranged.push_back(SpecExpr::binary(ExprKind::Lt, SpecExpr::variable(k), iref));
    SpecExpr prefix = SpecExpr::quantifier(ExprKind::Forall, k, post.bound_type(), implies(conj(ranged), q));
    std::vector<SpecExpr> parts;
    std::set<std::string> constants;
    for (const auto& p : ctx_.statement.constants) constants.insert(p.name);
    for (const auto& c : conjuncts(ctx_.statement.pre)) {
      bool ok = true;
      for (const auto& n : free_vars(c)) ok = ok && (constants.count(n) || n == list);
      if (ok && free_vars(c).count(list)) parts.push_back(c);
    }
    parts.push_back(prefix);
    return accept("traverse " + list + " " + i + " m: " + render_spec_expr(m) + " n: " + render_spec_expr(*hi) +
                      " P: " + render_spec_expr(conj(parts)),
                  "the postcondition ranges over an index interval");
  }

  // x_0 read as x; valid in assignment right-hand sides because of the ties.
  SpecExpr strip_init(const SpecExpr& e) {
    if (e.kind() == ExprKind::Init) return strip_init(e.arg(0));
    if (e.args().empty()) return e;
    switch (e.kind()) {
      case ExprKind::Forall: case ExprKind::Exists:
        return SpecExpr::quantifier(e.kind(), e.name(), e.bound_type(), strip_init(e.body()));
      case ExprKind::Select: return SpecExpr::select(strip_init(e.arg(0)), strip_init(e.arg(1)));
      case ExprKind::Slice: return SpecExpr::slice(strip_init(e.arg(0)), strip_init(e.arg(1)), strip_init(e.arg(2)));
      case ExprKind::Store:
        return SpecExpr::store(strip_init(e.arg(0)), strip_init(e.arg(1)), strip_init(e.arg(2)));
      case ExprKind::Apply: {
        std::vector<SpecExpr> args;
        for (const auto& a : e.args()) args.push_back(strip_init(a));
        return SpecExpr::apply(e.name(), args);
      }
      default:
        if (e.args().size() == 1) return SpecExpr::unary(e.kind(), strip_init(e.arg(0)));
        return SpecExpr::binary(e.kind(), strip_init(e.arg(0)), strip_init(e.arg(1)));
    }
  }

  // post = x = E /\ y = F with E, F free of the targets' current values.
  std::optional<LawProposal> equalities() {
    std::vector<std::pair<std::string, SpecExpr>> eqs;
    std::set<std::string> targets;
    for (const auto& c : conjuncts(ctx_.statement.post)) {
      if (c.kind() != ExprKind::Eq) return std::nullopt;
      const SpecExpr *lhs = &c.arg(0), *rhs = &c.arg(1);
      if (!(lhs->kind() == ExprKind::Var && ctx_.statement.in_frame(lhs->name()))) std::swap(lhs, rhs);
      if (!(lhs->kind() == ExprKind::Var && ctx_.statement.in_frame(lhs->name()))) return std::nullopt;
      if (!targets.insert(lhs->name()).second) return std::nullopt;
      eqs.emplace_back(lhs->name(), *rhs);
    }
    std::string line = "assign ";
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      for (const auto& n : free_vars(eqs[k].second))
        if (targets.count(n)) return std::nullopt;
      try {
        line += (k ? ", " : "") + eqs[k].first + " := " + render_prog_expr(spec_to_prog_expr(strip_init(eqs[k].second)));
      } catch (const NotExecutable&) {
        return std::nullopt;
      }
    }
    return accept(line, "the postcondition fixes each variable");
  }

  std::vector<std::string> values_for(const TypedParam& v) {
    std::vector<std::string> out{"0", "1"};
    if (!v.type.is_numeric()) return {};
    for (const auto& c : ctx_.statement.constants)
      if (c.type.is_numeric()) out.push_back(c.name);
    for (const auto& f : ctx_.statement.frame)
      if (f.name != v.name && f.type.is_numeric()) out.push_back(f.name);
    out.push_back(v.name + " + 1");
    out.push_back(v.name + " - 1");
    for (const auto& c : ctx_.statement.constants)
      if (c.type.is_numeric()) out.push_back(c.name + " + 1");
    if (v.type.kind() == SpecType::Kind::Float) {
      const auto& fr = ctx_.statement.frame;
      for (std::size_t a = 0; a < fr.size(); ++a)
        for (std::size_t b = a + 1; b < fr.size(); ++b)
          if (fr[a].type.is_numeric() && fr[b].type.is_numeric())
            out.push_back("(" + fr[a].name + " + " + fr[b].name + ") / 2");
    }
    return out;
  }

  // Array element writes suggested by `l[k] = E` patterns under a quantifier,
  // instantiated at each nat constant (a traversal index).
  void element_writes(const SpecExpr& e, std::vector<std::string>& out) {
    if (e.kind() == ExprKind::Forall || e.kind() == ExprKind::Exists) {
      std::vector<std::pair<SpecExpr, SpecExpr>> eqs;
      collect_eqs(e.body(), e.name(), eqs);
      for (const auto& [sel, rhs] : eqs)
        for (const auto& c : ctx_.statement.constants) {
          if (c.type.kind() != SpecType::Kind::Nat) continue;
          SpecExpr value = instantiate(rhs, {{e.name(), SpecExpr::reference(c)}});
          try {
            out.push_back("assign " + sel.arg(0).name() + "[" + c.name + "] := " +
                          render_prog_expr(spec_to_prog_expr(strip_init(value))));
          } catch (const std::exception&) {
          }
        }
    }
    for (const auto& a : e.args()) element_writes(a, out);
  }

  void collect_eqs(const SpecExpr& e, const std::string& k, std::vector<std::pair<SpecExpr, SpecExpr>>& out) {
    if (e.kind() == ExprKind::Eq) {
      for (int side = 0; side < 2; ++side) {
        const SpecExpr& s = e.arg(side);
        if (s.kind() == ExprKind::Select && s.arg(0).kind() == ExprKind::Var && ctx_.statement.in_frame(s.arg(0).name()) &&
            s.arg(1).is_reference() && s.arg(1).name() == k)
          out.emplace_back(s, e.arg(1 - side));
      }
      return;
    }
    for (const auto& a : e.args()) collect_eqs(a, k, out);
  }

  // Establish all but the last conjunct first; refused when the
  // precondition already gives the midpoint, which would not progress.
  std::optional<LawProposal> split() {
    if (contains_init(ctx_.statement.post)) return std::nullopt;
    auto cs = conjuncts(ctx_.statement.post);
    if (cs.size() < 2) return std::nullopt;
    cs.pop_back();
    auto pre = conjuncts(ctx_.statement.pre);
    bool progress = false;
    for (const auto& c : cs) progress = progress || std::find(pre.begin(), pre.end(), c) == pre.end();
    if (!progress) return std::nullopt;
    return accept("seq mid: " + render_spec_expr(conj(cs)), "establish the leading conjuncts first");
  }

  std::optional<LawProposal> search() {
    const std::size_t reserve = budget_ / 4;  // kept for the branch analysis
    const auto& frame = ctx_.statement.frame;
    std::vector<std::string> singles;
    element_writes(ctx_.statement.post, singles);
    for (const auto& v : frame)
      for (const auto& val : values_for(v)) singles.push_back("assign " + v.name + " := " + val);
    std::vector<LawProposal> refuted;
    for (const auto& line : singles) {
      auto p = candidate(line);
      if (!p) continue;
      if (proves(*p)) {
        p->rationale = "candidate assignment proves on the grid";
        return p;
      }
      refuted.push_back(*p);
      if (checks_ + reserve >= budget_) break;
    }
    // Two variables at once.
    std::vector<std::pair<const TypedParam*, std::vector<std::string>>> scalars;
    for (const auto& v : frame)
      if (v.type.is_numeric()) scalars.emplace_back(&v, values_for(v));
    for (std::size_t a = 0; a < scalars.size(); ++a)
      for (std::size_t b = a + 1; b < scalars.size(); ++b)
        for (const auto& va : scalars[a].second)
          for (const auto& vb : scalars[b].second) {
            if (checks_ + reserve >= budget_) break;
            auto p = candidate("assign " + scalars[a].first->name + " := " + va + ", " + scalars[b].first->name +
                               " := " + vb);
            if (p && proves(*p)) {
              p->rationale = "candidate assignment proves on the grid";
              return p;
            }
          }
    // Branch on what a near-miss candidate gets wrong; the candidate that
    // misses the fewest conjuncts wins.
    budget_ += checks_;
    std::optional<std::pair<std::size_t, LawProposal>> best;
    for (const auto& p : refuted) {
      if (p.law.bindings.size() != 1) continue;
      auto obs = apply_scheme(ctx_.statement, p.law, scheme_).obligations;
      if (obs.size() != 1) continue;
      std::vector<SpecExpr> failing;
      bool some_hold = false, unknown = false;
      for (const auto& c : conjuncts(obs[0].conclusion)) {
        VcStatus st = bounded(obs[0].hypothesis, c);
        if (st == VcStatus::Refuted) failing.push_back(c);
        else if (st == VcStatus::Proved) some_hold = true;
        else unknown = true;
      }
      if (unknown || failing.empty() || !some_hold || contains_init(conj(failing))) continue;
      if (best && best->first <= failing.size()) continue;
      SpecExpr g = conj(failing);
      // Both branches must be reachable.
      if (bounded(ctx_.statement.pre, negate(g)) != VcStatus::Refuted) continue;
      try {
        auto q = accept("ifelse G: " + render_prog_expr(spec_to_prog_expr(g)),
                        "`" + p.text + "` works exactly when the guard holds");
        if (q) best.emplace(failing.size(), *q);
      } catch (const NotExecutable&) {
      }
    }
    if (best) return best->second;
    return std::nullopt;
  }

  const OracleContext& ctx_;
  std::size_t budget_;
  std::size_t checks_ = 0;
  std::set<std::string> tried_;
  DomainSpec domains_;
  SchemeContext scheme_;
};

}  // namespace

LawProposal HeuristicOracle::propose(const OracleContext& ctx) {
  Rules rules(ctx, budget_);
  if (auto p = rules.run()) {
    p->raw = p->text;
    return *p;
  }
  throw NoProposalFound("no heuristic rule applies at node " + ctx.path);
}

}  // namespace refinery
