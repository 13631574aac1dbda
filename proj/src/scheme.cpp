#include "refinery/refinement.hpp"
#include "refinery/spec_analysis.hpp"

namespace refinery {

namespace {

SpecExpr ref(const TypedParam& p) { return SpecExpr::reference(p); }

// x = x_0 for every frame variable
std::vector<SpecExpr> ties(const SpecStatement& s) {
  std::vector<SpecExpr> out;
  for (const auto& p : s.frame) out.push_back(equals(ref(p), SpecExpr::init(ref(p))));
  return out;
}

SpecExpr with_context(std::vector<SpecExpr> parts, const SchemeContext& ctx) {
  SpecExpr h = conj(parts);
  auto have = conjuncts(h);
  std::vector<SpecExpr> all{h};
  for (const auto& c : ctx.constant_context)
    if (std::find(have.begin(), have.end(), c) == have.end()) all.push_back(c);
  return conj(all);
}

// Pre-state reading of `e`: frame variables wrapped in Init.
SpecExpr freeze(const SpecExpr& e, const SpecStatement& s) {
  Bindings b;
  for (const auto& p : s.frame) b.emplace_back(p.name, SpecExpr::init(ref(p)));
  return substitute(e, b);
}

std::set<std::string> prog_names(const ProgExpr& e) { return free_vars(prog_expr_to_spec(e, Env{})); }

std::set<std::string> all_names(const SpecStatement& s, const SchemeContext& ctx) {
  std::set<std::string> taken = ctx.reserved;
  for (const auto& p : s.frame) taken.insert(p.name);
  for (const auto& p : s.constants) taken.insert(p.name);
  return taken;
}

void reject_init(const SpecExpr& e, const std::string& what, const std::string& law) {
  if (contains_init(e))
    throw LawError(law + ": " + what + " mentions an initial value, which would change meaning after splitting");
}

class Builder {
 public:
  Builder(const SpecStatement& s, const RefinementLaw& law, const SchemeContext& ctx)
      : s_(s), law_(law), ctx_(ctx), env_(s.env(ctx.definitions)), name_(to_string(law.kind)) {}

  RefinementStep build() {
    switch (law_.kind) {
      case LawKind::Skip: case LawKind::InitSkip: skip(); break;
      case LawKind::Seq: seq(); break;
      case LawKind::FlexSeq: flexseq(); break;
      case LawKind::Assign: assign(); break;
      case LawKind::FollowAssign: follow(); break;
      case LawKind::IfElse: ifelse(); break;
      case LawKind::Iterate: iterate(); break;
      case LawKind::Traverse: traverse(); break;
      case LawKind::Expand: expand(); break;
      case LawKind::ProcCall: call(); break;
    }
    return std::move(step_);
  }

 private:
  void oblige(const std::string& what, SpecExpr hyp, SpecExpr concl, const Env& env) {
    ProofObligation ob;
    std::string where = ctx_.origin.empty() ? "" : ctx_.origin + " ";
    ob.label = where + name_ + (what.empty() ? "" : " " + what);
    ob.origin = where + name_;
    ob.hypothesis = std::move(hyp);
    ob.conclusion = std::move(concl);
    ob.env = env;
    step_.obligations.push_back(std::move(ob));
  }
  void oblige(const std::string& what, SpecExpr hyp, SpecExpr concl) { oblige(what, hyp, concl, env_); }

  SpecStatement child(SpecExpr pre, SpecExpr post) const {
    SpecStatement c = s_;
    c.pre = std::move(pre);
    c.post = std::move(post);
    return c;
  }

  SpecExpr lift(const ProgExpr& e) const { return prog_expr_to_spec(e, env_); }

  ProgExpr lower(const SpecExpr& e, const std::string& what) const {
    try {
      return spec_to_prog_expr(e);
    } catch (const NotExecutable& err) {
      throw LawError(name_ + ": " + what + " is " + err.what());
    }
  }

  void require_frame(const std::string& name) const {
    if (!s_.in_frame(name)) throw LawError(name_ + ": '" + name + "' is not in the frame");
  }

  Bindings substitution(const std::vector<Binding>& bs) const {
    Bindings out;
    for (const auto& b : bs) {
      require_frame(b.target);
      const TypedParam* p = env_.find(b.target);
      if (b.index) out.emplace_back(b.target, SpecExpr::store(ref(*p), lift(*b.index), lift(b.value)));
      else out.emplace_back(b.target, lift(b.value));
    }
    return out;
  }

  // Left-to-right assignments; temporaries when a later right-hand side
  // reads an earlier target.
  std::vector<Statement> assignments(const std::vector<Binding>& bs) const {
    bool clash = false;
    std::set<std::string> written;
    for (const auto& b : bs) {
      auto reads = prog_names(b.value);
      if (b.index)
        for (const auto& n : prog_names(*b.index)) reads.insert(n);
      for (const auto& n : reads) clash = clash || written.count(n);
      written.insert(b.target);
    }
    std::vector<Statement> out;
    if (!clash) {
      for (const auto& b : bs)
        out.push_back(b.index ? Statement::assign_index(b.target, *b.index, b.value) : Statement::assign(b.target, b.value));
      return out;
    }
    std::set<std::string> taken = all_names(s_, ctx_);
    std::vector<std::pair<std::string, std::string>> temps;  // value temp, index temp
    for (const auto& b : bs) {
      std::string tv = fresh_name(b.target + "_tmp", taken);
      taken.insert(tv);
      out.push_back(Statement::assign(tv, b.value));
      std::string ti;
      if (b.index) {
        ti = fresh_name(b.target + "_idx", taken);
        taken.insert(ti);
        out.push_back(Statement::assign(ti, *b.index));
      }
      temps.emplace_back(tv, ti);
    }
    for (std::size_t k = 0; k < bs.size(); ++k) {
      const auto& b = bs[k];
      if (b.index)
        out.push_back(Statement::assign_index(b.target, ProgExpr::name(temps[k].second), ProgExpr::name(temps[k].first)));
      else
        out.push_back(Statement::assign(b.target, ProgExpr::name(temps[k].first)));
    }
    return out;
  }

  void skip() {
    auto h = ties(s_);
    h.push_back(s_.pre);
    oblige("", with_context(h, ctx_), s_.post);
    step_.code = Statement::pass();
  }

  void seq() {
    reject_init(s_.post, "the postcondition", name_);
    reject_init(law_.mid, "mid", name_);
    step_.children = {child(s_.pre, law_.mid), child(law_.mid, s_.post)};
    step_.code = Statement::seq({Statement::placeholder(1), Statement::placeholder(2)});
  }

  void flexseq() {
    reject_init(s_.post, "the postcondition", name_);
    for (const auto* f : {&law_.a, &law_.b, &law_.c, &law_.d}) reject_init(*f, "a parameter", name_);
    step_.children = {child(law_.a, law_.b), child(law_.c, law_.d)};
    step_.code = Statement::seq({Statement::placeholder(1), Statement::placeholder(2)});
    oblige("pre => A", with_context({s_.pre}, ctx_), law_.a);
    oblige("B => C", with_context({law_.b}, ctx_), law_.c);
    oblige("D => post", with_context({law_.d}, ctx_), s_.post);
  }

  void assign() {
    SpecExpr concl = substitute(s_.post, substitution(law_.bindings));
    auto h = ties(s_);
    h.push_back(s_.pre);
    oblige("", with_context(h, ctx_), concl);
    step_.code = Statement::seq(assignments(law_.bindings));
  }

  void follow() {
    SpecExpr mid = substitute(s_.post, substitution(law_.bindings));
    step_.children = {child(s_.pre, mid)};
    std::vector<Statement> code{Statement::placeholder(1)};
    for (auto& a : assignments(law_.bindings)) code.push_back(std::move(a));
    step_.code = Statement::seq(std::move(code));
  }

  void ifelse() {
    SpecExpr g = lift(*law_.guard);
    step_.children = {child(conj(s_.pre, g), s_.post), child(conj(s_.pre, negate(g)), s_.post)};
    step_.code = Statement::if_else(*law_.guard, Statement::placeholder(1), Statement::placeholder(2));
  }

  void iterate() {
    reject_init(s_.post, "the postcondition", name_);
    reject_init(law_.invariant, "I", name_);
    reject_init(law_.variant, "V", name_);
    const SpecExpr& inv = law_.invariant;
    const SpecExpr& v = law_.variant;
    SpecExpr g = lift(*law_.guard);
    bool first = inv != s_.pre;
    int body = first ? 2 : 1;
    if (first) step_.children.push_back(child(s_.pre, inv));
    SpecExpr decrease = SpecExpr::binary(ExprKind::Lt, v, SpecExpr::init(v));
    if (law_.mode == IterateMode::Initialised) {
      SpecExpr bounded = SpecExpr::binary(ExprKind::Le, SpecExpr::number(0), v);
      step_.children.push_back(child(conj(inv, g), conj({inv, bounded, decrease})));
      Statement loop = Statement::while_loop(*law_.guard, Statement::placeholder(body));
      step_.code = first ? Statement::seq({Statement::placeholder(1), loop}) : loop;
    } else {
      step_.children.push_back(child(conj(inv, g), conj(inv, decrease)));
      ProgExpr pv = lower(v, "V");
      std::string snap = fresh_name("v_prev", all_names(s_, ctx_));
      Statement loop = Statement::while_loop(
          *law_.guard, Statement::seq({Statement::assign(snap, pv), Statement::placeholder(body),
                                       Statement::assertion(ProgExpr::binary(ProgOp::Ne, pv, ProgExpr::name(snap)))}));
      step_.code = first ? Statement::seq({Statement::placeholder(1), loop}) : loop;
    }
    oblige("exit", with_context({inv, negate(g)}, ctx_), s_.post);
  }

  void traverse() {
    require_frame(law_.list);
    const TypedParam* l = env_.find(law_.list);
    if (!l->type.is_array()) throw LawError(name_ + ": '" + law_.list + "' is not an array");
    reject_init(s_.post, "the postcondition", name_);
    reject_init(law_.property, "P", name_);
    std::set<std::string> constants;
    for (const auto& p : s_.constants) constants.insert(p.name);
    for (const auto* bound : {&law_.from, &law_.to})
      for (const auto& n : free_vars(*bound))
        if (!constants.count(n)) throw LawError(name_ + ": range bound mentions '" + n + "', which is not a constant");
    const TypedParam* declared = env_.find(law_.index);
    if (declared && !s_.in_frame(law_.index))
      throw LawError(name_ + ": index '" + law_.index + "' is a constant");
    if (law_.index == law_.list) throw LawError(name_ + ": index and list must differ");
    TypedParam idx{law_.index, SpecType::nat(), ParamRole::Variant};
    Env ob_env = declared ? env_ : env_.with(idx);
    SpecExpr i = ref(idx);
    const SpecExpr& m = law_.from;
    const SpecExpr& n = law_.to;
    const SpecExpr& p = law_.property;

    SpecStatement first = child(s_.pre, instantiate(p, {{law_.index, m}}));
    SpecStatement body = s_;
    body.frame.erase(std::remove_if(body.frame.begin(), body.frame.end(),
                                    [&](const TypedParam& q) { return q.name == law_.index; }),
                     body.frame.end());
    TypedParam ro = idx;
    ro.role = ParamRole::Constant;
    body.constants.push_back(ro);
    // Inside the body the index is read-only.
    SpecExpr ic = ref(ro);
    body.pre = conj({SpecExpr::binary(ExprKind::Le, m, ic), SpecExpr::binary(ExprKind::Lt, ic, n),
                     instantiate(p, {{law_.index, ic}})});
    body.post = instantiate(p, {{law_.index, SpecExpr::binary(ExprKind::Add, ic, SpecExpr::number(1))}});
    step_.children = {first, body};

    ProgExpr pi = ProgExpr::name(law_.index);
    step_.code = Statement::seq(
        {Statement::placeholder(1), Statement::assign(law_.index, lower(m, "m")),
         Statement::while_loop(ProgExpr::binary(ProgOp::Lt, pi, lower(n, "n")),
                               Statement::seq({Statement::placeholder(2),
                                               Statement::assign(law_.index, ProgExpr::binary(ProgOp::Add, pi, ProgExpr::number(1)))}))});

    oblige("range", with_context({s_.pre}, ctx_), SpecExpr::binary(ExprKind::Le, m, n), ob_env);
    std::vector<SpecExpr> exit{instantiate(p, {{law_.index, n}})};
    if (declared) exit.push_back(equals(i, n));
    oblige("exit", with_context(exit, ctx_), s_.post, ob_env);
  }

  void expand() {
    SpecStatement c = s_;
    c.frame.push_back(*law_.local);
    if (law_.local_value) c.post = conj(s_.post, equals(ref(*law_.local), *law_.local_value));
    step_.children = {c};
    step_.code = Statement::placeholder(1);
  }

  void call() {
    if (!ctx_.library) throw LawError(name_ + ": no procedure library");
    const ProcedureEntry* entry = nullptr;
    for (const auto& e : *ctx_.library)
      if (e.name == law_.entry) entry = &e;
    if (!entry) throw LawError(name_ + ": no library entry '" + law_.entry + "'");
    if (entry->params.size() != law_.args.size())
      throw LawError(name_ + ": " + entry->name + " takes " + std::to_string(entry->params.size()) + " arguments");
    for (const auto& f : entry->frame) {
      const TypedParam* mine = env_.find(f.name);
      if (!mine || !s_.in_frame(f.name) || !(mine->type == f.type))
        throw LawError(name_ + ": " + entry->name + " changes '" + f.name + "', which is not a frame variable of type " +
                       to_string(f.type));
    }
    Env call_env = env_;
    if (entry->definitions && !entry->definitions->empty()) {
      auto merged = std::make_shared<Definitions>(*entry->definitions);
      if (ctx_.definitions)
        for (const auto& [k, d] : *ctx_.definitions) (*merged)[k] = d;
      call_env.definitions = merged;
    }
    Bindings at_call, after;
    for (std::size_t k = 0; k < law_.args.size(); ++k) {
      SpecExpr a = lift(law_.args[k]);
      auto t = type_check(a, env_);
      if (!t.ok() || !(t.type == entry->params[k].type || widens_to(*t.type, entry->params[k].type)))
        throw LawError(name_ + ": argument " + std::to_string(k + 1) + " does not fit " + entry->params[k].name + ":" +
                       to_string(entry->params[k].type));
      at_call.emplace_back(entry->params[k].name, a);
      after.emplace_back(entry->params[k].name, freeze(a, s_));
    }
    oblige("pre", with_context({s_.pre}, ctx_), instantiate(entry->pre, at_call), call_env);
    std::vector<SpecExpr> h{freeze(s_.pre, s_), instantiate(entry->post, after)};
    for (const auto& p : s_.frame) {
      bool changed = false;
      for (const auto& f : entry->frame) changed = changed || f.name == p.name;
      if (!changed) h.push_back(equals(ref(p), SpecExpr::init(ref(p))));
    }
    oblige("post", with_context(h, ctx_), s_.post, call_env);
    step_.code = Statement::call(entry->name, law_.args);
    step_.procedures = {entry->name};
  }

  const SpecStatement& s_;
  const RefinementLaw& law_;
  const SchemeContext& ctx_;
  Env env_;
  std::string name_;
  RefinementStep step_;
};

}  // namespace

RefinementStep apply_scheme(const SpecStatement& s, const RefinementLaw& law, const SchemeContext& ctx) {
  try {
    return Builder(s, law, ctx).build();
  } catch (const SubstitutionError& err) {
    throw LawError(std::string(to_string(law.kind)) + ": " + err.what());
  }
}

}  // namespace refinery
