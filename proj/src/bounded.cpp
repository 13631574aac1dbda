#include "refinery/spec_analysis.hpp"
#include "refinery/spec_eval.hpp"
#include "refinery/verifier.hpp"

#include <chrono>

namespace refinery {

std::string to_string(VcStatus s) {
  switch (s) {
    case VcStatus::Pending: return "pending";
    case VcStatus::Proved: return "proved";
    case VcStatus::Refuted: return "refuted";
    case VcStatus::Unknown: return "unknown";
  }
  return "?";
}

std::string ProofObligation::render() const {
  return render_spec_expr(implies(hypothesis, conclusion));
}

namespace {

// Free names read in the current state (not under Init).
void current_names(const SpecExpr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::Var: case ExprKind::Const:
      if (!bound.count(e.name())) out.insert(e.name());
      return;
    case ExprKind::Init:
      // Only constants are read in the current state from under Init.
      for (const auto& n : free_vars(e))
        if (!bound.count(n) && !init_vars(e).count(n)) out.insert(n);
      return;
    case ExprKind::Forall: case ExprKind::Exists: {
      bool fresh = bound.insert(e.name()).second;
      current_names(e.body(), bound, out);
      if (fresh) bound.erase(e.name());
      return;
    }
    default:
      for (const auto& a : e.args()) current_names(a, bound, out);
  }
}

std::set<std::string> current_names(const SpecExpr& e) {
  std::set<std::string> bound, out;
  current_names(e, bound, out);
  return out;
}

SpecExpr guarded_hypothesis(const ProofObligation& ob) {
  std::vector<SpecExpr> parts{ob.hypothesis};
  for (const auto& g : division_guards(ob.hypothesis))
    parts.push_back(SpecExpr::binary(ExprKind::Ne, g, SpecExpr::number(0)));
  for (const auto& g : division_guards(ob.conclusion))
    parts.push_back(SpecExpr::binary(ExprKind::Ne, g, SpecExpr::number(0)));
  return conj(parts);
}

// Names x with a top-level hypothesis conjunct `x = x_0` (or `x_0 = x`).
std::set<std::string> tied_names(const SpecExpr& hyp) {
  std::set<std::string> out;
  for (const auto& c : conjuncts(hyp)) {
    if (c.kind() != ExprKind::Eq) continue;
    const SpecExpr& a = c.arg(0);
    const SpecExpr& b = c.arg(1);
    auto tie = [&](const SpecExpr& cur, const SpecExpr& init) {
      if (cur.is_reference() && init.kind() == ExprKind::Init && init.arg(0).is_reference() &&
          init.arg(0).name() == cur.name())
        out.insert(cur.name());
    };
    tie(a, b);
    tie(b, a);
  }
  return out;
}

void split(const Valuation& point, const std::set<std::string>& init_names, Valuation& cur, Valuation& pre) {
  for (const auto& [k, v] : point) {
    if (k.size() > 2 && k.compare(k.size() - 2, 2, "_0") == 0 && init_names.count(k.substr(0, k.size() - 2)))
      pre[k.substr(0, k.size() - 2)] = v;
    else
      cur[k] = v;
  }
}

}  // namespace

bool validates(const ProofObligation& ob, const Valuation& cex, const DomainSpec& d) {
  SpecExpr hyp = guarded_hypothesis(ob);
  std::set<std::string> inits = init_vars(hyp);
  auto more = init_vars(ob.conclusion);
  inits.insert(more.begin(), more.end());
  Valuation cur, pre;
  split(cex, inits, cur, pre);
  try {
    return holds(hyp, cur, pre, d, ob.env.definitions) && !holds(ob.conclusion, cur, pre, d, ob.env.definitions);
  } catch (const EvalError&) {
    return false;
  }
}

VcResult check_bounded(const ProofObligation& ob, const DomainSpec& d) {
  auto start = std::chrono::steady_clock::now();
  VcResult r;
  r.backend = "bounded";
  auto finish = [&](VcResult res) {
    res.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  };

  SpecExpr hyp = guarded_hypothesis(ob);
  std::set<std::string> cur_names = current_names(hyp);
  for (const auto& n : current_names(ob.conclusion)) cur_names.insert(n);
  std::set<std::string> init_names = init_vars(hyp);
  for (const auto& n : init_vars(ob.conclusion)) init_names.insert(n);
  std::set<std::string> tied = tied_names(ob.hypothesis);

  // Enumerated keys: current names, plus `x_0` for untied Init names.
  struct Axis {
    std::string key;
    std::vector<Value> carrier;
  };
  std::vector<Axis> axes;
  std::map<std::string, std::string> key_base;
  for (const auto& n : cur_names) key_base[n] = n;
  for (const auto& n : init_names)
    if (!(tied.count(n) && cur_names.count(n))) key_base[n + "_0"] = n;
  double points = 1;
  for (const auto& [key, base] : key_base) {
    const TypedParam* p = ob.env.find(base);
    if (!p) {
      r.status = VcStatus::Unknown;
      r.reason = "no declared type for " + base;
      return finish(r);
    }
    Axis ax{key, {}};
    try {
      ax.carrier = d.carrier_for(base, p->type);
    } catch (const DomainError& err) {
      r.status = VcStatus::Unknown;
      r.reason = err.what();
      return finish(r);
    }
    if (ax.carrier.empty()) {
      r.status = VcStatus::Unknown;
      r.reason = "empty carrier for " + base;
      return finish(r);
    }
    points *= static_cast<double>(ax.carrier.size());
    axes.push_back(std::move(ax));
  }
  if (points > static_cast<double>(d.budget)) {
    r.status = VcStatus::Unknown;
    r.reason = "enumeration budget exceeded (" + std::to_string(static_cast<unsigned long long>(points)) + " points)";
    return finish(r);
  }

  std::vector<std::size_t> idx(axes.size(), 0);
  std::optional<std::string> eval_problem;
  while (true) {
    Valuation cur, pre;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto& key = axes[k].key;
      const auto& base = key_base[key];
      if (key == base) cur[key] = axes[k].carrier[idx[k]];
      else pre[base] = axes[k].carrier[idx[k]];
    }
    for (const auto& n : tied)
      if (cur.count(n)) pre[n] = cur[n];
    bool hyp_true = false;
    try {
      hyp_true = holds(hyp, cur, pre, d, ob.env.definitions);
    } catch (const EvalError&) {
      hyp_true = false;
    }
    if (hyp_true) {
      try {
        if (!holds(ob.conclusion, cur, pre, d, ob.env.definitions)) {
          Valuation cex = cur;
          for (const auto& [n, v] : pre) cex[n + "_0"] = v;
          r.status = VcStatus::Refuted;
          r.counterexample = cex;
          return finish(r);
        }
      } catch (const EvalError& err) {
        if (!eval_problem) {
          Valuation at = cur;
          for (const auto& [n, v] : pre) at[n + "_0"] = v;
          eval_problem = std::string(err.what()) + " at " + render_valuation(at);
        }
      }
    }
    // odometer, last axis fastest
    bool wrapped = true;
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].carrier.size()) {
        wrapped = false;
        break;
      }
      idx[k] = 0;
    }
    if (wrapped) break;
  }
  if (eval_problem) {
    r.status = VcStatus::Unknown;
    r.reason = *eval_problem;
  } else {
    r.status = VcStatus::Proved;
  }
  return finish(r);
}

}  // namespace refinery
