#include "refinery/refinement.hpp"
#include "refinery/spec_analysis.hpp"

#include <cctype>

namespace refinery {

std::string to_string(LawKind k) {
  switch (k) {
    case LawKind::Skip: return "skip";
    case LawKind::InitSkip: return "initskip";
    case LawKind::Seq: return "seq";
    case LawKind::FlexSeq: return "flexseq";
    case LawKind::Assign: return "assign";
    case LawKind::FollowAssign: return "follow";
    case LawKind::IfElse: return "ifelse";
    case LawKind::Iterate: return "iterate";
    case LawKind::Traverse: return "traverse";
    case LawKind::Expand: return "expand";
    case LawKind::ProcCall: return "call";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

const std::map<std::string, LawKind>& keywords() {
  static const std::map<std::string, LawKind> k = {
      {"skip", LawKind::Skip},         {"initskip", LawKind::InitSkip}, {"seq", LawKind::Seq},
      {"flexseq", LawKind::FlexSeq},   {"assign", LawKind::Assign},     {"follow", LawKind::FollowAssign},
      {"ifelse", LawKind::IfElse},     {"iterate", LawKind::Iterate},   {"traverse", LawKind::Traverse},
      {"expand", LawKind::Expand},     {"call", LawKind::ProcCall}};
  return k;
}

// Splits `A: f B: g` at depth-0 labels from `allowed`. Text before the
// first label is returned under "".
std::map<std::string, std::string> split_labeled(const std::string& s, const std::set<std::string>& allowed) {
  std::map<std::string, std::string> out;
  std::string current;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth != 0 || !std::isalpha(static_cast<unsigned char>(c))) continue;
    if (i > 0 && !std::isspace(static_cast<unsigned char>(s[i - 1]))) continue;
    std::size_t j = i;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
    if (j >= s.size() || s[j] != ':') continue;
    if (j + 1 < s.size() && !std::isspace(static_cast<unsigned char>(s[j + 1]))) continue;
    std::string label = s.substr(i, j - i);
    if (!allowed.count(label)) continue;
    if (out.count(current) && !current.empty()) throw LawError("duplicate parameter " + current);
    out[current] = trim(s.substr(start, i - start));
    if (out.count(label)) throw LawError("duplicate parameter " + label);
    current = label;
    start = j + 1;
    i = j;
  }
  if (out.count(current) && !current.empty()) throw LawError("duplicate parameter " + current);
  out[current] = trim(s.substr(start));
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(' || s[i] == '[') ++depth;
    if (s[i] == ')' || s[i] == ']') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::string last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

const std::string& need(const std::map<std::string, std::string>& m, const std::string& key, const std::string& law) {
  auto it = m.find(key);
  if (it == m.end() || it->second.empty()) throw LawError(law + ": missing " + key + ":");
  return it->second;
}

SpecExpr formula(const std::string& text, const Env& env, const std::string& what) {
  try {
    return parse_formula(text, env);
  } catch (const std::exception& err) {
    throw LawError(what + ": " + err.what());
  }
}

SpecExpr term(const std::string& text, const Env& env, const std::string& what) {
  try {
    SpecExpr e = parse_spec_expr(text, env);
    auto t = type_check(e, env);
    if (!t.ok() || !t.type->is_numeric()) throw LawError(what + ": expected a numeric term");
    return e;
  } catch (const LawError&) {
    throw;
  } catch (const std::exception& err) {
    throw LawError(what + ": " + err.what());
  }
}

ProgExpr program_expr(const std::string& text, const Env& env, const std::string& what,
                      std::optional<SpecType>* type_out = nullptr) {
  ProgExpr e;
  try {
    e = parse_prog_expr(text);
  } catch (const std::exception& err) {
    throw LawError(what + ": " + err.what());
  }
  SpecExpr s = prog_expr_to_spec(e, env);
  for (const auto& n : free_vars(s))
    if (!env.find(n)) throw LawError(what + ": unknown name '" + n + "'");
  auto t = type_check(s, env);
  if (!t.ok()) {
    std::string msg = what + ": ";
    for (const auto& i : t.issues) msg += i.message + " ";
    throw LawError(trim(msg));
  }
  if (type_out) *type_out = t.type;
  return e;
}

ProgExpr guard(const std::string& text, const Env& env, const std::string& what) {
  std::optional<SpecType> t;
  ProgExpr g = program_expr(text, env, what, &t);
  if (!t || !t->is_bool()) throw LawError(what + ": guard must be boolean");
  return g;
}

bool assignable(const SpecType& from, const SpecType& to) {
  if (from == to) return true;
  if (from.is_numeric() && to.is_numeric()) return widens_to(from, to);
  return false;
}

std::vector<Binding> bindings(const std::string& text, const Env& env, const std::string& law) {
  std::vector<Binding> out;
  std::set<std::string> targets;
  for (const auto& part : split_commas(text)) {
    auto arrow = part.find(":=");
    if (arrow == std::string::npos) throw LawError(law + ": expected 'x := e'");
    std::string lhs = trim(part.substr(0, arrow));
    std::string rhs = trim(part.substr(arrow + 2));
    Binding b;
    auto bracket = lhs.find('[');
    b.target = trim(lhs.substr(0, bracket));
    const TypedParam* p = env.find(b.target);
    if (!p) throw LawError(law + ": unknown target '" + b.target + "'");
    SpecType want = p->type;
    if (bracket != std::string::npos) {
      if (lhs.back() != ']') throw LawError(law + ": malformed target '" + lhs + "'");
      if (!p->type.is_array()) throw LawError(law + ": '" + b.target + "' is not an array");
      std::optional<SpecType> it;
      b.index = program_expr(lhs.substr(bracket + 1, lhs.size() - bracket - 2), env, law + " index", &it);
      if (!it || !widens_to(*it, SpecType::integer())) throw LawError(law + ": index must be an integer");
      want = p->type.element();
    }
    if (!targets.insert(b.target).second) throw LawError(law + ": '" + b.target + "' assigned twice");
    std::optional<SpecType> vt;
    b.value = program_expr(rhs, env, law + " value", &vt);
    if (!vt || !assignable(*vt, want))
      throw LawError(law + ": cannot assign " + (vt ? to_string(*vt) : "?") + " to " + lhs + " : " + to_string(want));
    out.push_back(std::move(b));
  }
  if (out.empty()) throw LawError(law + ": no assignments");
  return out;
}

std::string render_bindings(const std::vector<Binding>& bs) {
  std::string out;
  for (const auto& b : bs) {
    if (!out.empty()) out += ", ";
    out += b.target;
    if (b.index) out += "[" + render_prog_expr(*b.index) + "]";
    out += " := " + render_prog_expr(b.value);
  }
  return out;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace

bool looks_like_law(std::string_view line) {
  std::string t = trim(line);
  std::size_t j = 0;
  while (j < t.size() && std::isalpha(static_cast<unsigned char>(t[j]))) ++j;
  return keywords().count(t.substr(0, j)) > 0 && (j == t.size() || !std::isalnum(static_cast<unsigned char>(t[j])));
}

RefinementLaw parse_law(std::string_view line, const Env& env) {
  std::string t = trim(line);
  std::size_t j = 0;
  while (j < t.size() && std::isalpha(static_cast<unsigned char>(t[j]))) ++j;
  auto kw = keywords().find(t.substr(0, j));
  if (kw == keywords().end()) throw LawError("unknown law '" + t.substr(0, j) + "'");
  std::string rest = trim(t.substr(j));
  const std::string name = kw->first;
  RefinementLaw law;
  law.kind = kw->second;
  switch (law.kind) {
    case LawKind::Skip: case LawKind::InitSkip:
      if (!rest.empty()) throw LawError(name + " takes no parameters");
      break;
    case LawKind::Seq: {
      auto m = split_labeled(rest, {"mid"});
      if (!m[""].empty()) throw LawError("seq: expected 'mid:'");
      law.mid = formula(need(m, "mid", name), env, "seq mid");
      break;
    }
    case LawKind::FlexSeq: {
      auto m = split_labeled(rest, {"A", "B", "C", "D"});
      if (!m[""].empty()) throw LawError("flexseq: expected 'A:'");
      law.a = formula(need(m, "A", name), env, "flexseq A");
      law.b = formula(need(m, "B", name), env, "flexseq B");
      law.c = formula(need(m, "C", name), env, "flexseq C");
      law.d = formula(need(m, "D", name), env, "flexseq D");
      break;
    }
    case LawKind::Assign: case LawKind::FollowAssign:
      law.bindings = bindings(rest, env, name);
      break;
    case LawKind::IfElse: {
      auto m = split_labeled(rest, {"G"});
      if (!m[""].empty()) throw LawError("ifelse: expected 'G:'");
      law.guard = guard(need(m, "G", name), env, "ifelse G");
      break;
    }
    case LawKind::Iterate: {
      auto m = split_labeled(rest, {"I", "G", "V", "mode"});
      if (!m[""].empty()) throw LawError("iterate: expected 'I:'");
      law.invariant = formula(need(m, "I", name), env, "iterate I");
      law.guard = guard(need(m, "G", name), env, "iterate G");
      law.variant = term(need(m, "V", name), env, "iterate V");
      if (m.count("mode")) {
        if (m["mode"] == "flexible") law.mode = IterateMode::Flexible;
        else if (m["mode"] == "initialised" || m["mode"] == "initialized") law.mode = IterateMode::Initialised;
        else throw LawError("iterate: unknown mode '" + m["mode"] + "'");
      }
      break;
    }
    case LawKind::Traverse: {
      auto m = split_labeled(rest, {"m", "n", "P"});
      std::string head = m[""];
      auto sp = head.find_first_of(" \t");
      if (sp == std::string::npos) throw LawError("traverse: expected 'traverse l i m: ...'");
      law.list = trim(head.substr(0, sp));
      law.index = trim(head.substr(sp));
      if (!is_identifier(law.list) || !is_identifier(law.index)) throw LawError("traverse: expected names for l and i");
      const TypedParam* l = env.find(law.list);
      if (!l) throw LawError("traverse: unknown list '" + law.list + "'");
      if (!l->type.is_array()) throw LawError("traverse: '" + law.list + "' is not an array");
      Env inner = env;
      if (const TypedParam* i = env.find(law.index)) {
        if (i->type.kind() != SpecType::Kind::Nat) throw LawError("traverse: index '" + law.index + "' must be nat");
      } else {
        inner = env.with({law.index, SpecType::nat(), ParamRole::Variant});
      }
      law.from = term(need(m, "m", name), env, "traverse m");
      law.to = term(need(m, "n", name), env, "traverse n");
      law.property = formula(need(m, "P", name), inner, "traverse P");
      break;
    }
    case LawKind::Expand: {
      auto m = split_labeled(rest, {"init"});
      std::vector<TypedParam> ps;
      try {
        ps = parse_params(m[""]);
      } catch (const std::exception& err) {
        throw LawError(std::string("expand: ") + err.what());
      }
      if (ps.size() != 1) throw LawError("expand: expected one '(y:T)'");
      if (env.find(ps[0].name)) throw LawError("expand: '" + ps[0].name + "' is already declared");
      ps[0].role = ParamRole::Variant;
      law.local = ps[0];
      if (m.count("init")) {
        Env inner = env.with(ps[0]);
        SpecExpr v;
        try {
          v = parse_spec_expr(m["init"], inner);
        } catch (const std::exception& err) {
          throw LawError(std::string("expand init: ") + err.what());
        }
        auto vt = type_check(v, inner);
        if (!vt.ok() || !assignable(*vt.type, ps[0].type)) throw LawError("expand init: type does not fit " + ps[0].name);
        law.local_value = v;
      }
      break;
    }
    case LawKind::ProcCall: {
      auto open = rest.find('(');
      if (open == std::string::npos || rest.back() != ')') throw LawError("call: expected 'call f(args)'");
      law.entry = trim(rest.substr(0, open));
      if (!is_identifier(law.entry)) throw LawError("call: bad procedure name");
      std::string inside = rest.substr(open + 1, rest.size() - open - 2);
      for (const auto& a : split_commas(inside)) law.args.push_back(program_expr(a, env, "call argument"));
      break;
    }
  }
  return law;
}

std::string render_law(const RefinementLaw& law) {
  std::string k = to_string(law.kind);
  switch (law.kind) {
    case LawKind::Skip: case LawKind::InitSkip: return k;
    case LawKind::Seq: return k + " mid: " + render_spec_expr(law.mid);
    case LawKind::FlexSeq:
      return k + " A: " + render_spec_expr(law.a) + " B: " + render_spec_expr(law.b) + " C: " + render_spec_expr(law.c) +
             " D: " + render_spec_expr(law.d);
    case LawKind::Assign: case LawKind::FollowAssign: return k + " " + render_bindings(law.bindings);
    case LawKind::IfElse: return k + " G: " + render_prog_expr(*law.guard);
    case LawKind::Iterate:
      return k + " I: " + render_spec_expr(law.invariant) + " G: " + render_prog_expr(*law.guard) +
             " V: " + render_spec_expr(law.variant) + (law.mode == IterateMode::Flexible ? " mode: flexible" : "");
    case LawKind::Traverse:
      return k + " " + law.list + " " + law.index + " m: " + render_spec_expr(law.from) + " n: " +
             render_spec_expr(law.to) + " P: " + render_spec_expr(law.property);
    case LawKind::Expand:
      return k + " " + render_params({*law.local}) +
             (law.local_value ? " init: " + render_spec_expr(*law.local_value) : "");
    case LawKind::ProcCall: {
      std::string args;
      for (const auto& a : law.args) args += (args.empty() ? "" : ", ") + render_prog_expr(a);
      return k + " " + law.entry + "(" + args + ")";
    }
  }
  return k;
}

}  // namespace refinery
