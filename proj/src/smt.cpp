#include "refinery/spec_analysis.hpp"
#include "refinery/verifier.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>

namespace refinery {

namespace {

// Encoding ----------------------------------------------------------------------

std::string sym(const std::string& name) { return "|" + name + "|"; }

std::string sort_of(const SpecType& t) {
  switch (t.kind()) {
    case SpecType::Kind::Bool: return "Bool";
    case SpecType::Kind::Nat: case SpecType::Kind::Int: return "Int";
    case SpecType::Kind::Float: return "Real";
    case SpecType::Kind::Array: return "(Array Int " + sort_of(t.element()) + ")";
    case SpecType::Kind::Char: break;
  }
  throw SmtUnsupported("char has no SMT sort");
}

struct Term {
  Term(std::string t, SpecType ty) : text(std::move(t)), type(std::move(ty)) {}
  std::string text;                 // scalar term, or the array itself
  SpecType type;
  std::string len;                  // arrays: length term
  std::string offset = "0";         // arrays: start index into `text`
};

std::string len_symbol(const std::string& key) { return sym("len(" + key + ")"); }

class Encoder {
 public:
  explicit Encoder(const Env& env) : env_(env) {}

  Term encode(const SpecExpr& e) {
    switch (e.kind()) {
      case ExprKind::Num: return number(e.number_value());
      case ExprKind::Bool: return {e.bool_value() ? "true" : "false", SpecType::boolean()};
      case ExprKind::Var: return reference(e.name());
      case ExprKind::Const: return reference(e.name(), true);
      case ExprKind::Init: {
        bool saved = in_init_;
        in_init_ = true;
        Term t = encode(e.arg(0));
        in_init_ = saved;
        return t;
      }
      case ExprKind::Neg: {
        Term a = numeric(e.arg(0));
        SpecType t = a.type.kind() == SpecType::Kind::Nat ? SpecType::integer() : a.type;
        return {"(- " + a.text + ")", t};
      }
      case ExprKind::Add: case ExprKind::Sub: case ExprKind::Mul: {
        Term a = numeric(e.arg(0));
        Term b = numeric(e.arg(1));
        bool real = is_real(a) || is_real(b);
        const char* op = e.kind() == ExprKind::Add ? "+" : e.kind() == ExprKind::Sub ? "-" : "*";
        return {std::string("(") + op + " " + coerce(a, real) + " " + coerce(b, real) + ")",
                real ? SpecType::real() : SpecType::integer()};
      }
      case ExprKind::Div: {
        Term a = numeric(e.arg(0));
        Term b = numeric(e.arg(1));
        return {"(/ " + coerce(a, true) + " " + coerce(b, true) + ")", SpecType::real()};
      }
      case ExprKind::Lt: case ExprKind::Le: case ExprKind::Gt: case ExprKind::Ge: {
        Term a = numeric(e.arg(0));
        Term b = numeric(e.arg(1));
        bool real = is_real(a) || is_real(b);
        const char* op = e.kind() == ExprKind::Lt ? "<" : e.kind() == ExprKind::Le ? "<=" : e.kind() == ExprKind::Gt ? ">" : ">=";
        return {std::string("(") + op + " " + coerce(a, real) + " " + coerce(b, real) + ")", SpecType::boolean()};
      }
      case ExprKind::Eq: case ExprKind::Ne: {
        std::string eq = equality(encode(e.arg(0)), encode(e.arg(1)));
        return {e.kind() == ExprKind::Eq ? eq : "(not " + eq + ")", SpecType::boolean()};
      }
      case ExprKind::And: case ExprKind::Or: case ExprKind::Implies: {
        const char* op = e.kind() == ExprKind::And ? "and" : e.kind() == ExprKind::Or ? "or" : "=>";
        return {std::string("(") + op + " " + encode(e.arg(0)).text + " " + encode(e.arg(1)).text + ")",
                SpecType::boolean()};
      }
      case ExprKind::Not: return {"(not " + encode(e.arg(0)).text + ")", SpecType::boolean()};
      case ExprKind::Forall: case ExprKind::Exists: return quantifier(e);
      case ExprKind::Select: {
        Term a = array(e.arg(0));
        Term i = index(e.arg(1));
        return {"(select " + a.text + " " + shifted(a, i.text) + ")", a.type.element()};
      }
      case ExprKind::Slice: {
        Term a = array(e.arg(0));
        Term lo = index(e.arg(1));
        Term hi = index(e.arg(2));
        Term out = a;
        out.offset = a.offset == "0" ? lo.text : "(+ " + a.offset + " " + lo.text + ")";
        out.len = "(- " + hi.text + " " + lo.text + ")";
        return out;
      }
      case ExprKind::Store: {
        Term a = array(e.arg(0));
        if (a.offset != "0") throw SmtUnsupported("update of a slice");
        Term i = index(e.arg(1));
        Term v = encode(e.arg(2));
        bool real = a.type.element().kind() == SpecType::Kind::Float;
        Term out = a;
        out.text = "(store " + a.text + " " + i.text + " " + (v.type.is_numeric() ? coerce(v, real) : v.text) + ")";
        return out;
      }
      case ExprKind::Apply:
        if (e.name() == "len") {
          Term a = array(e.arg(0));
          return {a.len, SpecType::nat()};
        }
        if (e.name() == "mod") {
          Term a = numeric(e.arg(0));
          Term b = numeric(e.arg(1));
          if (is_real(a) || is_real(b)) throw SmtUnsupported("mod of reals");
          // SMT-LIB mod is Euclidean: result in [0, |b|)
          return {"(mod " + a.text + " " + b.text + ")", SpecType::integer()};
        }
        throw SmtUnsupported("unexpanded function " + e.name());
    }
    throw SmtUnsupported("unhandled construct");
  }

  /// Declarations and side conditions for every free symbol used.
  std::string preamble() const {
    std::string out;
    for (const auto& [key, type] : declared_) {
      out += "(declare-const " + sym(key) + " " + sort_of(type) + ")\n";
      if (type.kind() == SpecType::Kind::Nat) out += "(assert (>= " + sym(key) + " 0))\n";
      if (type.is_array()) {
        out += "(declare-const " + len_symbol(key) + " Int)\n";
        out += "(assert (>= " + len_symbol(key) + " 0))\n";
        if (type.element().kind() == SpecType::Kind::Nat)
          out += "(assert (forall ((k Int)) (>= (select " + sym(key) + " k) 0)))\n";
      }
    }
    return out;
  }

  const std::map<std::string, SpecType>& declared() const { return declared_; }

 private:
  static bool is_real(const Term& t) { return t.type.kind() == SpecType::Kind::Float; }

  static std::string coerce(const Term& t, bool real) { return real && !is_real(t) ? "(to_real " + t.text + ")" : t.text; }

  static std::string shifted(const Term& a, const std::string& i) {
    return a.offset == "0" ? i : "(+ " + a.offset + " " + i + ")";
  }

  Term number(const Rational& q) {
    if (is_integer(q)) {
      std::string digits = mpz_class(abs(q.get_num())).get_str();
      return {q < 0 ? "(- " + digits + ")" : digits, q < 0 ? SpecType::integer() : SpecType::nat()};
    }
    std::string frac = "(/ " + mpz_class(abs(q.get_num())).get_str() + ".0 " + q.get_den().get_str() + ".0)";
    return {q < 0 ? "(- " + frac + ")" : frac, SpecType::real()};
  }

  Term reference(const std::string& name, bool constant = false) {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (it->first == name) return {sym(name), it->second};
    const TypedParam* p = env_.find(name);
    if (!p) throw SmtUnsupported("undeclared name " + name);
    std::string key = in_init_ && !constant ? name + "_0" : name;
    declared_.emplace(key, p->type);
    Term t{sym(key), p->type};
    if (p->type.is_array()) t.len = len_symbol(key);
    return t;
  }

  Term numeric(const SpecExpr& e) {
    Term t = encode(e);
    if (!t.type.is_numeric()) throw SmtUnsupported("non-numeric operand");
    return t;
  }

  Term index(const SpecExpr& e) {
    Term t = numeric(e);
    if (is_real(t)) throw SmtUnsupported("real-valued index");
    return t;
  }

  Term array(const SpecExpr& e) {
    Term t = encode(e);
    if (!t.type.is_array()) throw SmtUnsupported("expected an array");
    return t;
  }

  std::string equality(const Term& a, const Term& b) {
    if (a.type.is_array() || b.type.is_array()) {
      if (!(a.type.is_array() && b.type.is_array())) throw SmtUnsupported("array compared with scalar");
      std::string k = "|k!" + std::to_string(fresh_++) + "|";
      Term ea{"(select " + a.text + " " + shifted(a, k) + ")", a.type.element()};
      Term eb{"(select " + b.text + " " + shifted(b, k) + ")", b.type.element()};
      return "(and (= " + a.len + " " + b.len + ") (forall ((" + k + " Int)) (=> (and (<= 0 " + k + ") (< " + k + " " +
             a.len + ")) " + equality(ea, eb) + ")))";
    }
    if (a.type.is_numeric() && b.type.is_numeric()) {
      bool real = is_real(a) || is_real(b);
      return "(= " + coerce(a, real) + " " + coerce(b, real) + ")";
    }
    return "(= " + a.text + " " + b.text + ")";
  }

  Term quantifier(const SpecExpr& e) {
    const SpecType& t = e.bound_type();
    if (t.is_array() || t.kind() == SpecType::Kind::Char) throw SmtUnsupported("quantifier over " + to_string(t));
    bound_.emplace_back(e.name(), t);
    std::string body;
    try {
      body = encode(e.body()).text;
    } catch (...) {
      bound_.pop_back();
      throw;
    }
    bound_.pop_back();
    std::string v = sym(e.name());
    std::string decl = "((" + v + " " + sort_of(t) + "))";
    bool nat = t.kind() == SpecType::Kind::Nat;
    if (e.kind() == ExprKind::Forall)
      return {"(forall " + decl + " " + (nat ? "(=> (>= " + v + " 0) " + body + ")" : body) + ")", SpecType::boolean()};
    return {"(exists " + decl + " " + (nat ? "(and (>= " + v + " 0) " + body + ")" : body) + ")", SpecType::boolean()};
  }

  const Env& env_;
  std::vector<std::pair<std::string, SpecType>> bound_;
  std::map<std::string, SpecType> declared_;
  bool in_init_ = false;
  int fresh_ = 0;
};

struct Encoded {
  std::string script;
  std::map<std::string, SpecType> declared;
};

Encoded encode_obligation(const ProofObligation& ob) {
  Encoder enc(ob.env);
  SpecExpr hyp = expand_definitions(ob.hypothesis, ob.env);
  SpecExpr concl = expand_definitions(ob.conclusion, ob.env);
  std::vector<SpecExpr> guards;
  for (const auto& g : division_guards(hyp)) guards.push_back(SpecExpr::binary(ExprKind::Ne, g, SpecExpr::number(0)));
  for (const auto& g : division_guards(concl)) guards.push_back(SpecExpr::binary(ExprKind::Ne, g, SpecExpr::number(0)));
  std::string h = enc.encode(conj(hyp, conj(guards))).text;
  std::string c = enc.encode(concl).text;
  Encoded out;
  out.script = "(set-logic ALL)\n(set-option :produce-models true)\n";
  if (!ob.label.empty()) out.script += "; " + ob.label + "\n";
  out.script += enc.preamble();
  out.script += "(assert " + h + ")\n";
  out.script += "(assert (not " + c + "))\n";
  out.script += "(check-sat)\n(get-model)\n";
  out.declared = enc.declared();
  return out;
}

// S-expressions -------------------------------------------------------------------

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

class SexpReader {
 public:
  explicit SexpReader(const std::string& text) : s_(text) {}

  std::optional<Sexp> next() {
    skip();
    if (i_ >= s_.size()) return std::nullopt;
    return read();
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    Sexp x;
    if (i_ >= s_.size()) return x;
    if (s_[i_] == '(') {
      ++i_;
      x.is_list = true;
      while (true) {
        skip();
        if (i_ >= s_.size()) break;
        if (s_[i_] == ')') {
          ++i_;
          break;
        }
        x.list.push_back(read());
      }
      return x;
    }
    if (s_[i_] == '|') {
      auto end = s_.find('|', i_ + 1);
      if (end == std::string::npos) end = s_.size() - 1;
      x.atom = s_.substr(i_ + 1, end - i_ - 1);
      i_ = end + 1;
      return x;
    }
    if (s_[i_] == '"') {
      std::size_t j = i_ + 1;
      while (j < s_.size() && !(s_[j] == '"' && (j + 1 >= s_.size() || s_[j + 1] != '"'))) j += s_[j] == '"' ? 2 : 1;
      x.atom = s_.substr(i_, j - i_ + 1);
      i_ = j + 1;
      return x;
    }
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' && s_[j] != ')') ++j;
    x.atom = s_.substr(i_, j - i_);
    i_ = j;
    return x;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

std::optional<Rational> decimal_atom(std::string a) {
  bool approx = !a.empty() && a.back() == '?';
  if (approx) a.pop_back();
  return parse_rational(a);
}

using Funcs = std::map<std::string, const Sexp*>;

std::optional<Value> scalar_value(const Sexp& x, const std::map<std::string, Value>& locals, const Funcs& funcs);

std::optional<Value> apply_fn(const Sexp& fn, const Value& arg, const Funcs& funcs) {
  // fn: (define-fun f ((x Int)) T body) or (lambda ((x Int)) body)
  const Sexp* params = nullptr;
  const Sexp* body = nullptr;
  if (fn.is_list && fn.list.size() == 5 && fn.list[0].atom == "define-fun") {
    params = &fn.list[2];
    body = &fn.list[4];
  } else if (fn.is_list && fn.list.size() == 3 && fn.list[0].atom == "lambda") {
    params = &fn.list[1];
    body = &fn.list[2];
  }
  if (!params || params->list.size() != 1 || !params->list[0].is_list || params->list[0].list.empty()) return std::nullopt;
  std::map<std::string, Value> locals{{params->list[0].list[0].atom, arg}};
  return scalar_value(*body, locals, funcs);
}

std::optional<Value> select_value(const Sexp& arr, const Value& idx, const Funcs& funcs) {
  if (arr.is_list && arr.list.size() == 2 && arr.list[0].is_list && arr.list[0].list.size() == 3 &&
      arr.list[0].list[0].atom == "as" && arr.list[0].list[1].atom == "const")
    return scalar_value(arr.list[1], {}, funcs);
  if (arr.is_list && arr.list.size() == 4 && arr.list[0].atom == "store") {
    auto i = scalar_value(arr.list[2], {}, funcs);
    if (!i) return std::nullopt;
    if (*i == idx) return scalar_value(arr.list[3], {}, funcs);
    return select_value(arr.list[1], idx, funcs);
  }
  if (arr.is_list && arr.list.size() == 3 && arr.list[0].is_list && arr.list[0].list.size() == 2 &&
      arr.list[0].list[0].atom == "_" && arr.list[0].list[1].atom == "as-array") {
    auto it = funcs.find(arr.list[1].atom);
    if (it == funcs.end()) return std::nullopt;
    return apply_fn(*it->second, idx, funcs);
  }
  if (arr.is_list && arr.list.size() == 3 && arr.list[0].atom == "lambda") return apply_fn(arr, idx, funcs);
  return std::nullopt;
}

std::optional<Value> scalar_value(const Sexp& x, const std::map<std::string, Value>& locals, const Funcs& funcs) {
  if (!x.is_list) {
    if (x.atom == "true") return Value(true);
    if (x.atom == "false") return Value(false);
    if (auto it = locals.find(x.atom); it != locals.end()) return it->second;
    if (auto q = decimal_atom(x.atom)) return Value(*q);
    return std::nullopt;
  }
  if (x.list.empty()) return std::nullopt;
  const std::string& head = x.list[0].atom;
  auto arg = [&](std::size_t i) { return scalar_value(x.list[i], locals, funcs); };
  auto num = [&](std::size_t i) -> std::optional<Rational> {
    auto v = arg(i);
    if (!v || !v->is_rational()) return std::nullopt;
    return v->as_rational();
  };
  if (head == "-" && x.list.size() == 2) {
    auto a = num(1);
    if (!a) return std::nullopt;
    return Value(Rational(-*a));
  }
  if ((head == "/" || head == "-" || head == "+" || head == "*") && x.list.size() == 3) {
    auto a = num(1);
    auto b = num(2);
    if (!a || !b) return std::nullopt;
    if (head == "/") {
      if (*b == 0) return std::nullopt;
      return Value(Rational(*a / *b));
    }
    if (head == "-") return Value(Rational(*a - *b));
    if (head == "+") return Value(Rational(*a + *b));
    return Value(Rational(*a * *b));
  }
  if (head == "to_real" && x.list.size() == 2) return arg(1);
  if (head == "ite" && x.list.size() == 4) {
    auto c = arg(1);
    if (!c || !c->is_bool()) return std::nullopt;
    return arg(c->as_bool() ? 2 : 3);
  }
  if (head == "=" && x.list.size() == 3) {
    auto a = arg(1);
    auto b = arg(2);
    if (!a || !b) return std::nullopt;
    return Value(*a == *b);
  }
  if ((head == "and" || head == "or") && x.list.size() >= 2) {
    bool is_and = head == "and";
    for (std::size_t i = 1; i < x.list.size(); ++i) {
      auto v = arg(i);
      if (!v || !v->is_bool()) return std::nullopt;
      if (v->as_bool() != is_and) return Value(!is_and);
    }
    return Value(is_and);
  }
  if (head == "not" && x.list.size() == 2) {
    auto v = arg(1);
    if (!v || !v->is_bool()) return std::nullopt;
    return Value(!v->as_bool());
  }
  if ((head == "<" || head == "<=" || head == ">" || head == ">=") && x.list.size() == 3) {
    auto a = num(1);
    auto b = num(2);
    if (!a || !b) return std::nullopt;
    if (head == "<") return Value(*a < *b);
    if (head == "<=") return Value(*a <= *b);
    if (head == ">") return Value(*a > *b);
    return Value(*a >= *b);
  }
  if (head == "root-obj") return std::nullopt;
  return std::nullopt;
}

struct Model {
  std::map<std::string, const Sexp*> constants;  // zero-arity define-fun bodies
  Funcs funcs;
};

void collect_model(const Sexp& x, Model& m) {
  if (!x.is_list) return;
  if (x.list.size() == 5 && x.list[0].atom == "define-fun") {
    const std::string& name = x.list[1].atom;
    if (x.list[2].is_list && x.list[2].list.empty()) m.constants[name] = &x.list[4];
    m.funcs[name] = &x;
    return;
  }
  for (const auto& c : x.list) collect_model(c, m);
}

std::optional<Valuation> decode_model(const std::vector<const Sexp*>& models, const std::map<std::string, SpecType>& declared) {
  std::vector<Model> ms(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) collect_model(*models[i], ms[i]);
  Valuation out;
  auto lookup = [&](const std::string& name, const std::map<std::string, Value>& locals) -> std::optional<Value> {
    for (const auto& m : ms) {
      auto it = m.constants.find(name);
      if (it == m.constants.end()) continue;
      if (auto v = scalar_value(*it->second, locals, m.funcs)) return v;
    }
    return std::nullopt;
  };
  for (const auto& [key, type] : declared) {
    if (type.is_array()) {
      Rational len = 0;
      if (auto l = lookup("len(" + key + ")", {})) len = l->as_rational();
      if (len < 0 || len > 64) return std::nullopt;
      ArrayValue arr;
      const Sexp* body = nullptr;
      const Funcs* funcs = nullptr;
      for (const auto& m : ms) {
        auto it = m.constants.find(key);
        if (it != m.constants.end()) {
          body = it->second;
          funcs = &m.funcs;
          break;
        }
      }
      for (long k = 0; k < len.get_num().get_si(); ++k) {
        std::optional<Value> v;
        if (body) v = select_value(*body, Value(Rational(k)), *funcs);
        arr.push_back(v ? *v : (type.element().is_bool() ? Value(false) : Value(Rational(0))));
      }
      out[key] = arr;
      continue;
    }
    auto v = lookup(key, {});
    if (!v) {
      bool mentioned = false;
      for (const auto& m : ms) mentioned = mentioned || m.constants.count(key);
      if (mentioned) return std::nullopt;  // present but not decodable
      v = type.is_bool() ? Value(false) : Value(Rational(0));  // unconstrained
    }
    out[key] = *v;
  }
  return out;
}

// Subprocess -----------------------------------------------------------------------

struct ProcessResult {
  bool started = false;
  bool timed_out = false;
  int exit_code = -1;
  std::string output;
};

ProcessResult run_process(const std::string& command, double timeout_s) {
  ProcessResult r;
  int fds[2];
  if (pipe(fds) != 0) return r;
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    return r;
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  r.started = true;
  close(fds[1]);
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  char buf[4096];
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      r.timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int ready = poll(&p, 1, static_cast<int>(std::min<long long>(left, 200)));
    if (ready > 0) {
      ssize_t n = read(fds[0], buf, sizeof buf);
      if (n <= 0) break;
      r.output.append(buf, static_cast<std::size_t>(n));
    }
  }
  close(fds[0]);
  if (r.timed_out) {
    kill(-pid, SIGKILL);
    kill(pid, SIGKILL);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    char tmpl[] = "/tmp/refinery-XXXXXX.smt2";
    int fd = mkstemps(tmpl, 5);
    if (fd < 0) return;
    path = tmpl;
    std::size_t off = 0;
    while (off < content.size()) {
      ssize_t n = write(fd, content.data() + off, content.size() - off);
      if (n <= 0) break;
      off += static_cast<std::size_t>(n);
    }
    close(fd);
  }
  ~TempFile() {
    if (!path.empty()) unlink(path.c_str());
  }
};

}  // namespace

std::string emit_smtlib(const ProofObligation& ob) { return encode_obligation(ob).script; }

std::string smt_command(const SmtConfig& cfg) {
  if (!cfg.command.empty()) return cfg.command;
  if (const char* env = std::getenv("REFINERY_SMT_CMD"); env && *env) return env;
  return "z3";
}

bool smt_available(const SmtConfig& cfg) {
  TempFile f("(check-sat)\n");
  if (f.path.empty()) return false;
  auto r = run_process(smt_command(cfg) + " " + shell_quote(f.path), std::min(cfg.timeout_s, 5.0));
  return r.started && !r.timed_out && r.output.rfind("sat", 0) == 0;
}

VcResult check_smt(const ProofObligation& ob, const SmtConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  VcResult r;
  r.backend = "smt";
  auto finish = [&](VcResult res) {
    res.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  };
  Encoded enc;
  try {
    enc = encode_obligation(ob);
  } catch (const SmtUnsupported& err) {
    r.status = VcStatus::Unknown;
    r.reason = std::string("unsupported by the SMT encoding: ") + err.what();
    return finish(r);
  }
  // A second, decimal-printed model recovers algebraic values approximately.
  std::string script = enc.script + "(set-option :pp.decimal true)\n(get-model)\n";
  TempFile f(script);
  if (f.path.empty()) {
    r.status = VcStatus::Unknown;
    r.reason = "cannot write solver input";
    return finish(r);
  }
  auto proc = run_process(smt_command(cfg) + " " + shell_quote(f.path), cfg.timeout_s);
  if (!proc.started || proc.exit_code == 127 || proc.exit_code == 126) {
    r.status = VcStatus::Unknown;
    r.reason = "solver could not be started: " + smt_command(cfg);
    return finish(r);
  }
  if (proc.timed_out) {
    r.status = VcStatus::Unknown;
    r.reason = "solver timeout";
    return finish(r);
  }
  SexpReader reader(proc.output);
  std::vector<Sexp> items;
  while (auto x = reader.next()) items.push_back(std::move(*x));
  if (items.empty() || items[0].is_list) {
    r.status = VcStatus::Unknown;
    r.reason = "unexpected solver output";
    return finish(r);
  }
  const std::string& verdict = items[0].atom;
  if (verdict == "unsat") {
    r.status = VcStatus::Proved;
    return finish(r);
  }
  if (verdict != "sat") {
    r.status = VcStatus::Unknown;
    r.reason = "solver answered " + verdict;
    return finish(r);
  }
  std::vector<const Sexp*> models;
  for (std::size_t i = 1; i < items.size(); ++i)
    if (items[i].is_list && !(items[i].list.size() > 0 && items[i].list[0].atom == "error")) models.push_back(&items[i]);
  auto model = decode_model(models, enc.declared);
  r.status = VcStatus::Refuted;
  if (model) r.counterexample = *model;
  else r.reason = "model could not be decoded";
  return finish(r);
}

namespace {

// Candidate values around a model value, used when the model itself does not
// re-validate (e.g. irrational solutions rounded to decimals).
std::vector<Value> neighbourhood(const Value& v, const SpecType& t, const DomainSpec& d) {
  std::vector<Value> out;
  auto add = [&](const Value& x) {
    if (!inhabits(x, t)) return;
    for (const auto& y : out)
      if (y == x) return;
    out.push_back(x);
  };
  if (v.is_rational()) {
    const Rational& q = v.as_rational();
    add(Value(q));
    double dq = to_double(q);
    for (long den : {1L, 2L, 4L, 8L, 10L, 16L, 100L, 1000L}) add(Value(approximate(dq, den)));
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    for (long k = -1; k <= 2; ++k) add(Value(Rational(fl + k)));
  } else {
    add(v);
  }
  for (const auto& c : d.carrier(t)) add(c);
  return out;
}

}  // namespace

VcResult check(const ProofObligation& ob, const VerifierConfig& cfg) {
  std::vector<std::string> notes;
  for (const auto& backend : cfg.order) {
    VcResult r;
    if (backend == "smt") {
      r = check_smt(ob, cfg.smt);
      if (r.status == VcStatus::Refuted) {
        if (r.counterexample && validates(ob, *r.counterexample, cfg.domains)) return r;
        // model sanity gate failed: search near the model
        DomainSpec near = cfg.domains;
        if (r.counterexample) {
          for (const auto& [key, v] : *r.counterexample) {
            std::string base = key;
            if (!ob.env.find(base) && key.size() > 2 && key.compare(key.size() - 2, 2, "_0") == 0)
              base = key.substr(0, key.size() - 2);
            const TypedParam* p = ob.env.find(base);
            if (!p || p->type.is_array()) continue;
            auto vals = neighbourhood(v, p->type, cfg.domains);
            auto& slot = near.overrides[base];
            for (const auto& x : vals)
              if (std::find(slot.begin(), slot.end(), x) == slot.end()) slot.push_back(x);
          }
        }
        VcResult b = check_bounded(ob, near);
        if (b.status == VcStatus::Refuted) {
          b.backend = "smt+bounded";
          b.elapsed_ms += r.elapsed_ms;
          return b;
        }
        notes.push_back("smt: sat, but no model re-validated");
        continue;
      }
    } else if (backend == "bounded") {
      r = check_bounded(ob, cfg.domains);
    } else {
      notes.push_back("unknown backend " + backend);
      continue;
    }
    if (r.status == VcStatus::Proved) return r;
    if (r.status == VcStatus::Refuted) {
      if (r.counterexample && validates(ob, *r.counterexample, cfg.domains)) return r;
      notes.push_back(backend + ": counterexample failed re-validation");
      continue;
    }
    notes.push_back(backend + ": " + r.reason);
  }
  VcResult out;
  out.status = VcStatus::Unknown;
  for (const auto& n : notes) out.reason += (out.reason.empty() ? "" : "; ") + n;
  if (out.reason.empty()) out.reason = "no backend configured";
  return out;
}

}  // namespace refinery
