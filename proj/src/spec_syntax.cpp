#include "refinery/spec_syntax.hpp"

#include "refinery/spec_analysis.hpp"

#include <cctype>
#include <optional>

namespace refinery {

const TypedParam* Env::find(const std::string& name) const {
  for (auto it = params.rbegin(); it != params.rend(); ++it)
    if (it->name == name) return &*it;
  return nullptr;
}

const Definition* Env::find_definition(const std::string& name) const {
  if (!definitions) return nullptr;
  auto it = definitions->find(name);
  return it == definitions->end() ? nullptr : &it->second;
}

Env Env::with(TypedParam p) const {
  Env e = *this;
  e.params.push_back(std::move(p));
  return e;
}

namespace {

std::string join_issues(const std::vector<TypeIssue>& issues) {
  std::string out = "type error";
  for (const auto& i : issues) out += "; " + i.message + " at '" + i.at + "'";
  return out;
}

}  // namespace

SpecTypeError::SpecTypeError(std::vector<TypeIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

namespace {

enum class Tok {
  End, Number, Ident, LParen, RParen, LBracket, RBracket, Comma, Colon, ColonEq, Dot,
  Plus, Minus, Star, Slash, Lt, Le, Eq, Gt, Ge, Ne, And, Or, Not, Implies, InitSuffix,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", line_, col_});
        return out;
      }
      int l = line_, c = col_;
      char ch = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(ch))) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
          advance();
          while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        }
        out.push_back({Tok::Number, std::string(text_.substr(start, pos_ - start)), l, c});
        continue;
      }
      if (ident_start(ch)) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
        out.push_back({Tok::Ident, std::string(text_.substr(start, pos_ - start)), l, c});
        continue;
      }
      Tok kind;
      std::size_t len = 1;
      auto starts = [&](std::string_view s) { return text_.substr(pos_, s.size()) == s; };
      if (starts("/\\")) { kind = Tok::And; len = 2; }
      else if (starts("\\/")) { kind = Tok::Or; len = 2; }
      else if (starts("->")) { kind = Tok::Implies; len = 2; }
      else if (starts("<>")) { kind = Tok::Ne; len = 2; }
      else if (starts("<=")) { kind = Tok::Le; len = 2; }
      else if (starts(">=")) { kind = Tok::Ge; len = 2; }
      else if (starts(":=")) { kind = Tok::ColonEq; len = 2; }
      else if (starts("∧")) { kind = Tok::And; len = 3; }
      else if (starts("∨")) { kind = Tok::Or; len = 3; }
      else if (starts("¬")) { kind = Tok::Not; len = 2; }
      else if (starts("→")) { kind = Tok::Implies; len = 3; }
      else if (starts("⟹")) { kind = Tok::Implies; len = 3; }
      else if (starts("≤")) { kind = Tok::Le; len = 3; }
      else if (starts("≥")) { kind = Tok::Ge; len = 3; }
      else if (starts("≠")) { kind = Tok::Ne; len = 3; }
      else {
        switch (ch) {
          case '(': kind = Tok::LParen; break;
          case ')': kind = Tok::RParen; break;
          case '[': kind = Tok::LBracket; break;
          case ']': kind = Tok::RBracket; break;
          case ',': kind = Tok::Comma; break;
          case ':': kind = Tok::Colon; break;
          case '.': kind = Tok::Dot; break;
          case '+': kind = Tok::Plus; break;
          case '-': kind = Tok::Minus; break;
          case '*': kind = Tok::Star; break;
          case '/': kind = Tok::Slash; break;
          case '<': kind = Tok::Lt; break;
          case '>': kind = Tok::Gt; break;
          case '=': kind = Tok::Eq; break;
          case '~': kind = Tok::Not; break;
          default:
            throw SpecSyntaxError(std::string("unexpected character '") + ch + "'", l, c);
        }
      }
      std::string tok_text(text_.substr(pos_, len));
      for (std::size_t i = 0; i < len; ++i) advance();
      out.push_back({kind, tok_text, l, c});
      if (kind == Tok::RParen && text_.substr(pos_, 2) == "_0" &&
          (pos_ + 2 >= text_.size() || !ident_char(text_[pos_ + 2]))) {
        out.push_back({Tok::InitSuffix, "_0", line_, col_});
        advance();
        advance();
      }
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, Env env) : tokens_(Lexer(text).run()), env_(std::move(env)) {}

  SpecExpr parse_whole() {
    SpecExpr e = expr();
    expect(Tok::End, "end of input");
    return e;
  }

  std::vector<TypedParam> params_whole() {
    auto ps = param_groups();
    expect(Tok::End, "end of input");
    return ps;
  }

  Definition definition() {
    Definition d;
    d.name = expect(Tok::Ident, "definition name").text;
    d.params = param_groups();
    expect(Tok::ColonEq, "':='");
    Env saved = env_;
    for (const auto& p : d.params) env_ = env_.with(p);
    d.body = expr();
    env_ = saved;
    if (peek().kind == Tok::Dot) next();
    expect(Tok::End, "end of definition");
    return d;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what + (peek().kind == Tok::End ? " before end of input" : " near '" + peek().text + "'"));
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SpecSyntaxError(msg, peek().line, peek().column);
  }

  bool at_quantifier() const {
    return peek().kind == Tok::Ident && (peek().text == "forall" || peek().text == "exists");
  }

  std::vector<TypedParam> param_groups() {
    std::vector<TypedParam> out;
    while (peek().kind == Tok::LParen) {
      next();
      std::vector<std::string> names;
      names.push_back(expect(Tok::Ident, "parameter name").text);
      while (peek().kind == Tok::Ident) names.push_back(next().text);
      expect(Tok::Colon, "':' in parameter");
      std::string type_text;
      while (peek().kind == Tok::Ident) type_text += next().text + " ";
      auto t = parse_type(type_text);
      if (!t) fail("unknown type '" + type_text + "'");
      expect(Tok::RParen, "')' after parameter type");
      for (auto& n : names) out.push_back({n, *t, role_from_name(n)});
    }
    if (out.empty()) fail("expected '(name:type)'");
    return out;
  }

  SpecExpr expr() {
    if (at_quantifier()) return quantifier();
    return implication();
  }

  SpecExpr quantifier() {
    ExprKind k = next().text == "forall" ? ExprKind::Forall : ExprKind::Exists;
    auto ps = param_groups();
    expect(Tok::Comma, "',' after quantifier parameters");
    Env saved = env_;
    for (const auto& p : ps) env_ = env_.with({p.name, p.type, ParamRole::Variant});
    SpecExpr body = expr();
    env_ = saved;
    for (auto it = ps.rbegin(); it != ps.rend(); ++it) body = SpecExpr::quantifier(k, it->name, it->type, body);
    return body;
  }

  SpecExpr operand(SpecExpr (Parser::*level)()) {
    if (at_quantifier()) return quantifier();
    return (this->*level)();
  }

  SpecExpr implication() {
    SpecExpr lhs = disjunction();
    if (accept(Tok::Implies)) return SpecExpr::binary(ExprKind::Implies, lhs, expr());
    return lhs;
  }

  SpecExpr disjunction() {
    SpecExpr lhs = conjunction();
    while (accept(Tok::Or)) lhs = SpecExpr::binary(ExprKind::Or, lhs, operand(&Parser::conjunction));
    return lhs;
  }

  SpecExpr conjunction() {
    SpecExpr lhs = negation();
    while (accept(Tok::And)) lhs = SpecExpr::binary(ExprKind::And, lhs, operand(&Parser::negation));
    return lhs;
  }

  SpecExpr negation() {
    if (accept(Tok::Not)) return SpecExpr::unary(ExprKind::Not, operand(&Parser::negation));
    return relation();
  }

  static std::optional<ExprKind> relop(Tok t) {
    switch (t) {
      case Tok::Lt: return ExprKind::Lt;
      case Tok::Le: return ExprKind::Le;
      case Tok::Eq: return ExprKind::Eq;
      case Tok::Gt: return ExprKind::Gt;
      case Tok::Ge: return ExprKind::Ge;
      case Tok::Ne: return ExprKind::Ne;
      default: return std::nullopt;
    }
  }

  SpecExpr relation() {
    SpecExpr first = additive();
    std::vector<SpecExpr> links;
    SpecExpr left = first;
    while (auto k = relop(peek().kind)) {
      next();
      SpecExpr right = additive();
      links.push_back(SpecExpr::binary(*k, left, right));
      left = right;
    }
    if (links.empty()) return first;
    SpecExpr acc = links.front();
    for (std::size_t i = 1; i < links.size(); ++i) acc = SpecExpr::binary(ExprKind::And, acc, links[i]);
    return acc;
  }

  SpecExpr additive() {
    SpecExpr lhs = multiplicative();
    while (true) {
      if (accept(Tok::Plus)) lhs = SpecExpr::binary(ExprKind::Add, lhs, multiplicative());
      else if (accept(Tok::Minus)) lhs = SpecExpr::binary(ExprKind::Sub, lhs, multiplicative());
      else return lhs;
    }
  }

  SpecExpr multiplicative() {
    SpecExpr lhs = unary();
    while (true) {
      if (accept(Tok::Star)) lhs = SpecExpr::binary(ExprKind::Mul, lhs, unary());
      else if (accept(Tok::Slash)) lhs = SpecExpr::binary(ExprKind::Div, lhs, unary());
      else return lhs;
    }
  }

  SpecExpr unary() {
    if (accept(Tok::Minus)) return SpecExpr::unary(ExprKind::Neg, unary());
    return postfix();
  }

  SpecExpr postfix() {
    SpecExpr e = primary();
    while (true) {
      if (accept(Tok::InitSuffix)) {
        e = SpecExpr::init(e);
      } else if (accept(Tok::LBracket)) {
        SpecExpr idx = expr();
        if (accept(Tok::Colon)) {
          SpecExpr hi = expr();
          expect(Tok::RBracket, "']'");
          e = SpecExpr::slice(e, idx, hi);
        } else if (accept(Tok::ColonEq)) {
          SpecExpr val = expr();
          expect(Tok::RBracket, "']'");
          e = SpecExpr::store(e, idx, val);
        } else {
          expect(Tok::RBracket, "']'");
          e = SpecExpr::select(e, idx);
        }
      } else {
        return e;
      }
    }
  }

  SpecExpr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        auto q = parse_rational(t.text);
        if (!q) fail("malformed number '" + t.text + "'");
        return SpecExpr::number(*q);
      }
      case Tok::LParen: {
        next();
        SpecExpr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return identifier();
      default:
        if (t.kind == Tok::End) fail("unexpected end of input");
        fail("unexpected '" + t.text + "'");
    }
  }

  SpecExpr identifier() {
    const Token t = next();
    if (t.text == "true") return SpecExpr::boolean(true);
    if (t.text == "false") return SpecExpr::boolean(false);
    if (t.text == "forall" || t.text == "exists") {
      --pos_;
      return quantifier();
    }
    if (peek().kind == Tok::LParen && (is_builtin(t.text) || env_.find_definition(t.text))) {
      next();
      std::vector<SpecExpr> args;
      if (!accept(Tok::RParen)) {
        args.push_back(expr());
        while (accept(Tok::Comma)) args.push_back(expr());
        expect(Tok::RParen, "')' after arguments");
      }
      return SpecExpr::apply(t.text, std::move(args));
    }
    if (const TypedParam* p = env_.find(t.text)) return SpecExpr::reference(*p);
    if (t.text.size() > 2 && t.text.ends_with("_0")) {
      std::string base = t.text.substr(0, t.text.size() - 2);
      if (const TypedParam* p = env_.find(base)) return SpecExpr::init(SpecExpr::reference(*p));
    }
    throw UnknownIdentifier(t.text, t.line, t.column);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Env env_;
};

// Rendering -----------------------------------------------------------------

int level(const SpecExpr& e) {
  switch (e.kind()) {
    case ExprKind::Forall: case ExprKind::Exists: return 1;
    case ExprKind::Implies: return 2;
    case ExprKind::Or: return 3;
    case ExprKind::And: return 4;
    case ExprKind::Not: return 5;
    case ExprKind::Lt: case ExprKind::Le: case ExprKind::Eq:
    case ExprKind::Gt: case ExprKind::Ge: case ExprKind::Ne: return 6;
    case ExprKind::Add: case ExprKind::Sub: return 7;
    case ExprKind::Mul: case ExprKind::Div: return 8;
    case ExprKind::Neg: return 9;
    default: return 10;
  }
}

const char* op_text(ExprKind k) {
  switch (k) {
    case ExprKind::Add: return "+";
    case ExprKind::Sub: return "-";
    case ExprKind::Mul: return "*";
    case ExprKind::Div: return "/";
    case ExprKind::Lt: return "<";
    case ExprKind::Le: return "<=";
    case ExprKind::Eq: return "=";
    case ExprKind::Gt: return ">";
    case ExprKind::Ge: return ">=";
    case ExprKind::Ne: return "<>";
    case ExprKind::And: return "/\\";
    case ExprKind::Or: return "\\/";
    case ExprKind::Implies: return "->";
    default: return "?";
  }
}

std::string render_number(const Rational& q) {
  if (q < 0) return "(" + render_number(Rational(-q)).insert(0, "-") + ")";
  if (auto d = format_decimal(q)) return *d;
  return "(" + format_rational(q) + ")";
}

std::string render_at(const SpecExpr& e, int min_level);

std::string render_bare(const SpecExpr& e) {
  switch (e.kind()) {
    case ExprKind::Num: return render_number(e.number_value());
    case ExprKind::Bool: return e.bool_value() ? "true" : "false";
    case ExprKind::Var: case ExprKind::Const: return e.name();
    case ExprKind::Init: {
      const SpecExpr& inner = e.arg(0);
      if (inner.is_reference()) return inner.name() + "_0";
      return "(" + render_at(inner, 0) + ")_0";
    }
    case ExprKind::Neg: {
      const SpecExpr& inner = e.arg(0);
      bool wrap = inner.kind() == ExprKind::Neg || (inner.kind() == ExprKind::Num && inner.number_value() < 0);
      return "-" + (wrap ? "(" + render_at(inner, 0) + ")" : render_at(inner, 9));
    }
    case ExprKind::Not: return "~" + render_at(e.arg(0), 5);
    case ExprKind::Add: case ExprKind::Sub:
      return render_at(e.arg(0), 7) + " " + op_text(e.kind()) + " " + render_at(e.arg(1), 8);
    case ExprKind::Mul: case ExprKind::Div:
      return render_at(e.arg(0), 8) + " " + op_text(e.kind()) + " " + render_at(e.arg(1), 9);
    case ExprKind::Lt: case ExprKind::Le: case ExprKind::Eq:
    case ExprKind::Gt: case ExprKind::Ge: case ExprKind::Ne:
      return render_at(e.arg(0), 7) + " " + op_text(e.kind()) + " " + render_at(e.arg(1), 7);
    case ExprKind::And:
      return render_at(e.arg(0), 4) + " /\\ " + render_at(e.arg(1), 5);
    case ExprKind::Or:
      return render_at(e.arg(0), 3) + " \\/ " + render_at(e.arg(1), 4);
    case ExprKind::Implies:
      return render_at(e.arg(0), 3) + " -> " + render_at(e.arg(1), 2);
    case ExprKind::Forall: case ExprKind::Exists:
      return std::string(e.kind() == ExprKind::Forall ? "forall" : "exists") + " (" + e.name() + ":" +
             to_string(e.bound_type()) + "), " + render_at(e.body(), is_quantifier(e.body().kind()) ? 1 : 0);
    case ExprKind::Select:
      return render_at(e.arg(0), 10) + "[" + render_at(e.arg(1), 0) + "]";
    case ExprKind::Slice:
      return render_at(e.arg(0), 10) + "[" + render_at(e.arg(1), 0) + ":" + render_at(e.arg(2), 0) + "]";
    case ExprKind::Store:
      return render_at(e.arg(0), 10) + "[" + render_at(e.arg(1), 0) + " := " + render_at(e.arg(2), 0) + "]";
    case ExprKind::Apply: {
      std::string out = e.name() + "(";
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) out += ", ";
        out += render_at(e.arg(i), 0);
      }
      return out + ")";
    }
  }
  return "?";
}

std::string render_at(const SpecExpr& e, int min_level) {
  int lv = level(e);
  // quantifiers are parenthesized anywhere but at the top
  bool wrap = lv < min_level || (lv == 1 && min_level > 0);
  std::string s = render_bare(e);
  return wrap ? "(" + s + ")" : s;
}

}  // namespace

SpecExpr parse_spec_expr(std::string_view text, const Env& env) {
  SpecExpr e = Parser(text, env).parse_whole();
  auto checked = type_check(e, env);
  if (!checked.ok()) throw SpecTypeError(checked.issues);
  return e;
}

SpecExpr parse_formula(std::string_view text, const Env& env) {
  SpecExpr e = parse_spec_expr(text, env);
  auto checked = type_check(e, env);
  if (!checked.type->is_bool())
    throw SpecTypeError({{"expected a formula, found " + to_string(*checked.type), render_spec_expr(e)}});
  return e;
}

std::vector<TypedParam> parse_params(std::string_view text) { return Parser(text, Env{}).params_whole(); }

Definition parse_definition(std::string_view text, const Env& env) {
  Definition d = Parser(text, env).definition();
  Env inner = env;
  for (const auto& p : d.params) inner = inner.with(p);
  auto checked = type_check(d.body, inner);
  if (!checked.ok()) throw SpecTypeError(checked.issues);
  d.result = *checked.type;
  return d;
}

std::string render_spec_expr(const SpecExpr& e) { return render_at(e, 0); }

std::string render_params(const std::vector<TypedParam>& params) {
  std::string out;
  for (const auto& p : params) {
    if (!out.empty()) out += " ";
    out += "(" + p.name + ":" + to_string(p.type) + ")";
  }
  return out;
}

}  // namespace refinery
