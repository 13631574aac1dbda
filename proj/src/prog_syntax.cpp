#include "refinery/prog_lang.hpp"

#include <cctype>

namespace refinery {

// Construction ----------------------------------------------------------------

ProgExpr ProgExpr::make(Node n) { return ProgExpr(std::make_shared<const Node>(std::move(n))); }

ProgExpr ProgExpr::number(Rational q) {
  Node n;
  n.op = ProgOp::Num;
  n.number = std::move(q);
  return make(std::move(n));
}

ProgExpr ProgExpr::name(std::string id) {
  Node n;
  n.op = ProgOp::Name;
  n.name = std::move(id);
  return make(std::move(n));
}

ProgExpr ProgExpr::boolean(bool b) {
  Node n;
  n.op = ProgOp::Bool;
  n.flag = b;
  return make(std::move(n));
}

ProgExpr ProgExpr::unary(ProgOp op, ProgExpr e) {
  Node n;
  n.op = op;
  n.args = {std::move(e)};
  return make(std::move(n));
}

ProgExpr ProgExpr::binary(ProgOp op, ProgExpr a, ProgExpr b) {
  Node n;
  n.op = op;
  n.args = {std::move(a), std::move(b)};
  return make(std::move(n));
}

ProgExpr ProgExpr::index(ProgExpr v, ProgExpr i) { return binary(ProgOp::Index, std::move(v), std::move(i)); }

ProgExpr ProgExpr::slice(ProgExpr v, ProgExpr lo, ProgExpr hi) {
  Node n;
  n.op = ProgOp::Slice;
  n.args = {std::move(v), std::move(lo), std::move(hi)};
  return make(std::move(n));
}

bool operator==(const ProgExpr& a, const ProgExpr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op || x.args.size() != y.args.size()) return false;
  if (x.op == ProgOp::Num && x.number != y.number) return false;
  if (x.op == ProgOp::Bool && x.flag != y.flag) return false;
  if (x.op == ProgOp::Name && x.name != y.name) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (!(x.args[i] == y.args[i])) return false;
  return true;
}

Statement Statement::pass() { return Statement{}; }

Statement Statement::assign(std::string target, ProgExpr value) {
  Statement s;
  s.kind = Kind::Assign;
  s.name = std::move(target);
  s.expr = std::move(value);
  return s;
}

Statement Statement::assign_index(std::string target, ProgExpr index, ProgExpr value) {
  Statement s = assign(std::move(target), std::move(value));
  s.index = std::move(index);
  return s;
}

Statement Statement::seq(std::vector<Statement> items) {
  Statement s;
  s.kind = Kind::Seq;
  s.body = std::move(items);
  return s;
}

Statement Statement::while_loop(ProgExpr cond, Statement body) {
  Statement s;
  s.kind = Kind::While;
  s.expr = std::move(cond);
  s.body = {std::move(body)};
  return s;
}

Statement Statement::if_else(ProgExpr cond, Statement then_branch, Statement else_branch) {
  Statement s;
  s.kind = Kind::If;
  s.expr = std::move(cond);
  s.body = {std::move(then_branch)};
  s.orelse = {std::move(else_branch)};
  return s;
}

Statement Statement::assertion(ProgExpr cond) {
  Statement s;
  s.kind = Kind::Assert;
  s.expr = std::move(cond);
  return s;
}

Statement Statement::def(std::string name, std::vector<ProcParam> params, Statement body) {
  Statement s;
  s.kind = Kind::Def;
  s.name = std::move(name);
  s.params = std::move(params);
  s.body = {std::move(body)};
  return s;
}

Statement Statement::call(std::string name, std::vector<ProgExpr> args) {
  Statement s;
  s.kind = Kind::Call;
  s.name = std::move(name);
  s.args = std::move(args);
  return s;
}

Statement Statement::placeholder(int child) {
  Statement s;
  s.kind = Kind::Hole;
  s.hole = child;
  return s;
}

bool operator==(const Statement& a, const Statement& b) {
  if (a.kind != b.kind || a.name != b.name || a.hole != b.hole) return false;
  if (a.index.has_value() != b.index.has_value()) return false;
  if (a.index && !(*a.index == *b.index)) return false;
  if (!(a.expr == b.expr)) return false;
  return a.body == b.body && a.orelse == b.orelse && a.params == b.params && a.args == b.args;
}

Statement normalize(const Statement& s) {
  auto block = [](const std::vector<Statement>& items) {
    std::vector<Statement> out;
    for (const auto& item : items) {
      Statement n = normalize(item);
      if (n.kind == Statement::Kind::Seq) {
        for (auto& inner : n.body) out.push_back(std::move(inner));
      } else if (n.kind != Statement::Kind::Pass) {
        out.push_back(std::move(n));
      }
    }
    return out;
  };
  Statement r = s;
  switch (s.kind) {
    case Statement::Kind::Seq: {
      auto items = block(s.body);
      if (items.empty()) return Statement::pass();
      if (items.size() == 1) return items.front();
      r.body = std::move(items);
      return r;
    }
    case Statement::Kind::While: case Statement::Kind::Def:
      r.body = {normalize(s.body.front())};
      return r;
    case Statement::Kind::If:
      r.body = {normalize(s.body.front())};
      r.orelse = {normalize(s.orelse.front())};
      return r;
    default:
      return r;
  }
}

// Lexing ----------------------------------------------------------------------

namespace {

enum class Tok { Number, Ident, Op, End };

struct Token {
  Tok kind;
  std::string text;
  int column;
};

std::vector<Token> lex_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    int col = static_cast<int>(i) + 1;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < line.size() && std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      if (j < line.size() && line[j] == '.') {
        ++j;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    static const char* two[] = {"==", "!=", "<=", ">="};
    bool matched = false;
    for (const char* t : two) {
      if (line.substr(i, 2) == t) {
        out.push_back({Tok::Op, t, col});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("+-*/<>()[]:,=").find(c) != std::string_view::npos) {
      out.push_back({Tok::Op, std::string(1, c), col});
      ++i;
      continue;
    }
    throw ProgSyntaxError(std::string("unexpected character '") + c + "'", line_no, col);
  }
  out.push_back({Tok::End, "", static_cast<int>(line.size()) + 1});
  return out;
}

class ExprParser {
 public:
  ExprParser(const std::vector<Token>& toks, std::size_t begin, std::size_t end, int line)
      : toks_(toks), pos_(begin), end_(end), line_(line) {}

  ProgExpr parse_all() {
    ProgExpr e = disjunction();
    if (pos_ != end_) fail("unexpected '" + peek().text + "'");
    return e;
  }

  ProgExpr disjunction() {
    ProgExpr e = conjunction();
    while (is_word("or")) {
      ++pos_;
      e = ProgExpr::binary(ProgOp::Or, e, conjunction());
    }
    return e;
  }

 private:
  const Token& peek() const {
    static const Token end{Tok::End, "", 0};
    return pos_ < end_ ? toks_[pos_] : (end_ < toks_.size() ? toks_[end_] : end);
  }
  bool is_op(const char* t) const { return pos_ < end_ && toks_[pos_].kind == Tok::Op && toks_[pos_].text == t; }
  bool is_word(const char* w) const { return pos_ < end_ && toks_[pos_].kind == Tok::Ident && toks_[pos_].text == w; }
  [[noreturn]] void fail(const std::string& msg) const { throw ProgSyntaxError(msg, line_, peek().column); }
  void expect(const char* t) {
    if (!is_op(t)) fail(std::string("expected '") + t + "'");
    ++pos_;
  }

  ProgExpr conjunction() {
    ProgExpr e = negation();
    while (is_word("and")) {
      ++pos_;
      e = ProgExpr::binary(ProgOp::And, e, negation());
    }
    return e;
  }

  ProgExpr negation() {
    if (is_word("not")) {
      ++pos_;
      return ProgExpr::unary(ProgOp::Not, negation());
    }
    return comparison();
  }

  std::optional<ProgOp> comparison_op() const {
    if (pos_ >= end_ || toks_[pos_].kind != Tok::Op) return std::nullopt;
    const std::string& t = toks_[pos_].text;
    if (t == "==") return ProgOp::Eq;
    if (t == "!=") return ProgOp::Ne;
    if (t == "<") return ProgOp::Lt;
    if (t == "<=") return ProgOp::Le;
    if (t == ">") return ProgOp::Gt;
    if (t == ">=") return ProgOp::Ge;
    return std::nullopt;
  }

  ProgExpr comparison() {
    ProgExpr left = additive();
    std::optional<ProgExpr> acc;
    while (auto op = comparison_op()) {
      ++pos_;
      ProgExpr right = additive();
      ProgExpr rel = ProgExpr::binary(*op, left, right);
      acc = acc ? ProgExpr::binary(ProgOp::And, *acc, rel) : rel;
      left = right;
    }
    return acc ? *acc : left;
  }

  ProgExpr additive() {
    ProgExpr e = multiplicative();
    while (is_op("+") || is_op("-")) {
      ProgOp op = is_op("+") ? ProgOp::Add : ProgOp::Sub;
      ++pos_;
      e = ProgExpr::binary(op, e, multiplicative());
    }
    return e;
  }

  ProgExpr multiplicative() {
    ProgExpr e = unary();
    while (is_op("*") || is_op("/")) {
      ProgOp op = is_op("*") ? ProgOp::Mul : ProgOp::Div;
      ++pos_;
      e = ProgExpr::binary(op, e, unary());
    }
    return e;
  }

  ProgExpr unary() {
    if (is_op("-")) {
      ++pos_;
      return ProgExpr::unary(ProgOp::Neg, unary());
    }
    return postfix();
  }

  ProgExpr postfix() {
    ProgExpr e = atom();
    while (is_op("[")) {
      ++pos_;
      ProgExpr lo = disjunction();
      if (is_op(":")) {
        ++pos_;
        ProgExpr hi = disjunction();
        expect("]");
        e = ProgExpr::slice(e, lo, hi);
      } else {
        expect("]");
        e = ProgExpr::index(e, lo);
      }
    }
    return e;
  }

  ProgExpr atom() {
    const Token& t = peek();
    if (pos_ >= end_) fail("expected an expression");
    if (t.kind == Tok::Number) {
      ++pos_;
      auto q = parse_rational(t.text);
      if (!q) fail("bad number '" + t.text + "'");
      return ProgExpr::number(*q);
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "True") {
        ++pos_;
        return ProgExpr::boolean(true);
      }
      if (t.text == "false" || t.text == "False") {
        ++pos_;
        return ProgExpr::boolean(false);
      }
      if (t.text == "and" || t.text == "or" || t.text == "not") fail("unexpected '" + t.text + "'");
      ++pos_;
      return ProgExpr::name(t.text);
    }
    if (is_op("(")) {
      ++pos_;
      ProgExpr e = disjunction();
      expect(")");
      return e;
    }
    fail("unexpected '" + t.text + "'");
  }

  const std::vector<Token>& toks_;
  std::size_t pos_, end_;
  int line_;
};

// Statements ------------------------------------------------------------------

struct Line {
  int number;
  int indent;
  std::string text;
};

bool is_keyword(const std::string& w) {
  return w == "and" || w == "or" || w == "not" || w == "true" || w == "false" || w == "pass" || w == "while" ||
         w == "if" || w == "else" || w == "assert" || w == "def";
}

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++number;
    std::string line(raw);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == '\r' || std::isspace(static_cast<unsigned char>(line.back())))) line.pop_back();
    int indent = 0;
    std::size_t i = 0;
    for (; i < line.size() && (line[i] == ' ' || line[i] == '\t'); ++i) indent += line[i] == '\t' ? 4 : 1;
    if (i < line.size()) {
      // `;` separates statements sharing the indentation of the line
      std::string rest = line.substr(i);
      int depth = 0;
      std::size_t piece = 0;
      for (std::size_t k = 0; k <= rest.size(); ++k) {
        if (k < rest.size()) {
          char c = rest[k];
          if (c == '(' || c == '[') ++depth;
          if (c == ')' || c == ']') --depth;
          if (c != ';' || depth != 0) continue;
        }
        std::string part = rest.substr(piece, k - piece);
        std::size_t a = part.find_first_not_of(" \t");
        if (a != std::string::npos) {
          std::size_t b = part.find_last_not_of(" \t");
          out.push_back({number, indent, part.substr(a, b - a + 1)});
        }
        piece = k + 1;
      }
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

class ProgramParser {
 public:
  explicit ProgramParser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  Statement program() {
    if (lines_.empty()) return Statement::seq({});
    int indent = lines_.front().indent;
    Statement s = block(indent);
    if (pos_ < lines_.size()) fail("unexpected indentation", lines_[pos_]);
    return s;
  }

 private:
  [[noreturn]] static void fail(const std::string& msg, const Line& l, int column = 1) {
    throw ProgSyntaxError(msg, l.number, l.indent + column);
  }

  Statement block(int indent) {
    std::vector<Statement> items;
    while (pos_ < lines_.size() && lines_[pos_].indent == indent) {
      if (lines_[pos_].text == "else:") break;
      items.push_back(statement(indent));
    }
    if (pos_ < lines_.size() && lines_[pos_].indent > indent) fail("unexpected indentation", lines_[pos_]);
    return Statement::seq(std::move(items));
  }

  Statement child_block(const Line& header) {
    if (pos_ >= lines_.size() || lines_[pos_].indent <= header.indent) fail("expected an indented block", header);
    return block(lines_[pos_].indent);
  }

  static ProgExpr expr(const std::vector<Token>& toks, std::size_t b, std::size_t e, const Line& l) {
    try {
      return ExprParser(toks, b, e, l.number).parse_all();
    } catch (const ProgSyntaxError& err) {
      throw ProgSyntaxError(std::string(err.what()).substr(std::string(err.what()).find(": ") + 2), l.number,
                            l.indent + err.column());
    }
  }

  // Header `kw <expr>:` -> expression tokens [1, size-2).
  static ProgExpr header_expr(const std::vector<Token>& toks, const Line& l) {
    std::size_t end = toks.size() - 1;  // End token
    if (end < 2 || toks[end - 1].text != ":") fail("expected ':' at end of line", l, toks[end].column);
    return expr(toks, 1, end - 1, l);
  }

  Statement statement(int indent) {
    const Line line = lines_[pos_++];
    auto toks = lex_line(line.text, line.number);
    const Token& head = toks.front();
    Statement s;
    if (line.text.rfind("<child ", 0) == 0 && line.text.back() == '>') {
      s = Statement::placeholder(std::stoi(line.text.substr(7)));
    } else if (head.kind == Tok::Ident && head.text == "pass" && toks.size() == 2) {
      s = Statement::pass();
    } else if (head.kind == Tok::Ident && head.text == "while") {
      ProgExpr cond = header_expr(toks, line);
      s = Statement::while_loop(cond, child_block(line));
    } else if (head.kind == Tok::Ident && head.text == "if") {
      ProgExpr cond = header_expr(toks, line);
      Statement then_branch = child_block(line);
      Statement else_branch = Statement::pass();
      if (pos_ < lines_.size() && lines_[pos_].indent == indent && lines_[pos_].text == "else:") {
        Line else_line = lines_[pos_++];
        else_branch = child_block(else_line);
      }
      s = Statement::if_else(cond, then_branch, else_branch);
    } else if (head.kind == Tok::Ident && head.text == "assert") {
      s = Statement::assertion(expr(toks, 1, toks.size() - 1, line));
    } else if (head.kind == Tok::Ident && head.text == "def") {
      s = definition(toks, line);
    } else {
      s = simple(toks, line);
    }
    s.line = line.number;
    return s;
  }

  Statement definition(const std::vector<Token>& toks, const Line& line) {
    std::size_t i = 1;
    if (toks[i].kind != Tok::Ident || is_keyword(toks[i].text)) fail("expected a procedure name", line, toks[i].column);
    std::string name = toks[i++].text;
    std::vector<ProcParam> params;
    auto at = [&](const char* t) { return toks[i].kind == Tok::Op && toks[i].text == t; };
    auto param = [&]() {
      if (toks[i].kind != Tok::Ident) fail("expected a parameter name", line, toks[i].column);
      ProcParam p{toks[i++].text, std::nullopt};
      if (at(":")) {
        ++i;
        std::string ty;
        while (toks[i].kind == Tok::Ident) ty += (ty.empty() ? "" : " ") + toks[i++].text;
        auto parsed = parse_type(ty);
        if (!parsed) fail("unknown type '" + ty + "'", line, toks[i].column);
        p.type = *parsed;
      }
      params.push_back(std::move(p));
    };
    if (!at("(")) fail("expected '('", line, toks[i].column);
    // both `def f(a:T, b:T):` and `def f(a:T)(b:T):`
    while (at("(")) {
      ++i;
      if (!at(")")) {
        param();
        while (at(",")) {
          ++i;
          param();
        }
      }
      if (!at(")")) fail("expected ')'", line, toks[i].column);
      ++i;
    }
    if (!at(":") || toks[i + 1].kind != Tok::End) fail("expected ':' at end of line", line, toks[i].column);
    return Statement::def(name, std::move(params), child_block(line));
  }

  Statement simple(const std::vector<Token>& toks, const Line& line) {
    std::size_t eq = 0;
    int depth = 0;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      const auto& t = toks[k];
      if (t.kind != Tok::Op) continue;
      if (t.text == "(" || t.text == "[") ++depth;
      if (t.text == ")" || t.text == "]") --depth;
      if (t.text == "=" && depth == 0) {
        eq = k;
        break;
      }
    }
    const Token& head = toks.front();
    if (head.kind != Tok::Ident || is_keyword(head.text)) fail("expected a statement", line, head.column);
    if (eq == 0) {
      // procedure call `name(args)`
      if (toks.size() < 4 || toks[1].text != "(" || toks[toks.size() - 2].text != ")")
        fail("expected an assignment or a procedure call", line, head.column);
      std::vector<ProgExpr> args;
      std::size_t start = 2;
      int d = 0;
      std::size_t close = toks.size() - 2;
      for (std::size_t k = 2; k <= close; ++k) {
        const auto& t = toks[k];
        if (k < close && t.kind == Tok::Op && (t.text == "(" || t.text == "[")) ++d;
        if (k < close && t.kind == Tok::Op && (t.text == ")" || t.text == "]")) --d;
        if (k == close || (d == 0 && t.kind == Tok::Op && t.text == ",")) {
          if (k > start) args.push_back(expr(toks, start, k, line));
          else if (k != close || !args.empty()) fail("empty argument", line, t.column);
          start = k + 1;
        }
      }
      return Statement::call(head.text, std::move(args));
    }
    ProgExpr value = expr(toks, eq + 1, toks.size() - 1, line);
    if (eq == 1) return Statement::assign(head.text, value);
    if (toks[1].text == "[" && toks[eq - 1].text == "]")
      return Statement::assign_index(head.text, expr(toks, 2, eq - 1, line), value);
    fail("bad assignment target", line, toks[1].column);
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

// Rendering -------------------------------------------------------------------

int prec(const ProgExpr& e) {
  switch (e.op()) {
    case ProgOp::Or: return 1;
    case ProgOp::And: return 2;
    case ProgOp::Not: return 3;
    case ProgOp::Eq: case ProgOp::Ne: case ProgOp::Lt: case ProgOp::Le: case ProgOp::Gt: case ProgOp::Ge: return 4;
    case ProgOp::Add: case ProgOp::Sub: return 5;
    case ProgOp::Mul: case ProgOp::Div: return 6;
    case ProgOp::Neg: return 7;
    default: return 8;
  }
}

const char* prog_op_text(ProgOp op) {
  switch (op) {
    case ProgOp::Eq: return "==";
    case ProgOp::Ne: return "!=";
    case ProgOp::Lt: return "<";
    case ProgOp::Le: return "<=";
    case ProgOp::Gt: return ">";
    case ProgOp::Ge: return ">=";
    case ProgOp::And: return "and";
    case ProgOp::Or: return "or";
    case ProgOp::Add: return "+";
    case ProgOp::Sub: return "-";
    case ProgOp::Mul: return "*";
    case ProgOp::Div: return "/";
    default: return "?";
  }
}

std::string render_at(const ProgExpr& e, int min_prec);

std::string render_bare(const ProgExpr& e) {
  switch (e.op()) {
    case ProgOp::Num: {
      const Rational& q = e.number_value();
      if (q < 0) return "(-" + render_bare(ProgExpr::number(Rational(-q))) + ")";
      if (auto d = format_decimal(q)) return *d;
      return "(" + q.get_num().get_str() + " / " + q.get_den().get_str() + ")";
    }
    case ProgOp::Name: return e.identifier();
    case ProgOp::Bool: return e.bool_value() ? "true" : "false";
    case ProgOp::Not: return "not " + render_at(e.arg(0), 3);
    case ProgOp::Neg: return "-" + render_at(e.arg(0), 7);
    case ProgOp::Index: return render_at(e.arg(0), 8) + "[" + render_at(e.arg(1), 0) + "]";
    case ProgOp::Slice:
      return render_at(e.arg(0), 8) + "[" + render_at(e.arg(1), 0) + ":" + render_at(e.arg(2), 0) + "]";
    case ProgOp::Or: case ProgOp::And:
      return render_at(e.arg(0), prec(e)) + " " + prog_op_text(e.op()) + " " + render_at(e.arg(1), prec(e) + 1);
    case ProgOp::Eq: case ProgOp::Ne: case ProgOp::Lt: case ProgOp::Le: case ProgOp::Gt: case ProgOp::Ge:
      return render_at(e.arg(0), 5) + " " + prog_op_text(e.op()) + " " + render_at(e.arg(1), 5);
    default:
      return render_at(e.arg(0), prec(e)) + " " + prog_op_text(e.op()) + " " + render_at(e.arg(1), prec(e) + 1);
  }
}

std::string render_at(const ProgExpr& e, int min_prec) {
  std::string s = render_bare(e);
  return prec(e) < min_prec ? "(" + s + ")" : s;
}

void render_stmt(const Statement& s, int depth, std::string& out);

void render_block(const Statement& s, int depth, std::string& out) {
  std::size_t before = out.size();
  render_stmt(s, depth, out);
  if (out.size() == before) out += std::string(4 * depth, ' ') + "pass\n";
}

void render_stmt(const Statement& s, int depth, std::string& out) {
  std::string pad(4 * depth, ' ');
  switch (s.kind) {
    case Statement::Kind::Pass:
      out += pad + "pass\n";
      return;
    case Statement::Kind::Assign:
      out += pad + s.name;
      if (s.index) out += "[" + render_at(*s.index, 0) + "]";
      out += " = " + render_at(s.expr, 0) + "\n";
      return;
    case Statement::Kind::Seq:
      for (const auto& item : s.body) render_stmt(item, depth, out);
      return;
    case Statement::Kind::While:
      out += pad + "while " + render_at(s.expr, 0) + ":\n";
      render_block(s.body.front(), depth + 1, out);
      return;
    case Statement::Kind::If:
      out += pad + "if " + render_at(s.expr, 0) + ":\n";
      render_block(s.body.front(), depth + 1, out);
      out += pad + "else:\n";
      render_block(s.orelse.front(), depth + 1, out);
      return;
    case Statement::Kind::Assert:
      out += pad + "assert " + render_at(s.expr, 0) + "\n";
      return;
    case Statement::Kind::Def: {
      out += pad + "def " + s.name + "(";
      for (std::size_t i = 0; i < s.params.size(); ++i) {
        if (i) out += ", ";
        out += s.params[i].name;
        if (s.params[i].type) out += ": " + to_string(*s.params[i].type);
      }
      out += "):\n";
      render_block(s.body.front(), depth + 1, out);
      return;
    }
    case Statement::Kind::Call: {
      out += pad + s.name + "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) out += ", ";
        out += render_at(s.args[i], 0);
      }
      out += ")\n";
      return;
    }
    case Statement::Kind::Hole:
      out += pad + "<child " + std::to_string(s.hole) + ">\n";
      return;
  }
}

}  // namespace

ProgExpr parse_prog_expr(std::string_view text) {
  if (text.find('\n') != std::string_view::npos) throw ProgSyntaxError("expression spans several lines", 1, 1);
  auto toks = lex_line(text, 1);
  return ExprParser(toks, 0, toks.size() - 1, 1).parse_all();
}

std::string render_prog_expr(const ProgExpr& e) { return render_at(e, 0); }

Statement parse_program(std::string_view text) { return ProgramParser(split_lines(text)).program(); }

std::string render_program(const Statement& s) {
  std::string out;
  render_block(s, 0, out);
  return out;
}

}  // namespace refinery
