#include "refinery/value.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace refinery {

bool operator==(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    if (a.is_rational() && b.is_rational()) return a.as_rational() == b.as_rational();
    double x = a.is_double() ? a.as_double() : to_double(a.as_rational());
    double y = b.is_double() ? b.as_double() : to_double(b.as_rational());
    return x == y;
  }
  if (a.is_bool() && b.is_bool()) return a.as_bool() == b.as_bool();
  if (a.is_array() && b.is_array()) return a.as_array() == b.as_array();
  return false;
}

std::string render_value(const Value& v) {
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_rational()) return format_rational(v.as_rational());
  if (v.is_double()) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v.as_double());
    return std::string(buf, end);
  }
  std::string out = "[";
  const auto& elems = v.as_array();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (i) out += ", ";
    out += render_value(elems[i]);
  }
  return out + "]";
}

std::string render_valuation(const Valuation& v) {
  std::string out;
  for (const auto& [name, value] : v) {
    if (!out.empty()) out += ", ";
    out += name + " = " + render_value(value);
  }
  return out;
}

namespace {

class ValueReader {
 public:
  explicit ValueReader(std::string_view text) : text_(text) {}

  Value read() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected a value");
    if (text_[pos_] == '[') {
      ++pos_;
      ArrayValue elems;
      skip_ws();
      if (peek() == ']') { ++pos_; return Value(std::move(elems)); }
      while (true) {
        elems.push_back(read());
        skip_ws();
        if (peek() == ',') { ++pos_; continue; }
        if (peek() == ']') { ++pos_; break; }
        fail("expected ',' or ']' in array");
      }
      return Value(std::move(elems));
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != ',' && text_[pos_] != ']')
      ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    if (word == "true") return Value(true);
    if (word == "false") return Value(false);
    if (auto q = parse_rational(word)) return Value(*q);
    fail("malformed value '" + std::string(word) + "'");
  }

  void expect_end() {
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after value");
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) { throw ValueSyntaxError(msg); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Value parse_value(std::string_view text) {
  ValueReader r(text);
  Value v = r.read();
  r.expect_end();
  return v;
}

Valuation parse_bindings(std::string_view text) {
  Valuation out;
  // split on commas outside brackets
  int depth = 0;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string item = trim(text.substr(start, end - start));
    if (item.empty()) return;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ValueSyntaxError("binding '" + item + "' lacks '='");
    std::string name = trim(std::string_view(item).substr(0, eq));
    if (name.empty()) throw ValueSyntaxError("binding '" + item + "' lacks a name");
    out[name] = parse_value(std::string_view(item).substr(eq + 1));
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '[') ++depth;
    else if (c == ']') --depth;
    else if (c == ',' && depth == 0) {
      flush(i);
      start = i + 1;
    }
  }
  flush(text.size());
  return out;
}

bool inhabits(const Value& v, const SpecType& t) {
  switch (t.kind()) {
    case SpecType::Kind::Bool: return v.is_bool();
    case SpecType::Kind::Nat:
      return v.is_rational() && is_integer(v.as_rational()) && v.as_rational() >= 0;
    case SpecType::Kind::Int: return v.is_rational() && is_integer(v.as_rational());
    case SpecType::Kind::Float: return v.is_number();
    case SpecType::Kind::Char: return false;
    case SpecType::Kind::Array:
      if (!v.is_array()) return false;
      for (const auto& e : v.as_array())
        if (!inhabits(e, t.element())) return false;
      return true;
  }
  return false;
}

}  // namespace refinery
