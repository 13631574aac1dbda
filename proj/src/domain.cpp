#include "refinery/domain.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace refinery {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::pair<long, long> parse_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) throw DomainError("expected a range lo..hi, got '" + text + "'");
  auto lo = parse_rational(trim(std::string_view(text).substr(0, dots)));
  auto hi = parse_rational(trim(std::string_view(text).substr(dots + 2)));
  if (!lo || !hi || !is_integer(*lo) || !is_integer(*hi) || *lo > *hi)
    throw DomainError("bad integer range '" + text + "'");
  return {lo->get_num().get_si(), hi->get_num().get_si()};
}

std::vector<Value> parse_list(const std::string& text) {
  try {
    Value v = parse_value("[" + text + "]");
    return v.as_array();
  } catch (const ValueSyntaxError& err) {
    throw DomainError("bad value list '" + text + "': " + err.what());
  }
}

}  // namespace

std::vector<Rational> DomainSpec::default_float_grid() {
  return {Rational(-2), Rational(-1), Rational(-1, 2), Rational(0), Rational(1, 4), Rational(1, 2),
          Rational(1),  Rational(3, 2), Rational(2),  Rational(3), Rational(4)};
}

std::vector<Value> DomainSpec::carrier(const SpecType& t) const {
  std::vector<Value> out;
  switch (t.kind()) {
    case SpecType::Kind::Bool:
      return {Value(false), Value(true)};
    case SpecType::Kind::Nat: {
      auto [lo, hi] = nat_range ? *nat_range : std::pair<long, long>{std::max(0L, int_lo), int_hi};
      for (long k = lo; k <= hi; ++k) out.emplace_back(Rational(k));
      return out;
    }
    case SpecType::Kind::Int:
      for (long k = int_lo; k <= int_hi; ++k) out.emplace_back(Rational(k));
      return out;
    case SpecType::Kind::Float:
      for (const auto& q : float_grid) out.emplace_back(q);
      return out;
    case SpecType::Kind::Char:
      throw DomainError("no carrier for char");
    case SpecType::Kind::Array: {
      std::vector<Value> elems = carrier(t.element());
      for (int len = array_min_len; len <= array_max_len; ++len) {
        ArrayValue cur(static_cast<std::size_t>(len));
        std::function<void(int)> fill = [&](int pos) {
          if (pos == len) {
            out.emplace_back(cur);
            return;
          }
          for (const auto& e : elems) {
            cur[pos] = e;
            fill(pos + 1);
          }
        };
        if (len == 0 || !elems.empty()) fill(0);
      }
      return out;
    }
  }
  return out;
}

std::vector<Value> DomainSpec::carrier_for(const std::string& name, const SpecType& t) const {
  auto it = overrides.find(name);
  if (it == overrides.end()) return carrier(t);
  std::vector<Value> out;
  for (const auto& v : it->second)
    if (inhabits(v, t)) out.push_back(v);
  return out;
}

void DomainSpec::apply_directive(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw DomainError("domain directive needs 'name: values'");
  std::string key = trim(text.substr(0, colon));
  std::string rest = trim(text.substr(colon + 1));
  if (key == "int" || key == "Z") {
    std::tie(int_lo, int_hi) = parse_range(rest);
  } else if (key == "nat") {
    auto [lo, hi] = parse_range(rest);
    if (lo < 0) throw DomainError("nat range must be non-negative");
    nat_range = {lo, hi};
  } else if (key == "float") {
    float_grid.clear();
    for (const auto& v : parse_list(rest)) {
      if (!v.is_rational()) throw DomainError("float grid values must be numbers");
      if (std::find(float_grid.begin(), float_grid.end(), v.as_rational()) == float_grid.end())
        float_grid.push_back(v.as_rational());
    }
    if (float_grid.empty()) throw DomainError("float grid must be nonempty");
  } else if (key == "array") {
    auto [lo, hi] = parse_range(rest);
    if (lo < 0) throw DomainError("array lengths must be non-negative");
    array_min_len = static_cast<int>(lo);
    array_max_len = static_cast<int>(hi);
  } else if (key == "budget") {
    auto q = parse_rational(rest);
    if (!q || !is_integer(*q) || *q <= 0) throw DomainError("budget must be a positive integer");
    budget = q->get_num().get_ui();
  } else {
    std::vector<Value> values;
    if (rest.find("..") != std::string::npos && rest.find(',') == std::string::npos) {
      auto [lo, hi] = parse_range(rest);
      for (long k = lo; k <= hi; ++k) values.emplace_back(Rational(k));
    } else {
      values = parse_list(rest);
    }
    if (values.empty()) throw DomainError("carrier for '" + key + "' must be nonempty");
    overrides[key] = std::move(values);
  }
}

}  // namespace refinery
