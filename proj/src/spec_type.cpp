#include "refinery/spec_type.hpp"

#include <sstream>
#include <vector>

namespace refinery {

std::string to_string(const SpecType& t) {
  switch (t.kind()) {
    case SpecType::Kind::Bool: return "bool";
    case SpecType::Kind::Nat: return "nat";
    case SpecType::Kind::Int: return "int";
    case SpecType::Kind::Float: return "float";
    case SpecType::Kind::Char: return "char";
    case SpecType::Kind::Array: return "array " + to_string(t.element());
  }
  return "?";
}

std::optional<SpecType> parse_type(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) return std::nullopt;
  std::optional<SpecType> t;
  const std::string& base = words.back();
  if (base == "bool") t = SpecType::boolean();
  else if (base == "nat") t = SpecType::nat();
  else if (base == "int" || base == "Z") t = SpecType::integer();
  else if (base == "float") t = SpecType::real();
  else if (base == "char") t = SpecType::character();
  else return std::nullopt;
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    if (words[i] != "array") return std::nullopt;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) t = SpecType::array(*t);
  return t;
}

namespace {
int rank(const SpecType& t) {
  switch (t.kind()) {
    case SpecType::Kind::Nat: return 0;
    case SpecType::Kind::Int: return 1;
    case SpecType::Kind::Float: return 2;
    default: return -1;
  }
}
}  // namespace

bool widens_to(const SpecType& from, const SpecType& to) {
  if (from == to) return true;
  int a = rank(from), b = rank(to);
  return a >= 0 && b >= 0 && a <= b;
}

std::optional<SpecType> numeric_join(const SpecType& a, const SpecType& b) {
  int ra = rank(a), rb = rank(b);
  if (ra < 0 || rb < 0) return std::nullopt;
  return ra >= rb ? a : b;
}

}  // namespace refinery
