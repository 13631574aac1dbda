#pragma once

#include <memory>
#include <optional>
#include <string>

namespace refinery {

/// Types shared by the specification and program languages. `Char` exists
/// only so program signatures can name it; no operator accepts it.
class SpecType {
 public:
  enum class Kind { Bool, Nat, Int, Float, Char, Array };

  SpecType() : kind_(Kind::Bool) {}

  static SpecType boolean() { return SpecType(Kind::Bool); }
  static SpecType nat() { return SpecType(Kind::Nat); }
  static SpecType integer() { return SpecType(Kind::Int); }
  static SpecType real() { return SpecType(Kind::Float); }
  static SpecType character() { return SpecType(Kind::Char); }
  static SpecType array(SpecType elem) {
    SpecType t(Kind::Array);
    t.elem_ = std::make_shared<const SpecType>(std::move(elem));
    return t;
  }

  Kind kind() const { return kind_; }
  bool is_numeric() const { return kind_ == Kind::Nat || kind_ == Kind::Int || kind_ == Kind::Float; }
  bool is_array() const { return kind_ == Kind::Array; }
  bool is_bool() const { return kind_ == Kind::Bool; }
  const SpecType& element() const { return *elem_; }

  friend bool operator==(const SpecType& a, const SpecType& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ != Kind::Array) return true;
    return *a.elem_ == *b.elem_;
  }

 private:
  explicit SpecType(Kind k) : kind_(k) {}
  Kind kind_;
  std::shared_ptr<const SpecType> elem_;
};

/// `bool`, `nat`, `int`, `float`, `char`, `array int`.
std::string to_string(const SpecType& t);

/// Accepts `Z` as a spelling of `int`. Returns nullopt for unknown names.
std::optional<SpecType> parse_type(const std::string& text);

/// Numeric widening nat -> int -> float.
bool widens_to(const SpecType& from, const SpecType& to);

/// Least numeric type covering both; nullopt if either is non-numeric.
std::optional<SpecType> numeric_join(const SpecType& a, const SpecType& b);

}  // namespace refinery
