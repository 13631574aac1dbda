#pragma once

#include "refinery/domain.hpp"
#include "refinery/spec_syntax.hpp"

#include <memory>
#include <stdexcept>

namespace refinery {

class EvalError : public std::runtime_error {
 public:
  enum class Kind { DivisionByZero, IndexOutOfBounds, UnboundedQuantifier, UnboundName, TypeMismatch };
  EvalError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Evaluates `e` exactly. Init nodes read `pre_state`; quantifiers range over
/// the carriers of `domains`. Doubles in the valuation are read as their
/// exact rational value.
Value eval_spec(const SpecExpr& e, const Valuation& v, const Valuation& pre_state, const DomainSpec& domains,
                const std::shared_ptr<const Definitions>& defs = nullptr);

/// eval_spec on a formula, returning its truth value.
bool holds(const SpecExpr& e, const Valuation& v, const Valuation& pre_state, const DomainSpec& domains,
           const std::shared_ptr<const Definitions>& defs = nullptr);

}  // namespace refinery
