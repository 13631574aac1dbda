#include "refinery/spec_eval.hpp"

#include <utility>

namespace refinery {

namespace {

Rational number_of(const Value& v) {
  if (v.is_rational()) return v.as_rational();
  if (v.is_double()) return from_double(v.as_double());
  throw EvalError(EvalError::Kind::TypeMismatch, "expected a number, got " + render_value(v));
}

bool truth_of(const Value& v) {
  if (!v.is_bool()) throw EvalError(EvalError::Kind::TypeMismatch, "expected a truth value, got " + render_value(v));
  return v.as_bool();
}

const ArrayValue& array_of(const Value& v) {
  if (!v.is_array()) throw EvalError(EvalError::Kind::TypeMismatch, "expected an array, got " + render_value(v));
  return v.as_array();
}

long index_of(const Value& v) {
  Rational q = number_of(v);
  if (!is_integer(q)) throw EvalError(EvalError::Kind::IndexOutOfBounds, "non-integer index " + format_rational(q));
  if (!q.get_num().fits_slong_p()) throw EvalError(EvalError::Kind::IndexOutOfBounds, "index out of range");
  return q.get_num().get_si();
}

bool values_equal(const Value& a, const Value& b) {
  if (a.is_array() && b.is_array()) {
    const auto& x = a.as_array();
    const auto& y = b.as_array();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!values_equal(x[i], y[i])) return false;
    return true;
  }
  if (a.is_bool() || b.is_bool()) return a.is_bool() && b.is_bool() && a.as_bool() == b.as_bool();
  return number_of(a) == number_of(b);
}

class Evaluator {
 public:
  Evaluator(const Valuation& v, const Valuation& pre, const DomainSpec& d, const std::shared_ptr<const Definitions>& defs)
      : v_(v), pre_(pre), d_(d), defs_(defs) {}

  Value eval(const SpecExpr& e) {
    switch (e.kind()) {
      case ExprKind::Num:
        return e.number_value();
      case ExprKind::Bool:
        return e.bool_value();
      case ExprKind::Var:
        return lookup(e.name());
      case ExprKind::Const: {
        // Constants read the same value in both states.
        bool saved = in_init_;
        in_init_ = false;
        Value r = lookup(e.name());
        in_init_ = saved;
        return r;
      }
      case ExprKind::Init: {
        bool saved = in_init_;
        in_init_ = true;
        Value r = eval(e.arg(0));
        in_init_ = saved;
        return r;
      }
      case ExprKind::Neg:
        return Value(Rational(-number_of(eval(e.arg(0)))));
      case ExprKind::Add: case ExprKind::Sub: case ExprKind::Mul: case ExprKind::Div: {
        Rational a = number_of(eval(e.arg(0)));
        Rational b = number_of(eval(e.arg(1)));
        switch (e.kind()) {
          case ExprKind::Add: return Value(Rational(a + b));
          case ExprKind::Sub: return Value(Rational(a - b));
          case ExprKind::Mul: return Value(Rational(a * b));
          default:
            if (b == 0) throw EvalError(EvalError::Kind::DivisionByZero, "division by zero in " + render_spec_expr(e));
            return Value(Rational(a / b));
        }
      }
      case ExprKind::Lt: case ExprKind::Le: case ExprKind::Gt: case ExprKind::Ge: {
        Rational a = number_of(eval(e.arg(0)));
        Rational b = number_of(eval(e.arg(1)));
        switch (e.kind()) {
          case ExprKind::Lt: return a < b;
          case ExprKind::Le: return a <= b;
          case ExprKind::Gt: return a > b;
          default: return a >= b;
        }
      }
      case ExprKind::Eq:
        return values_equal(eval(e.arg(0)), eval(e.arg(1)));
      case ExprKind::Ne:
        return !values_equal(eval(e.arg(0)), eval(e.arg(1)));
      case ExprKind::And:
        return truth_of(eval(e.arg(0))) && truth_of(eval(e.arg(1)));
      case ExprKind::Or:
        return truth_of(eval(e.arg(0))) || truth_of(eval(e.arg(1)));
      case ExprKind::Implies:
        return !truth_of(eval(e.arg(0))) || truth_of(eval(e.arg(1)));
      case ExprKind::Not:
        return !truth_of(eval(e.arg(0)));
      case ExprKind::Forall: case ExprKind::Exists:
        return quantify(e);
      case ExprKind::Select: {
        Value a = eval(e.arg(0));
        const auto& arr = array_of(a);
        long i = index_of(eval(e.arg(1)));
        if (i < 0 || i >= static_cast<long>(arr.size()))
          throw EvalError(EvalError::Kind::IndexOutOfBounds, "index " + std::to_string(i) + " out of bounds in " +
                                                                 render_spec_expr(e));
        return arr[static_cast<std::size_t>(i)];
      }
      case ExprKind::Slice: {
        Value a = eval(e.arg(0));
        const auto& arr = array_of(a);
        long i = index_of(eval(e.arg(1)));
        long j = index_of(eval(e.arg(2)));
        if (i < 0 || i > j || j > static_cast<long>(arr.size()))
          throw EvalError(EvalError::Kind::IndexOutOfBounds, "bad slice in " + render_spec_expr(e));
        return ArrayValue(arr.begin() + i, arr.begin() + j);
      }
      case ExprKind::Store: {
        Value a = eval(e.arg(0));
        ArrayValue arr = array_of(a);
        long i = index_of(eval(e.arg(1)));
        if (i < 0 || i >= static_cast<long>(arr.size()))
          throw EvalError(EvalError::Kind::IndexOutOfBounds, "index " + std::to_string(i) + " out of bounds in " +
                                                                 render_spec_expr(e));
        arr[static_cast<std::size_t>(i)] = eval(e.arg(2));
        return arr;
      }
      case ExprKind::Apply:
        return apply(e);
    }
    throw EvalError(EvalError::Kind::TypeMismatch, "unhandled expression");
  }

 private:
  Value lookup(const std::string& name) const {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (it->first == name) return it->second;
    const Valuation& src = in_init_ ? pre_ : v_;
    auto it = src.find(name);
    if (it == src.end())
      throw EvalError(EvalError::Kind::UnboundName,
                      "no value for " + name + (in_init_ ? " in the initial state" : ""));
    return it->second;
  }

  Value quantify(const SpecExpr& e) {
    std::vector<Value> carrier;
    try {
      carrier = d_.carrier_for(e.name(), e.bound_type());
    } catch (const DomainError& err) {
      throw EvalError(EvalError::Kind::UnboundedQuantifier, err.what());
    }
    if (carrier.empty())
      throw EvalError(EvalError::Kind::UnboundedQuantifier, "empty carrier for bound name " + e.name());
    bool universal = e.kind() == ExprKind::Forall;
    bound_.emplace_back(e.name(), Value());
    bool result = universal;
    for (const auto& c : carrier) {
      bound_.back().second = c;
      bool b;
      try {
        b = truth_of(eval(e.body()));
      } catch (...) {
        bound_.pop_back();
        throw;
      }
      if (b != universal) {
        result = !universal;
        break;
      }
    }
    bound_.pop_back();
    return result;
  }

  Value apply(const SpecExpr& e) {
    if (e.name() == "len") return Value(Rational(static_cast<long>(array_of(eval(e.arg(0))).size())));
    if (e.name() == "mod") {
      Rational a = number_of(eval(e.arg(0)));
      Rational b = number_of(eval(e.arg(1)));
      if (!is_integer(a) || !is_integer(b)) throw EvalError(EvalError::Kind::TypeMismatch, "mod of non-integers");
      if (b == 0) throw EvalError(EvalError::Kind::DivisionByZero, "mod by zero in " + render_spec_expr(e));
      mpz_class r;
      mpz_class m = abs(b.get_num());
      mpz_fdiv_r(r.get_mpz_t(), a.get_num().get_mpz_t(), m.get_mpz_t());
      return Value(Rational(r));
    }
    const Definition* d = nullptr;
    if (defs_) {
      auto it = defs_->find(e.name());
      if (it != defs_->end()) d = &it->second;
    }
    if (!d) throw EvalError(EvalError::Kind::UnboundName, "unknown function " + e.name());
    std::vector<Value> args;
    for (const auto& a : e.args()) args.push_back(eval(a));
    // The body sees only its parameters and the global names.
    std::vector<std::pair<std::string, Value>> outer;
    outer.swap(bound_);
    for (std::size_t i = 0; i < d->params.size() && i < args.size(); ++i) bound_.emplace_back(d->params[i].name, args[i]);
    Value r;
    try {
      r = eval(d->body);
    } catch (...) {
      bound_.swap(outer);
      throw;
    }
    bound_.swap(outer);
    return r;
  }

  const Valuation& v_;
  const Valuation& pre_;
  const DomainSpec& d_;
  const std::shared_ptr<const Definitions>& defs_;
  std::vector<std::pair<std::string, Value>> bound_;
  bool in_init_ = false;
};

}  // namespace

Value eval_spec(const SpecExpr& e, const Valuation& v, const Valuation& pre_state, const DomainSpec& domains,
                const std::shared_ptr<const Definitions>& defs) {
  return Evaluator(v, pre_state, domains, defs).eval(e);
}

bool holds(const SpecExpr& e, const Valuation& v, const Valuation& pre_state, const DomainSpec& domains,
           const std::shared_ptr<const Definitions>& defs) {
  return truth_of(eval_spec(e, v, pre_state, domains, defs));
}

}  // namespace refinery
