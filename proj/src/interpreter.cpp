#include "refinery/prog_lang.hpp"

#include <cmath>
#include <map>
#include <set>

namespace refinery {

namespace {

struct AssertHalt {
  std::string location;
  Valuation state;
};

struct StepHalt {};
struct SizeHalt {};

using Kind = InterpretError::Kind;

bool is_num(const Value& v) { return v.is_rational() || v.is_double(); }

double as_dbl(const Value& v) { return v.is_double() ? v.as_double() : to_double(v.as_rational()); }

Value to_machine(const Value& v) {
  if (v.is_rational()) return Value(to_double(v.as_rational()));
  if (v.is_array()) {
    ArrayValue out;
    for (const auto& e : v.as_array()) out.push_back(to_machine(e));
    return out;
  }
  return v;
}

void need_num(const Value& v, const char* what) {
  if (!is_num(v)) throw InterpretError(Kind::TypeMismatch, std::string(what) + " needs numbers, got " + render_value(v));
}

bool need_bool(const Value& v) {
  if (!v.is_bool()) throw InterpretError(Kind::TypeMismatch, "expected a truth value, got " + render_value(v));
  return v.as_bool();
}

long need_index(const Value& v) {
  need_num(v, "indexing");
  if (v.is_double()) {
    double d = v.as_double();
    if (d != std::floor(d)) throw InterpretError(Kind::IndexOutOfBounds, "non-integer index " + render_value(v));
    return static_cast<long>(d);
  }
  if (!is_integer(v.as_rational())) throw InterpretError(Kind::IndexOutOfBounds, "non-integer index " + render_value(v));
  return v.as_rational().get_num().get_si();
}

int compare(const Value& a, const Value& b) {
  need_num(a, "comparison");
  need_num(b, "comparison");
  if (a.is_double() || b.is_double()) {
    double x = as_dbl(a), y = as_dbl(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  return cmp(a.as_rational(), b.as_rational());
}

bool equal(const Value& a, const Value& b) {
  if (a.is_array() && b.is_array()) {
    const auto& x = a.as_array();
    const auto& y = b.as_array();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!equal(x[i], y[i])) return false;
    return true;
  }
  if (a.is_bool() || b.is_bool()) return a.is_bool() && b.is_bool() && a.as_bool() == b.as_bool();
  if (a.is_array() || b.is_array()) return false;
  return compare(a, b) == 0;
}

Value arith(ProgOp op, const Value& a, const Value& b) {
  need_num(a, "arithmetic");
  need_num(b, "arithmetic");
  if (a.is_double() || b.is_double()) {
    double x = as_dbl(a), y = as_dbl(b);
    switch (op) {
      case ProgOp::Add: return x + y;
      case ProgOp::Sub: return x - y;
      case ProgOp::Mul: return x * y;
      default:
        if (y == 0) throw InterpretError(Kind::DivisionByZero, "division by zero");
        return x / y;
    }
  }
  const Rational& x = a.as_rational();
  const Rational& y = b.as_rational();
  switch (op) {
    case ProgOp::Add: return Rational(x + y);
    case ProgOp::Sub: return Rational(x - y);
    case ProgOp::Mul: return Rational(x * y);
    default:
      if (y == 0) throw InterpretError(Kind::DivisionByZero, "division by zero");
      return Rational(x / y);
  }
}

Value eval(const ProgExpr& e, const Valuation& st, bool machine) {
  switch (e.op()) {
    case ProgOp::Num:
      return machine ? Value(to_double(e.number_value())) : Value(e.number_value());
    case ProgOp::Bool:
      return e.bool_value();
    case ProgOp::Name: {
      auto it = st.find(e.identifier());
      if (it == st.end()) throw InterpretError(Kind::UnboundName, "name '" + e.identifier() + "' is not defined");
      return it->second;
    }
    case ProgOp::Not:
      return !need_bool(eval(e.arg(0), st, machine));
    case ProgOp::And:
      return need_bool(eval(e.arg(0), st, machine)) && need_bool(eval(e.arg(1), st, machine));
    case ProgOp::Or:
      return need_bool(eval(e.arg(0), st, machine)) || need_bool(eval(e.arg(1), st, machine));
    case ProgOp::Neg: {
      Value v = eval(e.arg(0), st, machine);
      need_num(v, "negation");
      return v.is_double() ? Value(-v.as_double()) : Value(Rational(-v.as_rational()));
    }
    case ProgOp::Add: case ProgOp::Sub: case ProgOp::Mul: case ProgOp::Div:
      return arith(e.op(), eval(e.arg(0), st, machine), eval(e.arg(1), st, machine));
    case ProgOp::Eq:
      return equal(eval(e.arg(0), st, machine), eval(e.arg(1), st, machine));
    case ProgOp::Ne:
      return !equal(eval(e.arg(0), st, machine), eval(e.arg(1), st, machine));
    case ProgOp::Lt: return compare(eval(e.arg(0), st, machine), eval(e.arg(1), st, machine)) < 0;
    case ProgOp::Le: return compare(eval(e.arg(0), st, machine), eval(e.arg(1), st, machine)) <= 0;
    case ProgOp::Gt: return compare(eval(e.arg(0), st, machine), eval(e.arg(1), st, machine)) > 0;
    case ProgOp::Ge: return compare(eval(e.arg(0), st, machine), eval(e.arg(1), st, machine)) >= 0;
    case ProgOp::Index: {
      Value a = eval(e.arg(0), st, machine);
      if (!a.is_array()) throw InterpretError(Kind::TypeMismatch, "indexing a non-array");
      long i = need_index(eval(e.arg(1), st, machine));
      if (i < 0 || i >= static_cast<long>(a.as_array().size()))
        throw InterpretError(Kind::IndexOutOfBounds, "index " + std::to_string(i) + " out of bounds in " +
                                                          render_prog_expr(e));
      return a.as_array()[static_cast<std::size_t>(i)];
    }
    case ProgOp::Slice: {
      Value a = eval(e.arg(0), st, machine);
      if (!a.is_array()) throw InterpretError(Kind::TypeMismatch, "slicing a non-array");
      long i = need_index(eval(e.arg(1), st, machine));
      long j = need_index(eval(e.arg(2), st, machine));
      const auto& arr = a.as_array();
      if (i < 0 || i > j || j > static_cast<long>(arr.size()))
        throw InterpretError(Kind::IndexOutOfBounds, "bad slice in " + render_prog_expr(e));
      return ArrayValue(arr.begin() + i, arr.begin() + j);
    }
  }
  throw InterpretError(Kind::TypeMismatch, "unhandled expression");
}

class Machine {
 public:
  Machine(const RunOptions& opts) : opts_(opts) {}

  void exec(const Statement& s, Valuation& st) {
    if (s.kind != Statement::Kind::Seq) tick();
    switch (s.kind) {
      case Statement::Kind::Pass:
        return;
      case Statement::Kind::Assign: {
        Value v = eval(s.expr, st, opts_.binary64);
        check_size(v);
        if (!s.index) {
          st[s.name] = std::move(v);
          return;
        }
        auto it = st.find(s.name);
        if (it == st.end()) throw InterpretError(Kind::UnboundName, "name '" + s.name + "' is not defined");
        if (!it->second.is_array()) throw InterpretError(Kind::TypeMismatch, "'" + s.name + "' is not an array");
        long i = need_index(eval(*s.index, st, opts_.binary64));
        auto& arr = it->second.as_array();
        if (i < 0 || i >= static_cast<long>(arr.size()))
          throw InterpretError(Kind::IndexOutOfBounds, "index " + std::to_string(i) + " out of bounds for " + s.name);
        arr[static_cast<std::size_t>(i)] = std::move(v);
        return;
      }
      case Statement::Kind::Seq:
        for (const auto& item : s.body) exec(item, st);
        return;
      case Statement::Kind::While:
        while (need_bool(eval(s.expr, st, opts_.binary64))) {
          exec(s.body.front(), st);
          tick();
        }
        return;
      case Statement::Kind::If:
        if (need_bool(eval(s.expr, st, opts_.binary64))) exec(s.body.front(), st);
        else exec(s.orelse.front(), st);
        return;
      case Statement::Kind::Assert:
        ++asserts_;
        if (!need_bool(eval(s.expr, st, opts_.binary64))) {
          std::string where = (s.line ? "line " + std::to_string(s.line) + ": " : std::string()) + "assert " +
                              render_prog_expr(s.expr);
          throw AssertHalt{where, st};
        }
        return;
      case Statement::Kind::Def:
        procs_[s.name] = &s;
        return;
      case Statement::Kind::Call:
        call(s, st);
        return;
      case Statement::Kind::Hole:
        throw InterpretError(Kind::TypeMismatch, "program contains an unrefined placeholder");
    }
  }

  std::uint64_t steps() const { return steps_; }
  std::uint64_t asserts() const { return asserts_; }

 private:
  void check_size(const Value& v) const {
    if (opts_.max_bits == 0 || !v.is_rational()) return;
    const Rational& q = v.as_rational();
    if (mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2) > opts_.max_bits) throw SizeHalt{};
  }

  void tick() {
    if (++steps_ > opts_.step_limit) throw StepHalt{};
  }

  void call(const Statement& s, Valuation& st) {
    auto it = procs_.find(s.name);
    if (it == procs_.end()) throw InterpretError(Kind::UndefinedProcedure, "call to undefined procedure " + s.name);
    const Statement& def = *it->second;
    if (active_.count(s.name)) throw InterpretError(Kind::Recursion, "recursive call to " + s.name);
    if (def.params.size() != s.args.size())
      throw InterpretError(Kind::TypeMismatch, s.name + " expects " + std::to_string(def.params.size()) + " arguments");
    Valuation frame = st;
    std::set<std::string> params;
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      frame[def.params[i].name] = eval(s.args[i], st, opts_.binary64);
      params.insert(def.params[i].name);
    }
    active_.insert(s.name);
    try {
      exec(def.body.front(), frame);
    } catch (...) {
      active_.erase(s.name);
      throw;
    }
    active_.erase(s.name);
    for (auto& [name, value] : frame)
      if (!params.count(name)) st[name] = std::move(value);
  }

  const RunOptions& opts_;
  std::map<std::string, const Statement*> procs_;
  std::set<std::string> active_;
  std::uint64_t steps_ = 0;
  std::uint64_t asserts_ = 0;
};

}  // namespace

Value eval_prog_expr(const ProgExpr& e, const Valuation& state, bool binary64) { return eval(e, state, binary64); }

RunOutcome interpret(const Statement& program, const Valuation& input, const RunOptions& options) {
  RunOutcome out;
  Valuation st;
  for (const auto& [name, v] : input) st[name] = options.binary64 ? to_machine(v) : v;
  Machine m(options);
  try {
    m.exec(program, st);
    out.status = RunOutcome::Status::Completed;
  } catch (const AssertHalt& halt) {
    out.status = RunOutcome::Status::AssertFailed;
    out.location = halt.location;
    out.failing_state = halt.state;
  } catch (const StepHalt&) {
    out.status = RunOutcome::Status::StepLimit;
  } catch (const SizeHalt&) {
    out.status = RunOutcome::Status::SizeLimit;
  }
  out.final_state = std::move(st);
  out.asserts_executed = m.asserts();
  out.steps = m.steps();
  return out;
}

}  // namespace refinery
