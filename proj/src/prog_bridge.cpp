#include "refinery/prog_lang.hpp"
#include "refinery/spec_eval.hpp"

#include <sstream>

namespace refinery {

SpecExpr prog_expr_to_spec(const ProgExpr& e, const Env& env) {
  auto sub = [&](std::size_t i) { return prog_expr_to_spec(e.arg(i), env); };
  switch (e.op()) {
    case ProgOp::Num: return SpecExpr::number(e.number_value());
    case ProgOp::Bool: return SpecExpr::boolean(e.bool_value());
    case ProgOp::Name: {
      if (const TypedParam* p = env.find(e.identifier())) return SpecExpr::reference(*p);
      return SpecExpr::variable(e.identifier());
    }
    case ProgOp::Eq: return SpecExpr::binary(ExprKind::Eq, sub(0), sub(1));
    case ProgOp::Ne: return SpecExpr::binary(ExprKind::Ne, sub(0), sub(1));
    case ProgOp::Lt: return SpecExpr::binary(ExprKind::Lt, sub(0), sub(1));
    case ProgOp::Le: return SpecExpr::binary(ExprKind::Le, sub(0), sub(1));
    case ProgOp::Gt: return SpecExpr::binary(ExprKind::Gt, sub(0), sub(1));
    case ProgOp::Ge: return SpecExpr::binary(ExprKind::Ge, sub(0), sub(1));
    case ProgOp::And: return SpecExpr::binary(ExprKind::And, sub(0), sub(1));
    case ProgOp::Or: return SpecExpr::binary(ExprKind::Or, sub(0), sub(1));
    case ProgOp::Not: return SpecExpr::unary(ExprKind::Not, sub(0));
    case ProgOp::Add: return SpecExpr::binary(ExprKind::Add, sub(0), sub(1));
    case ProgOp::Sub: return SpecExpr::binary(ExprKind::Sub, sub(0), sub(1));
    case ProgOp::Mul: return SpecExpr::binary(ExprKind::Mul, sub(0), sub(1));
    case ProgOp::Div: return SpecExpr::binary(ExprKind::Div, sub(0), sub(1));
    case ProgOp::Neg: return SpecExpr::unary(ExprKind::Neg, sub(0));
    case ProgOp::Index: return SpecExpr::select(sub(0), sub(1));
    case ProgOp::Slice: return SpecExpr::slice(sub(0), sub(1), sub(2));
  }
  return SpecExpr::boolean(false);
}

ProgExpr spec_to_prog_expr(const SpecExpr& e) {
  auto sub = [&](std::size_t i) { return spec_to_prog_expr(e.arg(i)); };
  auto bin = [&](ProgOp op) { return ProgExpr::binary(op, sub(0), sub(1)); };
  switch (e.kind()) {
    case ExprKind::Num: {
      const Rational& q = e.number_value();
      if (q < 0) return ProgExpr::unary(ProgOp::Neg, spec_to_prog_expr(SpecExpr::number(Rational(-q))));
      if (is_integer(q) || format_decimal(q)) return ProgExpr::number(q);
      return ProgExpr::binary(ProgOp::Div, ProgExpr::number(Rational(q.get_num())), ProgExpr::number(Rational(q.get_den())));
    }
    case ExprKind::Bool: return ProgExpr::boolean(e.bool_value());
    case ExprKind::Var: case ExprKind::Const: return ProgExpr::name(e.name());
    case ExprKind::Neg: return ProgExpr::unary(ProgOp::Neg, sub(0));
    case ExprKind::Not: return ProgExpr::unary(ProgOp::Not, sub(0));
    case ExprKind::Add: return bin(ProgOp::Add);
    case ExprKind::Sub: return bin(ProgOp::Sub);
    case ExprKind::Mul: return bin(ProgOp::Mul);
    case ExprKind::Div: return bin(ProgOp::Div);
    case ExprKind::Lt: return bin(ProgOp::Lt);
    case ExprKind::Le: return bin(ProgOp::Le);
    case ExprKind::Eq: return bin(ProgOp::Eq);
    case ExprKind::Gt: return bin(ProgOp::Gt);
    case ExprKind::Ge: return bin(ProgOp::Ge);
    case ExprKind::Ne: return bin(ProgOp::Ne);
    case ExprKind::And: return bin(ProgOp::And);
    case ExprKind::Or: return bin(ProgOp::Or);
    case ExprKind::Select: return ProgExpr::index(sub(0), sub(1));
    case ExprKind::Slice: return ProgExpr::slice(sub(0), sub(1), sub(2));
    default:
      throw NotExecutable("not executable: " + render_spec_expr(e));
  }
}

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<TypedParam> declared(const std::string& text, ParamRole role) {
  auto params = parse_params(text);
  for (auto& p : params) p.role = role;
  return params;
}

}  // namespace

TestFile parse_test_file(std::string_view text) {
  TestFile tf;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::optional<SpecExpr> default_check;
  bool case_has_check = false;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("tests line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) fail("expected 'key: value'");
    std::string key = trim(line.substr(0, colon));
    std::string rest = trim(line.substr(colon + 1));
    try {
      if (key == "constants" || key == "variants") {
        for (auto& p : declared(rest, key == "constants" ? ParamRole::Constant : ParamRole::Variant))
          tf.env.params.push_back(p);
      } else if (key == "check") {
        SpecExpr f = parse_formula(rest, tf.env);
        if (tf.cases.empty() || case_has_check) {
          if (!tf.cases.empty()) fail("check after a case that already has one");
          default_check = f;
        } else {
          tf.cases.back().check = f;
          case_has_check = true;
        }
      } else if (key == "input") {
        if (!default_check) fail("input before any check");
        tf.cases.push_back({parse_bindings(rest), *default_check});
        case_has_check = false;
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const SpecSyntaxError& err) {
      fail(err.what());
    } catch (const SpecTypeError& err) {
      fail(err.what());
    } catch (const ValueSyntaxError& err) {
      fail(err.what());
    }
  }
  return tf;
}

std::size_t TestReport::passed() const {
  std::size_t n = 0;
  for (const auto& c : cases) n += c.passed ? 1 : 0;
  return n;
}

TestReport run_tests(const Statement& program, const std::vector<TestCase>& cases, const DomainSpec& domains,
                     const RunOptions& options, const std::shared_ptr<const Definitions>& defs) {
  TestReport report;
  for (const auto& tc : cases) {
    CaseResult r;
    r.input = tc.input;
    try {
      RunOutcome out = interpret(program, tc.input, options);
      if (out.status == RunOutcome::Status::AssertFailed) {
        r.message = "assertion failed at " + out.location + " with " + render_valuation(out.failing_state);
      } else if (out.status == RunOutcome::Status::StepLimit) {
        r.message = "step limit exceeded";
      } else if (out.status == RunOutcome::Status::SizeLimit) {
        r.message = "number size limit exceeded";
      } else if (holds(tc.check, out.final_state, tc.input, domains, defs)) {
        r.passed = true;
      } else {
        r.message = "check failed, final state " + render_valuation(out.final_state);
      }
    } catch (const InterpretError& err) {
      r.message = std::string("runtime error: ") + err.what();
    } catch (const EvalError& err) {
      r.message = std::string("check error: ") + err.what();
    }
    report.cases.push_back(std::move(r));
  }
  return report;
}

}  // namespace refinery
