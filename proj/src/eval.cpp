#include "refinery/frontends.hpp"

#include "refinery/spec_eval.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace refinery {

namespace {

struct Grid {
  std::vector<std::string> names;
  std::vector<std::vector<Value>> carriers;
};

Grid input_grid(const SpecFile& f, const DomainSpec& d) {
  Grid g;
  for (const auto* ps : {&f.statement.constants, &f.statement.frame})
    for (const auto& p : *ps) {
      g.names.push_back(p.name);
      g.carriers.push_back(d.carrier_for(p.name, p.type));
    }
  return g;
}

std::string run_and_check(const SpecFile& f, const Statement& program, const Valuation& input, const DomainSpec& d) {
  try {
    RunOutcome out = interpret(program, input);
    if (out.status == RunOutcome::Status::AssertFailed) return "assert failed at " + out.location;
    if (out.status == RunOutcome::Status::StepLimit) return "step limit reached";
    if (out.status == RunOutcome::Status::SizeLimit) return "number size limit reached";
    if (!holds(f.statement.post, out.final_state, input, d, f.definitions))
      return "post fails; final " + render_valuation(out.final_state);
    return "";
  } catch (const std::exception& e) {
    return e.what();
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// Wider carriers for the enlarged test set, so the extra cases reach past the verification grid.
DomainSpec widened(const DomainSpec& d) {
  DomainSpec w = d;
  w.overrides.clear();
  w.int_lo = std::min(d.int_lo, -10L);
  w.int_hi = std::max(d.int_hi, 30L);
  w.nat_range.reset();
  w.array_max_len = std::max(d.array_max_len, 6);
  std::set<Rational> grid(d.float_grid.begin(), d.float_grid.end());
  for (int k = -20; k <= 80; ++k) {
    Rational q(k, 4);
    q.canonicalize();
    grid.insert(q);
  }
  w.float_grid.assign(grid.begin(), grid.end());
  return w;
}

std::string ratio(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

}  // namespace

SoundnessResult check_exhaustively(const SpecFile& f, const Statement& program, const DomainSpec& d,
                                   std::uint64_t limit) {
  Grid g = input_grid(f, d);
  std::uint64_t total = 1;
  for (const auto& c : g.carriers) {
    if (c.empty()) return {};
    if (total > limit / c.size() + 1) throw GridTooLarge("input grid exceeds " + std::to_string(limit) + " points");
    total *= c.size();
  }
  if (total > limit) throw GridTooLarge("input grid has " + std::to_string(total) + " points, limit " + std::to_string(limit));

  SoundnessResult r;
  std::vector<std::size_t> idx(g.names.size(), 0);
  while (true) {
    Valuation in;
    for (std::size_t k = 0; k < idx.size(); ++k) in[g.names[k]] = g.carriers[k][idx[k]];
    ++r.points;
    if (holds(f.statement.pre, in, in, d, f.definitions)) {
      ++r.admitted;
      std::string why = run_and_check(f, program, in, d);
      if (why.empty()) {
        ++r.passed;
      } else if (r.failures.size() < 5) {
        r.failures.push_back(render_valuation(in) + ": " + why);
      }
    }
    std::size_t k = idx.size();
    while (k > 0) {
      --k;
      if (++idx[k] < g.carriers[k].size()) break;
      idx[k] = 0;
      if (k == 0) return r;
    }
    if (idx.empty()) return r;
  }
}

std::vector<TestCase> sample_cases(const SpecFile& f, const DomainSpec& d, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto range = [&](long lo, long hi) { return Value(Rational(std::uniform_int_distribution<long>(lo, hi)(rng))); };
  std::function<Value(const SpecType&)> draw = [&](const SpecType& t) -> Value {
    switch (t.kind()) {
      case SpecType::Kind::Bool: return Value(pick(2) == 1);
      case SpecType::Kind::Nat: {
        auto [lo, hi] = d.nat_range ? *d.nat_range : std::pair<long, long>{std::max(0L, d.int_lo), d.int_hi};
        return range(lo, hi);
      }
      case SpecType::Kind::Int: return range(d.int_lo, d.int_hi);
      case SpecType::Kind::Float: return Value(d.float_grid[pick(d.float_grid.size())]);
      case SpecType::Kind::Array: {
        ArrayValue a(static_cast<std::size_t>(std::uniform_int_distribution<int>(d.array_min_len, d.array_max_len)(rng)));
        for (auto& x : a) x = draw(t.element());
        return Value(a);
      }
      case SpecType::Kind::Char: break;
    }
    throw DomainError("cannot sample " + to_string(t));
  };

  std::map<std::string, SpecType> types;
  for (const auto* ps : {&f.statement.constants, &f.statement.frame})
    for (const auto& p : *ps) types.emplace(p.name, p.type);

  // Pre conjuncts `len(x) = E` and `x[c] = E` are rarely met by chance, so
  // they are forced in order before the pre is checked.
  auto shape = [&](Valuation& in) {
    for (const auto& c : conjuncts(f.statement.pre)) {
      if (c.kind() != ExprKind::Eq) continue;
      const SpecExpr& lhs = c.arg(0);
      try {
        if (lhs.kind() == ExprKind::Apply && lhs.name() == "len" && lhs.arg(0).is_reference()) {
          auto it = in.find(lhs.arg(0).name());
          if (it == in.end() || !it->second.is_array()) continue;
          Value n = eval_spec(c.arg(1), in, in, d, f.definitions);
          if (!n.is_rational() || !is_integer(n.as_rational()) || n.as_rational() < 0 || n.as_rational() > 64) continue;
          auto& a = it->second.as_array();
          std::size_t want = static_cast<std::size_t>(n.as_rational().get_num().get_si());
          while (a.size() > want) a.pop_back();
          while (a.size() < want) a.push_back(draw(types.at(it->first).element()));
        } else if (lhs.kind() == ExprKind::Select && lhs.arg(0).is_reference()) {
          auto it = in.find(lhs.arg(0).name());
          if (it == in.end() || !it->second.is_array()) continue;
          Value i = eval_spec(lhs.arg(1), in, in, d, f.definitions);
          if (!i.is_rational() || !is_integer(i.as_rational()) || i.as_rational() < 0) continue;
          auto& a = it->second.as_array();
          std::size_t k = static_cast<std::size_t>(i.as_rational().get_num().get_si());
          if (k < a.size()) a[k] = eval_spec(c.arg(1), in, in, d, f.definitions);
        }
      } catch (const std::exception&) {
      }
    }
  };

  std::vector<const TypedParam*> params;
  for (const auto* ps : {&f.statement.constants, &f.statement.frame})
    for (const auto& p : *ps) params.push_back(&p);
  std::vector<TestCase> out;
  for (std::size_t tries = 0; out.size() < count && tries < count * 1000; ++tries) {
    Valuation in;
    for (const auto* p : params) {
      auto it = d.overrides.find(p->name);
      in[p->name] = it != d.overrides.end() ? it->second[pick(it->second.size())] : draw(p->type);
    }
    shape(in);
    if (holds(f.statement.pre, in, in, d, f.definitions)) out.push_back({in, f.statement.post});
  }
  return out;
}

std::size_t EvalReport::verified() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.verified;
  return n;
}

std::size_t EvalReport::tests_all_passed() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.tests_total > 0 && r.tests_passed == r.tests_total;
  return n;
}

std::size_t EvalReport::extended_all_passed() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.extended_total > 0 && r.extended_passed == r.extended_total;
  return n;
}

std::size_t EvalReport::regressions() const {
  std::size_t n = 0;
  for (const auto& r : rows)
    n += r.verified && r.tests_passed == r.tests_total && r.extended_passed < r.extended_total;
  return n;
}

std::string EvalReport::render_table() const {
  std::ostringstream out;
  out << std::left << std::setw(18) << "problem" << std::setw(15) << "outcome" << std::setw(9) << "VCs"
      << std::setw(10) << "tests" << "enlarged\n";
  for (const auto& r : rows) {
    out << std::setw(18) << r.name << std::setw(15) << to_string(r.outcome) << std::setw(9)
        << ratio(r.vcs_proved, r.vcs_total) << std::setw(10) << ratio(r.tests_passed, r.tests_total)
        << ratio(r.extended_passed, r.extended_total);
    if (!r.reason.empty()) out << "  " << r.reason;
    out << "\n";
  }
  out << "verified " << ratio(verified(), rows.size()) << ", tests passed " << ratio(tests_all_passed(), rows.size())
      << ", enlarged tests passed " << ratio(extended_all_passed(), rows.size()) << ", lost after enlarging "
      << regressions() << "\n";
  return out.str();
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"name", r.name},
                  {"outcome", to_string(r.outcome)},
                  {"reason", r.reason},
                  {"verified", r.verified},
                  {"vcs", {{"proved", r.vcs_proved}, {"total", r.vcs_total}}},
                  {"tests", {{"passed", r.tests_passed}, {"total", r.tests_total}}},
                  {"enlarged", {{"passed", r.extended_passed}, {"total", r.extended_total}}}});
  return {{"api", kApiVersion},
          {"rows", rs},
          {"totals",
           {{"problems", rows.size()},
            {"verified", verified()},
            {"tests_passed", tests_all_passed()},
            {"enlarged_passed", extended_all_passed()},
            {"regressions", regressions()}}}};
}

EvalReport run_eval(const std::string& corpus_dir, const Settings& s, const EvalOptions& opt) {
  if (!fs::is_directory(corpus_dir)) throw ConfigError("no corpus directory " + corpus_dir);
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(corpus_dir))
    if (e.is_directory() && fs::exists(e.path() / (e.path().filename().string() + ".spec"))) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());

  EvalReport report;
  for (const auto& dir : dirs) {
    auto started = std::chrono::steady_clock::now();
    EvalRow row;
    row.name = dir.filename().string();
    fs::path base = dir / row.name;
    try {
      std::string spec_text = read_file(base.string() + ".spec");
      TestFile tests = parse_test_file(read_file(base.string() + ".tests"));
      row.tests_total = tests.cases.size();
      auto oracle = make_oracle(opt.oracle, s, base.string() + ".refine");
      RefineRun run = refine_spec(spec_text, *oracle, s);
      row.outcome = run.report.outcome;
      row.reason = run.report.reason;
      for (const auto* ob : run.tree->obligations()) {
        ++row.vcs_total;
        row.vcs_proved += ob->result.status == VcStatus::Proved;
      }
      row.verified = row.outcome == DriveOutcome::FullyRefined && row.vcs_proved == row.vcs_total;
      if (run.program) {
        TestReport t = run_tests(*run.program, tests.cases, run.verifier.domains, {}, run.spec.definitions);
        row.tests_passed = t.passed();
        DomainSpec wide = widened(run.verifier.domains);
        std::vector<TestCase> enlarged = tests.cases;
        std::size_t extra = tests.cases.size() * (opt.enlarge > 0 ? opt.enlarge - 1 : 0);
        for (auto& c : sample_cases(run.spec, wide, extra, opt.seed ^ fnv1a(row.name))) enlarged.push_back(c);
        TestReport e = run_tests(*run.program, enlarged, wide, {}, run.spec.definitions);
        row.extended_total = enlarged.size();
        row.extended_passed = e.passed();
      }
    } catch (const std::exception& e) {
      row.reason = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace refinery
