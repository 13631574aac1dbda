#include "refinery/oracle.hpp"
#include "refinery/spec_analysis.hpp"

#include <fstream>
#include <sstream>

namespace refinery {

namespace {

std::string trim(std::string_view s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

std::string params_text(const std::vector<TypedParam>& ps) {
  std::string out;
  for (const auto& p : ps) out += (out.empty() ? "" : ", ") + p.name + ":" + to_string(p.type);
  return out;
}

// Strips list markers, backticks and a leading "law:" so that chatty
// replies like "1. `assign x := 0`" still parse.
std::string clean_line(std::string line) {
  line = trim(line);
  while (!line.empty() && (line.front() == '`' || line.front() == '*' || line.front() == '>')) line.erase(0, 1);
  while (!line.empty() && (line.back() == '`' || line.back() == '*')) line.pop_back();
  line = trim(line);
  if (line.size() > 2 && line[0] == '-' && line[1] == ' ') line = trim(line.substr(2));
  std::size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') && line[digits + 1] == ' ')
    line = trim(line.substr(digits + 2));
  for (std::string prefix : {"law:", "Law:", "LAW:"})
    if (line.rfind(prefix, 0) == 0) line = trim(line.substr(prefix.size()));
  while (!line.empty() && line.front() == '`') line.erase(0, 1);
  while (!line.empty() && line.back() == '`') line.pop_back();
  return trim(line);
}

}  // namespace

OracleContext make_context(const SpecTree& tree, const std::string& path, const Library* library,
                           const DomainSpec& domains, int remaining) {
  const RefineNode& n = tree.node(path);
  OracleContext ctx;
  ctx.path = path;
  ctx.statement = n.statement;
  ctx.env = tree.env(path);
  ctx.constant_context = tree.constant_context();
  ctx.domains = domains;
  ctx.history = n.history;
  ctx.remaining = remaining;
  if (library) {
    SchemeContext sc;
    sc.definitions = tree.definitions();
    sc.constant_context = tree.constant_context();
    sc.origin = path;
    for (const auto& m : library->lookup(n.statement, sc)) {
      const ProcedureEntry& e = *m.entry;
      ctx.library_hints.push_back(e.name + "(" + params_text(e.params) + ") changes " + e.statement().render());
      std::string args;
      for (const auto& a : m.args) args += (args.empty() ? "" : ", ") + render_prog_expr(a);
      ctx.library_calls.push_back("call " + e.name + "(" + args + ")");
    }
  }
  return ctx;
}

std::string law_catalog() {
  return "  skip\n"
         "      verify pre => post\n"
         "  seq mid: M\n"
         "      new specifications [pre, M]; [M, post]\n"
         "  assign x := E, y := F\n"
         "      verify pre => post<x := E, y := F>\n"
         "  ifelse G: E\n"
         "      new specifications if E: [pre /\\ G, post] else: [pre /\\ ~G, post]\n"
         "  iterate I: F G: E V: T [mode: flexible]\n"
         "      new specifications [pre, I]; while E: [I /\\ G, I /\\ 0 <= T < T_0]; verify I /\\ ~G => post\n"
         "  traverse l i m: T n: U P: F\n"
         "      new specifications [pre, P(l, m)]; i = m; while i < n: ([P(l, i), P(l, i+1)]; i = i + 1)\n"
         "Also available: `follow x := E` (assignment after a new specification [pre, post<x := E>]), "
         "`flexseq A: F B: F C: F D: F`, `expand (y:T) init: E` (new local variable), "
         "`call f(args)` (library procedure).\n";
}

std::string build_prompt(const OracleContext& ctx) {
  const SpecStatement& s = ctx.statement;
  std::ostringstream out;
  out << "Refine the specification below into code by choosing one refinement law.\n\n";
  out << "Specification at node " << ctx.path << ":\n";
  out << "  variables: " << params_text(s.frame) << "\n";
  if (!s.constants.empty()) out << "  constants: " << params_text(s.constants) << "\n";
  out << "  pre: " << render_spec_expr(s.pre) << "\n";
  out << "  post: " << render_spec_expr(s.post) << "\n";
  if (!ctx.constant_context.empty()) {
    out << "  assumptions:";
    for (const auto& c : ctx.constant_context) out << " " << render_spec_expr(c) << ";";
    out << "\n";
  }
  out << "Names ending in _0 denote initial values.\n\n";
  out << "Laws (the line you write, then what will be checked):\n" << law_catalog();
  if (!ctx.library_hints.empty()) {
    out << "\nVerified library procedures matching this specification:\n";
    for (std::size_t k = 0; k < ctx.library_hints.size(); ++k)
      out << "  " << ctx.library_hints[k] << "\n      use: " << ctx.library_calls[k] << "\n";
  }
  if (!ctx.history.empty()) {
    out << "\nPrevious failures at this node (do not repeat them):\n";
    for (std::size_t k = 0; k < ctx.history.size(); ++k)
      out << "  " << k + 1 << ". " << ctx.history[k].law << "\n     " << ctx.history[k].reason << "\n";
  }
  out << "\nAttempts left at this node: " << ctx.remaining << "\n";
  out << "Answer with exactly one law line in the syntax above, using the declared names; "
         "a second line may give a short rationale.\n";
  return out.str();
}

LawProposal parse_proposal(std::string_view reply, const OracleContext& ctx) {
  std::istringstream in{std::string(reply)};
  std::string raw;
  std::optional<IllTypedProposal> first_error;
  std::vector<std::string> others;
  std::optional<LawProposal> found;
  while (std::getline(in, raw)) {
    std::string line = clean_line(raw);
    if (line.empty() || line.rfind("```", 0) == 0) continue;
    if (found || !looks_like_law(line)) {
      if (found) others.push_back(line);
      continue;
    }
    try {
      RefinementLaw law = parse_law(line, ctx.env);
      found = LawProposal{law, render_law(law), "", std::string(reply)};
    } catch (const std::exception& e) {
      if (!first_error) first_error.emplace(line, e.what());
    }
  }
  if (found) {
    for (const auto& o : others) found->rationale += (found->rationale.empty() ? "" : " ") + o;
    return *found;
  }
  if (first_error) throw *first_error;
  throw NoProposalFound("no law line in reply");
}

ScriptedOracle::ScriptedOracle(std::string_view script) {
  std::istringstream in{std::string(script)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '@') {
      auto sp = line.find_first_of(" \t");
      if (sp == std::string::npos) throw OracleExhausted("script line '" + line + "' has no law");
      keyed_[line.substr(1, sp - 1)].push_back(trim(line.substr(sp)));
    } else {
      general_.push_back(line);
    }
  }
}

ScriptedOracle ScriptedOracle::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ScriptedOracle(ss.str());
}

std::size_t ScriptedOracle::remaining() const {
  std::size_t n = general_.size() - cursor_;
  for (const auto& [path, lines] : keyed_) {
    auto it = keyed_cursor_.find(path);
    n += lines.size() - (it == keyed_cursor_.end() ? 0 : it->second);
  }
  return n;
}

LawProposal ScriptedOracle::propose(const OracleContext& ctx) {
  std::string line;
  auto it = keyed_.find(ctx.path);
  std::size_t& kc = keyed_cursor_[ctx.path];
  if (it != keyed_.end() && kc < it->second.size()) {
    line = it->second[kc++];
  } else if (cursor_ < general_.size()) {
    line = general_[cursor_++];
  } else {
    throw OracleExhausted("script exhausted at node " + ctx.path);
  }
  LawProposal p = parse_proposal(line, ctx);
  p.rationale = "script";
  return p;
}

}  // namespace refinery
