#include "refinery/refinement.hpp"
#include "refinery/spec_analysis.hpp"

#include <sstream>

namespace refinery {

Env SpecStatement::env(std::shared_ptr<const Definitions> defs) const {
  std::vector<TypedParam> ps;
  for (auto p : constants) {
    p.role = ParamRole::Constant;
    ps.push_back(p);
  }
  for (auto p : frame) {
    p.role = ParamRole::Variant;
    ps.push_back(p);
  }
  return Env(std::move(ps), std::move(defs));
}

bool SpecStatement::in_frame(const std::string& name) const {
  for (const auto& p : frame)
    if (p.name == name) return true;
  return false;
}

std::string SpecStatement::render() const {
  std::string names;
  for (const auto& p : frame) names += (names.empty() ? "" : ", ") + p.name;
  return names + ": [" + render_spec_expr(pre) + ", " + render_spec_expr(post) + "]";
}

namespace {

std::string trim(std::string_view s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

struct Section {
  std::string key;
  std::string value;
  int line;
};

}  // namespace

SpecFile parse_spec_file(std::string_view text) {
  std::vector<Section> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if ((raw.front() == ' ' || raw.front() == '\t') && !sections.empty()) {
      sections.back().value += " " + line;
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) throw SpecFileError("expected 'section: value'", line_no);
    sections.push_back({trim(line.substr(0, colon)), trim(line.substr(colon + 1)), line_no});
  }

  SpecFile f;
  auto defs = std::make_shared<Definitions>();
  const Section* pre = nullptr;
  const Section* post = nullptr;
  for (const auto& s : sections) {
    try {
      if (s.key == "name") {
        f.name = s.value;
      } else if (s.key == "constants" || s.key == "variants") {
        for (auto p : parse_params(s.value)) {
          p.role = s.key == "constants" ? ParamRole::Constant : ParamRole::Variant;
          (s.key == "constants" ? f.statement.constants : f.statement.frame).push_back(p);
        }
      } else if (s.key == "define") {
        Env env = f.statement.env(defs);
        Definition d = parse_definition(s.value, env);
        if (defs->count(d.name)) throw SpecFileError("duplicate definition " + d.name, s.line);
        (*defs)[d.name] = d;
        f.definition_texts.push_back(s.value);
      } else if (s.key == "pre") {
        pre = &s;
      } else if (s.key == "post") {
        post = &s;
      } else if (s.key == "domain") {
        f.domains.apply_directive(s.value);
        f.domain_directives.push_back(s.value);
      } else {
        throw SpecFileError("unknown section '" + s.key + "'", s.line);
      }
    } catch (const SpecFileError&) {
      throw;
    } catch (const std::exception& err) {
      throw SpecFileError(err.what(), s.line);
    }
  }
  std::set<std::string> seen;
  for (const auto& p : f.statement.constants)
    if (!seen.insert(p.name).second) throw SpecFileError("duplicate name " + p.name, 0);
  for (const auto& p : f.statement.frame)
    if (!seen.insert(p.name).second) throw SpecFileError("duplicate name " + p.name, 0);
  if (!post) throw SpecFileError("missing 'post:' section", line_no);
  f.definitions = defs;
  Env env = f.statement.env(defs);
  auto formula = [&](const Section* s, bool allow_init) {
    try {
      SpecExpr e = parse_formula(s->value, env);
      if (!allow_init && contains_init(e)) throw SpecFileError("initial values are not allowed in a precondition", s->line);
      return e;
    } catch (const SpecFileError&) {
      throw;
    } catch (const std::exception& err) {
      throw SpecFileError(err.what(), s->line);
    }
  };
  f.statement.pre = pre ? formula(pre, false) : SpecExpr::boolean(true);
  f.statement.post = formula(post, true);
  return f;
}

std::string render_spec_file(const SpecFile& f) {
  std::string out;
  if (!f.name.empty()) out += "name: " + f.name + "\n";
  if (!f.statement.constants.empty()) out += "constants: " + render_params(f.statement.constants) + "\n";
  out += "variants: " + render_params(f.statement.frame) + "\n";
  for (const auto& d : f.definition_texts) out += "define: " + d + "\n";
  out += "pre: " + render_spec_expr(f.statement.pre) + "\n";
  out += "post: " + render_spec_expr(f.statement.post) + "\n";
  for (const auto& d : f.domain_directives) out += "domain: " + d + "\n";
  return out;
}

}  // namespace refinery
