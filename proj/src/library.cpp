#include "refinery/refinement.hpp"
#include "refinery/spec_analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace refinery {

namespace {

// Holds an exclusive flock on `<dir>/.lock` for its lifetime.
class DirLock {
 public:
  explicit DirLock(const std::string& dir) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    fd_ = ::open((fs::path(dir) / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw LibraryError("cannot open lock file in " + dir);
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw LibraryError("cannot lock " + dir);
    }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

bool valid_name(const std::string& n) {
  if (n.empty() || !(std::isalpha(static_cast<unsigned char>(n[0])) || n[0] == '_')) return false;
  return std::all_of(n.begin(), n.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

nlohmann::json params_json(const std::vector<TypedParam>& ps) {
  auto out = nlohmann::json::array();
  for (const auto& p : ps) out.push_back({{"name", p.name}, {"type", to_string(p.type)}});
  return out;
}

std::vector<TypedParam> params_from(const nlohmann::json& j, ParamRole role) {
  std::string text;
  for (const auto& p : j) text += "(" + p.at("name").get<std::string>() + ":" + p.at("type").get<std::string>() + ")";
  auto ps = parse_params(text);
  for (auto& p : ps) p.role = role;
  return ps;
}

std::vector<ProcedureEntry> load_dir(const std::string& dir) {
  std::vector<ProcedureEntry> out;
  if (dir.empty() || !fs::exists(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(dir))
    if (f.path().extension() == ".json") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      out.push_back(entry_from_json(ss.str()));
    } catch (const std::exception& e) {
      throw LibraryError(f.string() + ": " + e.what());
    }
  }
  return out;
}

// Syntactic match; params are pattern variables bound on first use.
bool match(const SpecExpr& pat, const SpecExpr& e, const std::set<std::string>& vars,
           std::map<std::string, SpecExpr>& bound) {
  if (pat.is_reference() && vars.count(pat.name())) {
    auto it = bound.find(pat.name());
    if (it != bound.end()) return it->second == e;
    if (contains_init(e)) return false;
    bound.emplace(pat.name(), e);
    return true;
  }
  if (pat.kind() != e.kind()) return false;
  switch (pat.kind()) {
    case ExprKind::Num: return pat.number_value() == e.number_value();
    case ExprKind::Bool: return pat.bool_value() == e.bool_value();
    case ExprKind::Var: case ExprKind::Const: return pat.name() == e.name();
    case ExprKind::Forall: case ExprKind::Exists:
      if (pat.name() != e.name() || !(pat.bound_type() == e.bound_type()) || vars.count(pat.name())) return false;
      break;
    case ExprKind::Apply:
      if (pat.name() != e.name()) return false;
      break;
    default: break;
  }
  if (pat.args().size() != e.args().size()) return false;
  for (std::size_t k = 0; k < pat.args().size(); ++k)
    if (!match(pat.arg(k), e.arg(k), vars, bound)) return false;
  return true;
}

bool match_conjuncts(const SpecExpr& pat, const SpecExpr& e, const std::set<std::string>& vars,
                     std::map<std::string, SpecExpr>& bound) {
  auto ps = conjuncts(pat);
  auto es = conjuncts(e);
  if (ps.size() != es.size()) return false;
  for (std::size_t k = 0; k < ps.size(); ++k)
    if (!match(ps[k], es[k], vars, bound)) return false;
  return true;
}

}  // namespace

std::string entry_to_json(const ProcedureEntry& e) {
  nlohmann::json j = {{"name", e.name},
                      {"frame", params_json(e.frame)},
                      {"params", params_json(e.params)},
                      {"definitions", e.definition_texts},
                      {"pre", render_spec_expr(e.pre)},
                      {"post", render_spec_expr(e.post)},
                      {"program", render_program(e.program)}};
  if (!e.provenance.empty()) j["provenance"] = nlohmann::json::parse(e.provenance);
  return j.dump(2);
}

ProcedureEntry entry_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ProcedureEntry e;
  e.name = j.at("name").get<std::string>();
  if (!valid_name(e.name)) throw LibraryError("bad procedure name '" + e.name + "'");
  e.frame = params_from(j.at("frame"), ParamRole::Variant);
  e.params = params_from(j.at("params"), ParamRole::Constant);
  auto defs = std::make_shared<Definitions>();
  if (j.contains("definitions"))
    for (const auto& t : j.at("definitions")) {
      std::string s = t.get<std::string>();
      Definition d = parse_definition(s, e.statement().env(defs));
      (*defs)[d.name] = d;
      e.definition_texts.push_back(s);
    }
  e.definitions = defs;
  Env env = e.statement().env(defs);
  e.pre = parse_formula(j.at("pre").get<std::string>(), env);
  e.post = parse_formula(j.at("post").get<std::string>(), env);
  e.program = normalize(parse_program(j.at("program").get<std::string>()));
  if (j.contains("provenance")) e.provenance = j.at("provenance").dump();
  return e;
}

Library::Library(std::string dir) : dir_(std::move(dir)) { reload(); }

void Library::reload() {
  DirLock lock(dir_.empty() || !fs::exists(dir_) ? "" : dir_);
  entries_ = load_dir(dir_);
}

const ProcedureEntry& Library::save(const SpecTree& tree, const std::string& name,
                                    const std::vector<std::string>& definition_texts) {
  if (tree.status("root") != NodeStatus::Closed)
    throw LibraryError("only a closed tree can be saved (root is " + to_string(tree.status("root")) + ")");
  const SpecStatement& s = tree.root().statement;
  if (contains_init(s.post)) throw LibraryError("a library postcondition cannot mention initial values");
  ProcedureEntry e;
  e.name = name;
  e.frame = s.frame;
  e.params = s.constants;
  e.pre = s.pre;
  e.post = s.post;
  e.program = extract_program(tree, &entries_);
  e.definition_texts = definition_texts;
  e.definitions = tree.definitions();
  e.provenance = tree_to_json(tree);
  if (!valid_name(name)) throw LibraryError("bad procedure name '" + name + "'");

  DirLock lock(dir_);
  if (!dir_.empty()) entries_ = load_dir(dir_);
  for (const auto& other : entries_)
    if (other.name == name) throw LibraryError("procedure '" + name + "' already exists");
  if (!dir_.empty()) {
    fs::path target = fs::path(dir_) / (name + ".json");
    fs::path tmp = fs::path(dir_) / (name + ".json.tmp");
    {
      std::ofstream out(tmp);
      out << entry_to_json(e) << "\n";
      if (!out) throw LibraryError("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
  }
  entries_.push_back(std::move(e));
  return entries_.back();
}

void Library::add(ProcedureEntry e) {
  for (const auto& other : entries_)
    if (other.name == e.name) throw LibraryError("procedure '" + e.name + "' already exists");
  entries_.push_back(std::move(e));
}

std::vector<LibraryMatch> Library::lookup(const SpecStatement& s, const SchemeContext& ctx) const {
  std::vector<LibraryMatch> out;
  SchemeContext local = ctx;
  local.library = &entries_;
  for (const auto& e : entries_) {
    std::set<std::string> vars;
    for (const auto& p : e.params) vars.insert(p.name);
    std::map<std::string, SpecExpr> bound;
    if (!match_conjuncts(e.pre, s.pre, vars, bound) || !match_conjuncts(e.post, s.post, vars, bound)) continue;
    LibraryMatch m{&e, {}, {}, {}};
    bool ok = true;
    for (const auto& p : e.params) {
      auto it = bound.find(p.name);
      if (it == bound.end()) {
        ok = false;
        break;
      }
      try {
        m.args.push_back(spec_to_prog_expr(it->second));
      } catch (const NotExecutable&) {
        ok = false;
        break;
      }
      m.substitution.emplace_back(p.name, it->second);
    }
    if (!ok) continue;
    RefinementLaw law;
    law.kind = LawKind::ProcCall;
    law.entry = e.name;
    law.args = m.args;
    try {
      m.obligations = apply_scheme(s, law, local).obligations;
    } catch (const LawError&) {
      continue;
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace refinery
