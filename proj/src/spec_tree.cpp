#include "refinery/refinement.hpp"
#include "refinery/spec_analysis.hpp"

#include <json.hpp>

#include <functional>

namespace refinery {

std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "open";
    case NodeStatus::Refined: return "refined";
    case NodeStatus::Closed: return "closed";
    case NodeStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

std::string child_path(const std::string& parent, std::size_t k) {
  return parent == "root" ? std::to_string(k) : parent + "." + std::to_string(k);
}

void assigned_names(const Statement& s, std::set<std::string>& out) {
  if (s.kind == Statement::Kind::Assign) out.insert(s.name);
  for (const auto& b : s.body) assigned_names(b, out);
  for (const auto& b : s.orelse) assigned_names(b, out);
}

}  // namespace

SpecTree::SpecTree(SpecStatement root, std::shared_ptr<const Definitions> defs) : defs_(std::move(defs)) {
  std::set<std::string> constants;
  for (const auto& p : root.constants) constants.insert(p.name);
  for (const auto& c : conjuncts(root.pre)) {
    if (contains_init(c)) continue;
    bool only_constants = true;
    for (const auto& n : free_vars(c)) only_constants = only_constants && constants.count(n);
    if (only_constants && !(c.kind() == ExprKind::Bool)) context_.push_back(c);
  }
  RefineNode n;
  n.path = "root";
  n.statement = std::move(root);
  nodes_.emplace("root", std::move(n));
}

const RefineNode& SpecTree::node(const std::string& path) const {
  auto it = nodes_.find(path);
  if (it == nodes_.end()) throw TreeError("no node '" + path + "'");
  return it->second;
}

RefineNode& SpecTree::mut(const std::string& path) {
  auto it = nodes_.find(path);
  if (it == nodes_.end()) throw TreeError("no node '" + path + "'");
  return it->second;
}

std::vector<std::string> SpecTree::paths() const {
  std::vector<std::string> out;
  std::vector<std::string> stack{"root"};
  while (!stack.empty()) {
    std::string p = stack.back();
    stack.pop_back();
    out.push_back(p);
    const auto& kids = node(p).children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

Env SpecTree::env(const std::string& path) const { return node(path).statement.env(defs_); }

NodeStatus SpecTree::status(const std::string& path) const {
  const RefineNode& n = node(path);
  if (!n.law) return NodeStatus::Open;
  bool proved = true;
  for (const auto& ob : n.obligations) {
    if (ob.result.status == VcStatus::Refuted || ob.result.status == VcStatus::Unknown) return NodeStatus::Failed;
    proved = proved && ob.result.status == VcStatus::Proved;
  }
  for (const auto& c : n.children) proved = proved && status(c) == NodeStatus::Closed;
  return proved ? NodeStatus::Closed : NodeStatus::Refined;
}

std::optional<std::string> SpecTree::leftmost_open() const {
  for (const auto& p : paths())
    if (!node(p).law) return p;
  return std::nullopt;
}

std::vector<std::string> SpecTree::apply(const std::string& path, const RefinementLaw& law,
                                         const std::vector<ProcedureEntry>* library) {
  RefineNode& n = mut(path);
  if (n.law) throw NodeNotOpen("node " + path + " is not open");
  SchemeContext ctx;
  ctx.definitions = defs_;
  ctx.constant_context = context_;
  ctx.library = library;
  ctx.origin = path;
  for (const auto& [p, other] : nodes_) {
    for (const auto& q : other.statement.frame) ctx.reserved.insert(q.name);
    for (const auto& q : other.statement.constants) ctx.reserved.insert(q.name);
    assigned_names(other.code, ctx.reserved);
  }
  RefinementStep step = apply_scheme(n.statement, law, ctx);
  n.law = law;
  n.law_text = render_law(law);
  n.code = step.code;
  n.obligations = std::move(step.obligations);
  n.procedures = std::move(step.procedures);
  std::vector<std::string> kids;
  for (std::size_t k = 0; k < step.children.size(); ++k) {
    RefineNode c;
    c.path = child_path(path, k + 1);
    c.parent = path;
    c.statement = std::move(step.children[k]);
    kids.push_back(c.path);
    nodes_[c.path] = std::move(c);
  }
  mut(path).children = kids;
  return kids;
}

std::vector<std::string> SpecTree::apply(const std::string& path, std::string_view law_line,
                                         const std::vector<ProcedureEntry>* library) {
  if (node(path).law) throw NodeNotOpen("node " + path + " is not open");
  return apply(path, parse_law(law_line, env(path)), library);
}

std::vector<VcResult> SpecTree::verify(const std::string& path, const VerifierConfig& cfg) {
  RefineNode& n = mut(path);
  std::vector<VcResult> out;
  for (auto& ob : n.obligations) {
    if (ob.result.status != VcStatus::Pending) continue;
    ob.result = check(ob, cfg);
    out.push_back(ob.result);
  }
  return out;
}

void SpecTree::set_result(const std::string& path, std::size_t obligation, const VcResult& r) {
  RefineNode& n = mut(path);
  if (obligation >= n.obligations.size()) throw TreeError("no obligation " + std::to_string(obligation));
  if (n.obligations[obligation].result.status != VcStatus::Pending) throw TreeError("obligation already decided");
  n.obligations[obligation].result = r;
}

void SpecTree::erase_subtree(const std::string& path) {
  for (const auto& c : node(path).children) erase_subtree(c);
  if (path != "root") nodes_.erase(path);
}

void SpecTree::backtrack(const std::string& path, const std::string& reason) {
  RefineNode& n = mut(path);
  if (!n.law) throw TreeError("node " + path + " has no law to undo");
  for (const auto& c : n.children) erase_subtree(c);
  n.history.push_back({n.law_text, reason});
  n.law.reset();
  n.law_text.clear();
  n.children.clear();
  n.code = Statement::pass();
  n.obligations.clear();
  n.procedures.clear();
}

void SpecTree::record_failure(const std::string& path, FailureRecord f) {
  RefineNode& n = mut(path);
  if (n.law) throw NodeNotOpen("node " + path + " is not open");
  n.history.push_back(std::move(f));
}

std::vector<const ProofObligation*> SpecTree::obligations() const {
  std::vector<const ProofObligation*> out;
  for (const auto& p : paths())
    for (const auto& ob : node(p).obligations) out.push_back(&ob);
  return out;
}

// Extraction ----------------------------------------------------------------------

namespace {

Statement splice(const SpecTree& tree, const std::string& path, std::set<std::string>& procs) {
  const RefineNode& n = tree.node(path);
  if (!n.law) throw ExtractionError("node " + path + " is still open");
  for (const auto& p : n.procedures) procs.insert(p);
  std::function<Statement(const Statement&)> fill = [&](const Statement& s) -> Statement {
    if (s.kind == Statement::Kind::Hole) {
      if (s.hole < 1 || static_cast<std::size_t>(s.hole) > n.children.size())
        throw ExtractionError("node " + path + " has no child " + std::to_string(s.hole));
      return splice(tree, n.children[s.hole - 1], procs);
    }
    Statement out = s;
    for (auto& b : out.body) b = fill(b);
    for (auto& b : out.orelse) b = fill(b);
    return out;
  };
  return fill(n.code);
}

}  // namespace

Statement extract_program(const SpecTree& tree, const std::vector<ProcedureEntry>* library, bool allow_unverified) {
  if (!allow_unverified && tree.status("root") != NodeStatus::Closed)
    throw ExtractionError("the root is " + to_string(tree.status("root")) + ", not closed");
  std::set<std::string> procs;
  Statement body = splice(tree, "root", procs);
  std::vector<Statement> items;
  for (const auto& name : procs) {
    const ProcedureEntry* entry = nullptr;
    if (library)
      for (const auto& e : *library)
        if (e.name == name) entry = &e;
    if (!entry) throw ExtractionError("procedure " + name + " is not in the library");
    std::vector<ProcParam> params;
    for (const auto& p : entry->params) params.push_back({p.name, p.type});
    items.push_back(Statement::def(entry->name, params, entry->program));
  }
  items.push_back(body);
  return normalize(Statement::seq(items));
}

// JSON ------------------------------------------------------------------------------

namespace {

nlohmann::json params_json(const std::vector<TypedParam>& ps) {
  auto out = nlohmann::json::array();
  for (const auto& p : ps) out.push_back({{"name", p.name}, {"type", to_string(p.type)}});
  return out;
}

nlohmann::json valuation_json(const Valuation& v) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, val] : v) out[k] = render_value(val);
  return out;
}

}  // namespace

std::string tree_to_json(const SpecTree& tree, int indent) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& path : tree.paths()) {
    const RefineNode& n = tree.node(path);
    nlohmann::json obs = nlohmann::json::array();
    for (std::size_t k = 0; k < n.obligations.size(); ++k) {
      const auto& ob = n.obligations[k];
      nlohmann::json o = {{"index", k},
                          {"label", ob.label},
                          {"hypothesis", render_spec_expr(ob.hypothesis)},
                          {"conclusion", render_spec_expr(ob.conclusion)},
                          {"status", to_string(ob.result.status)},
                          {"backend", ob.result.backend}};
      if (ob.result.counterexample) o["counterexample"] = valuation_json(*ob.result.counterexample);
      if (!ob.result.reason.empty()) o["reason"] = ob.result.reason;
      obs.push_back(o);
    }
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : n.history) hist.push_back({{"law", h.law}, {"reason", h.reason}});
    nlohmann::json j = {{"path", n.path},
                        {"parent", n.parent},
                        {"status", to_string(tree.status(path))},
                        {"frame", params_json(n.statement.frame)},
                        {"constants", params_json(n.statement.constants)},
                        {"pre", render_spec_expr(n.statement.pre)},
                        {"post", render_spec_expr(n.statement.post)},
                        {"law", n.law ? nlohmann::json(n.law_text) : nlohmann::json(nullptr)},
                        {"children", n.children},
                        {"code", n.law ? render_program(n.code) : ""},
                        {"obligations", obs},
                        {"history", hist}};
    nodes.push_back(j);
  }
  nlohmann::json ctx = nlohmann::json::array();
  for (const auto& c : tree.constant_context()) ctx.push_back(render_spec_expr(c));
  nlohmann::json out = {{"root", "root"}, {"status", to_string(tree.status("root"))}, {"constant_context", ctx},
                        {"nodes", nodes}};
  return out.dump(indent);
}

}  // namespace refinery
