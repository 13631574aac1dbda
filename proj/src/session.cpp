#include "refinery/frontends.hpp"

namespace refinery {

namespace {

nlohmann::json result_json(const VcResult& r) {
  nlohmann::json j = {{"status", to_string(r.status)}, {"backend", r.backend}};
  if (r.counterexample) {
    nlohmann::json cex = nlohmann::json::object();
    for (const auto& [k, v] : *r.counterexample) cex[k] = render_value(v);
    j["counterexample"] = cex;
  }
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

VcStatus status_from(const std::string& s) {
  for (VcStatus v : {VcStatus::Pending, VcStatus::Proved, VcStatus::Refuted, VcStatus::Unknown})
    if (to_string(v) == s) return v;
  throw std::runtime_error("unknown obligation status `" + s + "`");
}

VcResult result_from(const nlohmann::json& j) {
  VcResult r;
  r.status = status_from(j.at("status").get<std::string>());
  r.backend = j.value("backend", "");
  r.reason = j.value("reason", "");
  if (j.contains("counterexample")) {
    Valuation v;
    for (const auto& [k, x] : j["counterexample"].items()) v[k] = parse_value(x.get<std::string>());
    r.counterexample = v;
  }
  return r;
}

}  // namespace

nlohmann::json event_to_json(const SessionEvent& e) {
  nlohmann::json j = {{"kind", e.kind}, {"path", e.path}};
  if (!e.text.empty()) j["text"] = e.text;
  if (e.kind == "verify") {
    j["results"] = nlohmann::json::array();
    for (const auto& r : e.results) j["results"].push_back(result_json(r));
  }
  return j;
}

SessionEvent event_from_json(const nlohmann::json& j) {
  SessionEvent e{j.at("kind").get<std::string>(), j.at("path").get<std::string>(), j.value("text", ""), {}};
  if (j.contains("results"))
    for (const auto& r : j["results"]) e.results.push_back(result_from(r));
  return e;
}

Session::Session(std::string id, std::string spec_text, const Settings& settings, const Library* library)
    : id_(std::move(id)), spec_text_(std::move(spec_text)), library_(library) {
  spec_ = parse_spec_file(spec_text_);
  verifier_ = make_verifier(settings, spec_);
  tree_ = std::make_unique<SpecTree>(spec_.statement, spec_.definitions);
}

std::vector<std::string> Session::apply(const std::string& path, const std::string& law_line) {
  SpecTree next = *tree_;
  auto children = next.apply(path, law_line, library_ ? &library_->entries() : nullptr);
  *tree_ = std::move(next);
  events_.push_back({"apply", path, law_line, {}});
  return children;
}

std::vector<VcResult> Session::verify(const std::string& path) {
  SpecTree next = *tree_;
  next.verify(path, verifier_);
  std::vector<VcResult> all;
  for (const auto& ob : next.node(path).obligations) all.push_back(ob.result);
  *tree_ = std::move(next);
  events_.push_back({"verify", path, "", all});
  return all;
}

void Session::backtrack(const std::string& path, const std::string& reason) {
  SpecTree next = *tree_;
  next.backtrack(path, reason);
  *tree_ = std::move(next);
  events_.push_back({"backtrack", path, reason, {}});
}

LawProposal Session::suggest(const std::string& path, Oracle& oracle) const {
  if (tree_->node(path).law) throw NodeNotOpen("node " + path + " already has a law");
  OracleContext ctx = make_context(*tree_, path, library_, verifier_.domains, 0);
  return oracle.propose(ctx);
}

Statement Session::program() const { return extract_program(*tree_, library_ ? &library_->entries() : nullptr); }

nlohmann::json Session::snapshot() const {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : events_) ev.push_back(event_to_json(e));
  return {{"api", kApiVersion}, {"id", id_}, {"spec", spec_text_}, {"events", ev}};
}

std::unique_ptr<Session> Session::restore(const nlohmann::json& snap, const Settings& settings, const Library* library) {
  auto s = std::make_unique<Session>(snap.at("id").get<std::string>(), snap.at("spec").get<std::string>(), settings,
                                     library);
  for (const auto& j : snap.at("events")) s->events_.push_back(event_from_json(j));
  *s->tree_ = replay(s->spec_text_, s->events_, library);
  return s;
}

SpecTree Session::replay(const std::string& spec_text, const std::vector<SessionEvent>& events, const Library* library) {
  SpecFile f = parse_spec_file(spec_text);
  SpecTree t(f.statement, f.definitions);
  for (const auto& e : events) {
    if (e.kind == "apply") {
      t.apply(e.path, e.text, library ? &library->entries() : nullptr);
    } else if (e.kind == "verify") {
      // Results decided by an earlier verify are logged again; only Pending ones change.
      const auto& obs = t.node(e.path).obligations;
      for (std::size_t k = 0; k < e.results.size() && k < obs.size(); ++k)
        if (obs[k].result.status == VcStatus::Pending) t.set_result(e.path, k, e.results[k]);
    } else if (e.kind == "backtrack") {
      t.backtrack(e.path, e.text);
    } else {
      throw std::runtime_error("unknown event kind `" + e.kind + "`");
    }
  }
  return t;
}

}  // namespace refinery
