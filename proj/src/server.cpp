#include "refinery/frontends.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace refinery {

namespace {

struct ApiError {
  int status;
  std::string error;
  std::string details;
};

void reply(httplib::Response& res, int status, nlohmann::json body) {
  body["api"] = kApiVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Empty bodies are allowed for endpoints without parameters.
nlohmann::json request_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw ApiError{400, "body is not JSON", e.what()};
  }
  if (!j.is_object()) throw ApiError{400, "body must be a JSON object", ""};
  if (!j.contains("api") || j["api"] != kApiVersion)
    throw ApiError{400, "unsupported api version", "send \"api\": " + std::to_string(kApiVersion)};
  return j;
}

std::string string_field(const nlohmann::json& j, const std::string& key, bool required = true) {
  if (!j.contains(key)) {
    if (required) throw ApiError{400, "missing field `" + key + "`", ""};
    return "";
  }
  if (!j[key].is_string()) throw ApiError{400, "field `" + key + "` must be a string", ""};
  return j[key].get<std::string>();
}

nlohmann::json results_json(const std::vector<ProofObligation>& obs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& ob : obs) {
    nlohmann::json j = {{"label", ob.label}, {"status", to_string(ob.result.status)}, {"backend", ob.result.backend}};
    if (ob.result.counterexample) j["counterexample"] = render_valuation(*ob.result.counterexample);
    if (!ob.result.reason.empty()) j["reason"] = ob.result.reason;
    out.push_back(j);
  }
  return out;
}

nlohmann::json tree_body(const Session& s) {
  auto open = s.tree().leftmost_open();
  return {{"id", s.id()},
          {"name", s.spec().name},
          {"tree", nlohmann::json::parse(tree_to_json(s.tree()))},
          {"open", open ? nlohmann::json(*open) : nlohmann::json(nullptr)}};
}

}  // namespace

SessionServer::SessionServer(Settings settings, ServerOptions options)
    : settings_(std::move(settings)), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  if (!settings_.library_dir.empty()) library_ = std::make_unique<Library>(settings_.library_dir);
  if (!options_.state_dir.empty()) {
    fs::create_directories(options_.state_dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(options_.state_dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      std::ifstream in(p);
      auto s = Session::restore(nlohmann::json::parse(in), settings_, library_.get());
      std::string id = s->id();
      if (id.size() > 1 && id[0] == 's') next_id_ = std::max<unsigned>(next_id_, std::stoul(id.substr(1)) + 1);
      sessions_[id] = std::move(s);
    }
  }
  routes();
}

SessionServer::~SessionServer() = default;

int SessionServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

void SessionServer::listen() { http_->listen_after_bind(); }
void SessionServer::stop() { http_->stop(); }
void SessionServer::wait_until_ready() { http_->wait_until_ready(); }

std::shared_ptr<Session> SessionServer::find(const std::string& id) {
  std::lock_guard<std::mutex> lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ApiError{404, "unknown session", id};
  return it->second;
}

void SessionServer::persist(const Session& s) {
  if (options_.state_dir.empty()) return;
  fs::path final_path = fs::path(options_.state_dir) / (s.id() + ".json");
  fs::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << s.snapshot().dump(1) << "\n";
  }
  fs::rename(tmp, final_path);
}

void SessionServer::routes() {
  auto& srv = *http_;
  if (!options_.static_dir.empty()) srv.set_mount_point("/", options_.static_dir);

  // Wraps a handler with the error mapping shared by every endpoint.
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const ApiError& e) {
        reply(res, e.status, {{"error", e.error}, {"details", e.details}});
      } catch (const NodeNotOpen& e) {
        reply(res, 409, {{"error", "node not open"}, {"details", e.what()}});
      } catch (const ExtractionError& e) {
        reply(res, 409, {{"error", "tree not closed"}, {"details", e.what()}});
      } catch (const TreeError& e) {
        reply(res, 409, {{"error", "tree state"}, {"details", e.what()}});
      } catch (const LawError& e) {
        reply(res, 422, {{"error", "ill-typed proposal"}, {"details", e.what()}});
      } catch (const SpecFileError& e) {
        reply(res, 422, {{"error", "specification does not parse"}, {"details", e.what()}, {"line", e.line()}});
      } catch (const IllTypedProposal& e) {
        reply(res, 422, {{"error", "oracle proposal is ill-typed"}, {"line", e.line()}, {"details", e.details()}});
      } catch (const NoProposalFound& e) {
        reply(res, 422, {{"error", "oracle has no proposal"}, {"details", e.what()}});
      } catch (const OracleExhausted& e) {
        reply(res, 422, {{"error", "oracle has no proposal"}, {"details", e.what()}});
      } catch (const OracleTransportError& e) {
        reply(res, 502, {{"error", "oracle unavailable"}, {"details", e.what()}});
      } catch (const SolverMisconfigured& e) {
        reply(res, 503, {{"error", "solver misconfigured"}, {"details", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", "internal error"}, {"details", e.what()}});
      }
    };
  };

  // Caller holds the session lock.
  auto node_of = [](const Session& s, const std::string& path) {
    if (!s.tree().has(path)) throw ApiError{404, "unknown node", path};
  };

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto body = request_body(req);
    std::string spec = string_field(body, "spec");
    std::string id = "s" + std::to_string(next_id_++);
    auto s = std::make_shared<Session>(id, spec, settings_, library_.get());
    {
      std::lock_guard<std::mutex> lock(sessions_mu_);
      sessions_[id] = s;
    }
    persist(*s);
    reply(res, 201, tree_body(*s));
  }));

  srv.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json ids = nlohmann::json::array();
    std::lock_guard<std::mutex> lock(sessions_mu_);
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    reply(res, 200, {{"sessions", ids}});
  }));

  srv.Get(R"(/sessions/([^/]+)/tree)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    std::shared_lock lock(s->mutex);
    reply(res, 200, tree_body(*s));
  }));

  srv.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    std::shared_lock lock(s->mutex);
    reply(res, 200, s->snapshot());
  }));

  srv.Get(R"(/sessions/([^/]+)/program)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto s = find(req.matches[1]);
    std::shared_lock lock(s->mutex);
    reply(res, 200, {{"id", s->id()}, {"program", render_program(s->program())}});
  }));

  srv.Post(R"(/sessions/([^/]+)/nodes/([^/]+)/apply)",
           guarded([this, node_of](const httplib::Request& req, httplib::Response& res) {
             auto body = request_body(req);
             auto s = find(req.matches[1]);
             std::string path = req.matches[2];
             std::string law = string_field(body, "law");
             std::unique_lock lock(s->mutex);
             node_of(*s, path);
             auto children = s->apply(path, law);
             persist(*s);
             auto out = tree_body(*s);
             out["children"] = children;
             out["obligations"] = results_json(s->tree().node(path).obligations);
             reply(res, 200, out);
           }));

  srv.Post(R"(/sessions/([^/]+)/nodes/([^/]+)/verify)",
           guarded([this, node_of](const httplib::Request& req, httplib::Response& res) {
             request_body(req);
             auto s = find(req.matches[1]);
             std::string path = req.matches[2];
             std::unique_lock lock(s->mutex);
             node_of(*s, path);
             if (!s->tree().node(path).law) throw ApiError{409, "node has no law to verify", path};
             s->verify(path);
             persist(*s);
             auto out = tree_body(*s);
             out["obligations"] = results_json(s->tree().node(path).obligations);
             out["status"] = to_string(s->tree().status(path));
             reply(res, 200, out);
           }));

  srv.Post(R"(/sessions/([^/]+)/nodes/([^/]+)/backtrack)",
           guarded([this, node_of](const httplib::Request& req, httplib::Response& res) {
             auto body = request_body(req);
             auto s = find(req.matches[1]);
             std::string path = req.matches[2];
             std::string reason = string_field(body, "reason", false);
             std::unique_lock lock(s->mutex);
             node_of(*s, path);
             s->backtrack(path, reason.empty() ? "backtracked by user" : reason);
             persist(*s);
             reply(res, 200, tree_body(*s));
           }));

  srv.Post(R"(/sessions/([^/]+)/nodes/([^/]+)/suggest)",
           guarded([this, node_of](const httplib::Request& req, httplib::Response& res) {
             auto body = request_body(req);
             auto s = find(req.matches[1]);
             std::string path = req.matches[2];
             std::string kind = string_field(body, "oracle", false);
             if (kind.empty()) kind = settings_.oracle;
             if (kind != "heuristic" && kind != "remote")
               throw ApiError{400, "suggest supports the heuristic and remote oracles", kind};
             auto oracle = make_oracle(kind, settings_);
             std::shared_lock lock(s->mutex);
             node_of(*s, path);
             LawProposal p = s->suggest(path, *oracle);
             reply(res, 200,
                   {{"path", path},
                    {"oracle", oracle->name()},
                    {"law", p.text},
                    {"kind", to_string(p.law.kind)},
                    {"rationale", p.rationale}});
           }));
}

}  // namespace refinery
