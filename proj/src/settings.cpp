#include "refinery/frontends.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace refinery {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const std::string& key) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) throw ConfigError("`" + key + "` must be a list of strings");
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) throw ConfigError("`" + key + "` must be a list of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

template <class T>
T number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("`" + key + "` must be a number");
  return j.get<T>();
}

std::string text(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("`" + key + "` must be a string");
  return j.get<std::string>();
}

void check_backends(const std::vector<std::string>& order) {
  if (order.empty()) throw ConfigError("backend order is empty");
  for (const auto& b : order)
    if (b != "smt" && b != "bounded") throw ConfigError("unknown backend `" + b + "` (expected smt or bounded)");
}

bool solver_answers(const SmtConfig& cfg) {
  static std::mutex mu;
  static std::map<std::string, bool> seen;
  std::string key = smt_command(cfg);
  std::lock_guard<std::mutex> lock(mu);
  auto it = seen.find(key);
  if (it != seen.end()) return it->second;
  return seen[key] = smt_available(cfg);
}

}  // namespace

Settings parse_settings(const std::string& json_text, Settings s) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "solver") {
      s.solver = text(v, key);
      s.solver_explicit = true;
    } else if (key == "solver_timeout") {
      s.solver_timeout = number<double>(v, key);
    } else if (key == "backends") {
      s.backends = string_list(v, key);
      check_backends(s.backends);
    } else if (key == "domains") {
      s.domains = string_list(v, key);
      DomainSpec probe;
      for (const auto& d : s.domains) probe.apply_directive(d);
    } else if (key == "retries") {
      s.limits.retries = number<int>(v, key);
      if (s.limits.retries < 1) throw ConfigError("`retries` must be at least 1");
    } else if (key == "max_nodes") {
      s.limits.max_nodes = number<std::size_t>(v, key);
    } else if (key == "max_attempts") {
      s.limits.max_attempts = number<std::size_t>(v, key);
    } else if (key == "accept_unknown") {
      if (!v.is_boolean()) throw ConfigError("`accept_unknown` must be true or false");
      s.limits.accept_unknown = v.get<bool>();
    } else if (key == "library") {
      s.library_dir = text(v, key);
    } else if (key == "oracle") {
      s.oracle = text(v, key);
    } else if (key == "llm") {
      if (!v.is_object()) throw ConfigError("`llm` must be an object");
      for (const auto& [k, x] : v.items()) {
        if (k == "url") s.llm.url = text(x, "llm.url");
        else if (k == "key") s.llm.key = text(x, "llm.key");
        else if (k == "model") s.llm.model = text(x, "llm.model");
        else if (k == "temperature") s.llm.temperature = number<double>(x, "llm.temperature");
        else if (k == "timeout") s.llm.timeout_seconds = number<int>(x, "llm.timeout");
        else throw ConfigError("unknown key `llm." + k + "`");
      }
    } else {
      throw ConfigError("unknown key `" + key + "`");
    }
  }
  return s;
}

Settings load_settings(const std::string& path, Settings base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_settings(ss.str(), std::move(base));
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_env(Settings& s) {
  if (const char* c = std::getenv("REFINERY_SMT_CMD"); c && *c) {
    s.solver = c;
    s.solver_explicit = true;
  }
  RemoteConfig env = RemoteConfig::from_env();
  if (!env.url.empty()) s.llm.url = env.url;
  if (!env.key.empty()) s.llm.key = env.key;
  if (std::getenv("REFINERY_LLM_MODEL")) s.llm.model = env.model;
}

DomainSpec effective_domains(const Settings& s, const SpecFile& f) {
  DomainSpec d;
  for (const auto& x : s.domains) d.apply_directive(x);
  for (const auto& x : f.domain_directives) d.apply_directive(x);
  return d;
}

VerifierConfig make_verifier(const Settings& s, const SpecFile& f, std::string* warning) {
  check_backends(s.backends);
  VerifierConfig cfg;
  cfg.order = s.backends;
  cfg.smt.command = s.solver;
  cfg.smt.timeout_s = s.solver_timeout;
  cfg.domains = effective_domains(s, f);
  if (std::find(cfg.order.begin(), cfg.order.end(), "smt") == cfg.order.end()) return cfg;
  if (solver_answers(cfg.smt)) return cfg;
  bool explicit_cmd = s.solver_explicit || (std::getenv("REFINERY_SMT_CMD") && *std::getenv("REFINERY_SMT_CMD"));
  if (explicit_cmd) throw SolverMisconfigured("solver `" + smt_command(cfg.smt) + "` does not answer");
  cfg.order.erase(std::remove(cfg.order.begin(), cfg.order.end(), "smt"), cfg.order.end());
  if (cfg.order.empty()) throw SolverMisconfigured("no SMT solver found and no other backend configured");
  if (warning) *warning = "no SMT solver found; using the bounded checker only";
  return cfg;
}

std::unique_ptr<Oracle> make_oracle(const std::string& kind, const Settings& s, const std::string& script_path) {
  if (kind == "scripted") {
    if (script_path.empty()) throw ConfigError("the scripted oracle needs --script");
    std::ifstream in(script_path);
    if (!in) throw ConfigError("cannot read script " + script_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_unique<ScriptedOracle>(ss.str());
  }
  if (kind == "heuristic") return std::make_unique<HeuristicOracle>();
  if (kind == "remote") return std::make_unique<RemoteOracle>(s.llm);
  if (kind == "replay") {
    if (script_path.empty()) throw ConfigError("the replay oracle needs a transcript");
    return std::make_unique<ReplayOracle>(read_transcript(script_path));
  }
  throw ConfigError("unknown oracle `" + kind + "` (expected scripted, heuristic, remote or replay)");
}

}  // namespace refinery
