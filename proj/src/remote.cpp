#include "refinery/oracle.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <regex>

namespace refinery {

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  if (const char* u = std::getenv("REFINERY_LLM_URL")) c.url = u;
  if (const char* k = std::getenv("REFINERY_LLM_KEY")) c.key = k;
  if (const char* m = std::getenv("REFINERY_LLM_MODEL")) c.model = m;
  return c;
}

RemoteOracle::RemoteOracle(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

std::string RemoteOracle::complete(const std::string& prompt) {
  if (cfg_.url.empty()) throw OracleTransportError("no endpoint configured (set REFINERY_LLM_URL)");
  static const std::regex url_re(R"(^(https?)://([^/:]+)(:(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.url, m, url_re)) throw OracleTransportError("bad endpoint URL " + cfg_.url);
  std::string scheme = m[1], host = m[2], path = m[5].matched ? std::string(m[5]) : "/";
  int port = m[4].matched ? std::stoi(m[4]) : (scheme == "https" ? 443 : 80);

  nlohmann::json body = {
      {"model", cfg_.model},
      {"temperature", cfg_.temperature},
      {"messages",
       {{{"role", "system"}, {"content", "You propose one program refinement law per reply."}},
        {{"role", "user"}, {"content", prompt}}}}};
  httplib::Headers headers;
  if (!cfg_.key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.key);

  httplib::Result res{nullptr, httplib::Error::Unknown};
  if (scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient cli(host, port);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    res = cli.Post(path, headers, body.dump(), "application/json");
#else
    throw OracleTransportError("https endpoints need a build with OpenSSL");
#endif
  } else {
    httplib::Client cli(host, port);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    res = cli.Post(path, headers, body.dump(), "application/json");
  }
  if (!res) throw OracleTransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) throw OracleTransportError("endpoint rejected the key");
  if (res->status != 200) throw OracleTransportError("endpoint returned HTTP " + std::to_string(res->status));
  try {
    auto j = nlohmann::json::parse(res->body);
    if (j.contains("choices") && !j["choices"].empty()) {
      const auto& c = j["choices"][0];
      if (c.contains("message")) return c["message"].value("content", "");
      if (c.contains("text")) return c["text"].get<std::string>();
    }
    if (j.contains("content") && j["content"].is_string()) return j["content"].get<std::string>();
    throw OracleTransportError("reply has no choices");
  } catch (const nlohmann::json::exception& e) {
    throw OracleTransportError(std::string("unreadable reply: ") + e.what());
  }
}

LawProposal RemoteOracle::propose(const OracleContext& ctx) {
  std::string reply = complete(build_prompt(ctx));
  LawProposal p = parse_proposal(reply, ctx);
  p.raw = reply;
  return p;
}

}  // namespace refinery
