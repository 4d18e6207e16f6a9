#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "agentjudge/errors.hpp"
#include "agentjudge/gateway.hpp"
#include "http_util.hpp"

namespace agentjudge {

namespace detail {

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"((https?)://([^/]+)(/.*)?)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw PreconditionError("invalid endpoint URL: " + url);
  ParsedUrl out;
  out.scheme_host_port = m[1].str() + "://" + m[2].str();
  out.path = m[3].matched ? m[3].str() : "/";
  return out;
}

void classify_http_failure(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw TransientBackendError(what + ": " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 429 || status >= 500) {
    throw TransientBackendError(what + ": HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw GatewayError(what + ": HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
  }
}

}  // namespace detail

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw MissingCredential("environment variable " + config_.api_key_env +
                            " must hold the API credential");
  }
  api_key_ = key;
  detail::parse_url(config_.endpoint);
}

BackendReply HttpChatBackend::generate(const BackendRequest& request) {
  const auto url = detail::parse_url(config_.endpoint);
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_bearer_token_auth(api_key_);

  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;

  auto res = client.Post(url.path, body.dump(), "application/json");
  detail::classify_http_failure(res, "chat completion");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw GatewayError(std::string("chat completion: malformed response body: ") + e.what());
  }
  if (!doc.contains("choices") || doc["choices"].empty()) {
    throw GatewayError("chat completion: response has no choices");
  }
  BackendReply reply;
  reply.text = doc["choices"][0]["message"].value("content", "");
  if (doc.contains("usage") && doc["usage"].is_object()) {
    Usage usage;
    usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
    usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
    reply.usage = usage;
  }
  return reply;
}

}  // namespace agentjudge
