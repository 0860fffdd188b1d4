#include <json.hpp>

#include "expdesign/error.hpp"
#include "expdesign/llm_backend.hpp"

#include "httplib.h"

namespace expdesign::llm {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("LLM endpoint must be an absolute http(s) URL: '" + config_.endpoint + "'");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  origin_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpBackend::chat(const ChatRequest& request) {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system}},
                              {{"role", "user"}, {"content", request.user}}})},
      {"temperature", request.params.temperature},
      {"max_tokens", request.params.max_tokens},
  };

  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw LlmError("LLM transport error: " + httplib::to_string(res.error()), true);
  }
  if (res->status != 200) {
    const bool retryable = res->status == 429 || res->status >= 500;
    throw LlmError("LLM endpoint returned HTTP " + std::to_string(res->status), retryable, res->status);
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(std::string("malformed chat-completions reply: ") + e.what(), true, res->status);
  }
}

}  // namespace expdesign::llm
