#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace expdesign::llm {

struct SamplingParams {
  double temperature = 1.0;
  int max_tokens = 4096;
};

struct ChatRequest {
  std::string system;
  std::string user;
  SamplingParams params;
  std::size_t round = 0;  // experiment round the request belongs to
};

// Chat-style text completion. Implementations throw LlmError for transport
// or protocol failures, marking whether a retry may help.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string chat(const ChatRequest& request) = 0;
};

// Replays fixture texts keyed by round. A round without its own fixture gets
// the latest earlier one. Each instance counts its own calls; fork() gives a
// fresh handle over the same fixtures for another run.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::map<std::size_t, std::string> fixtures);

  // Loads every round-<i>.txt in `dir`.
  static ScriptedBackend from_directory(const std::filesystem::path& dir);

  std::string chat(const ChatRequest& request) override;
  std::size_t calls() const { return calls_; }
  ScriptedBackend fork() const;

 private:
  std::shared_ptr<const std::map<std::size_t, std::string>> fixtures_;
  std::size_t calls_ = 0;
};

// Delegates to a function of (request, call index); used for programmatic
// policies and fault injection.
class CallbackBackend : public LlmBackend {
 public:
  using Callback = std::function<std::string(const ChatRequest&, std::size_t call_index)>;
  explicit CallbackBackend(Callback callback) : callback_(std::move(callback)) {}

  std::string chat(const ChatRequest& request) override { return callback_(request, calls_++); }
  std::size_t calls() const { return calls_; }

 private:
  Callback callback_;
  std::size_t calls_ = 0;
};

struct HttpBackendConfig {
  std::string endpoint;  // full URL of a chat-completions endpoint
  std::string model;
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::seconds timeout{120};
};

// Chat-completions JSON over HTTP(S): system + user messages in,
// choices[0].message.content out. 429 and 5xx are retryable; other non-200
// statuses are not.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string chat(const ChatRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

// Environment variable holding the API key.
inline constexpr const char* kApiKeyEnv = "EXPDESIGN_API_KEY";

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{0};
  double backoff_multiplier = 2.0;
};

// Response validator; throws ParseError to request another attempt.
using ResponseValidator = std::function<void(const std::string&)>;

// Calls the backend until it returns a response the validator accepts.
// Retryable LlmErrors and ParseErrors consume attempts; a non-retryable
// LlmError propagates at once. Throws RetryExhaustedError after max_attempts.
std::string chat_with_retry(LlmBackend& backend, const ChatRequest& request, const RetryPolicy& policy,
                            const ResponseValidator& validator = {});

}  // namespace expdesign::llm
