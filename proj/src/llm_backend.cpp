#include "expdesign/llm_backend.hpp"

#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "expdesign/error.hpp"

namespace expdesign::llm {

ScriptedBackend::ScriptedBackend(std::map<std::size_t, std::string> fixtures)
    : fixtures_(std::make_shared<const std::map<std::size_t, std::string>>(std::move(fixtures))) {
  if (fixtures_->empty()) throw ConfigError("scripted backend needs at least one fixture");
}

ScriptedBackend ScriptedBackend::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("fixtures directory not found: " + dir.string());
  static const std::regex pattern(R"(round-(\d+)\.txt)");
  std::map<std::size_t, std::string> fixtures;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string fname = entry.path().filename().string();
    if (!entry.is_regular_file() || !std::regex_match(fname, m, pattern)) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    fixtures.emplace(std::stoul(m[1].str()), text.str());
  }
  if (fixtures.empty()) throw ConfigError("no round-<i>.txt fixtures in " + dir.string());
  return ScriptedBackend(std::move(fixtures));
}

std::string ScriptedBackend::chat(const ChatRequest& request) {
  ++calls_;
  auto it = fixtures_->upper_bound(request.round);
  if (it == fixtures_->begin()) {
    throw LlmError("no scripted fixture for round " + std::to_string(request.round), false);
  }
  return std::prev(it)->second;
}

ScriptedBackend ScriptedBackend::fork() const {
  ScriptedBackend copy = *this;
  copy.calls_ = 0;
  return copy;
}

std::string chat_with_retry(LlmBackend& backend, const ChatRequest& request, const RetryPolicy& policy,
                            const ResponseValidator& validator) {
  if (policy.max_attempts == 0) throw ConfigError("retry policy needs max_attempts >= 1");
  auto backoff = policy.initial_backoff;
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    try {
      std::string text = backend.chat(request);
      if (validator) validator(text);
      return text;
    } catch (const ParseError& e) {
      last_error = std::string("unusable response: ") + e.what();
    } catch (const LlmError& e) {
      if (!e.retryable()) throw;
      last_error = e.what();
    }
    if (attempt < policy.max_attempts && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * policy.backoff_multiplier));
    }
  }
  throw RetryExhaustedError("LLM request failed after " + std::to_string(policy.max_attempts) +
                            " attempts: " + last_error);
}

}  // namespace expdesign::llm
