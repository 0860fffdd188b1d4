#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace expdesign {

// Per-run JSON-lines event log: prompts, raw LLM text, parsed centers,
// substitutions, feedback and selections. Keeps events in memory and, when
// opened on a path, mirrors each one to disk as it is written.
class TraceLog {
 public:
  TraceLog() = default;
  explicit TraceLog(const std::filesystem::path& path);

  void write(nlohmann::json event);
  const std::vector<nlohmann::json>& events() const { return events_; }

  std::vector<nlohmann::json> events_of(std::string_view type) const;

 private:
  std::vector<nlohmann::json> events_;
  std::ofstream file_;
};

}  // namespace expdesign
