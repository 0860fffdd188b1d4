#include "expdesign/trace.hpp"

#include "expdesign/error.hpp"

namespace expdesign {

TraceLog::TraceLog(const std::filesystem::path& path) : file_(path, std::ios::binary | std::ios::trunc) {
  if (!file_) throw Error("cannot open trace log " + path.string());
}

void TraceLog::write(nlohmann::json event) {
  if (file_.is_open()) {
    file_ << event.dump() << '\n';
    file_.flush();
  }
  events_.push_back(std::move(event));
}

std::vector<nlohmann::json> TraceLog::events_of(std::string_view type) const {
  std::vector<nlohmann::json> out;
  for (const auto& e : events_) {
    if (e.value("event", "") == type) out.push_back(e);
  }
  return out;
}

}  // namespace expdesign
