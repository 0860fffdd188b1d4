#include "expdesign/response.hpp"

#include <algorithm>

#include "expdesign/csv.hpp"
#include "expdesign/error.hpp"

namespace expdesign::llm {
namespace {

constexpr std::string_view kSolution = "**Solution:";
constexpr std::string_view kReflection = "**Reflection:";
constexpr std::string_view kPlan = "**Research Plan:";

// Text after `marker` up to the next "**Reflection:"/"**Research Plan:"/
// "**Solution:" marker.
std::string section(std::string_view text, std::string_view marker) {
  const auto start = text.find(marker);
  if (start == std::string_view::npos) return {};
  const auto body = text.substr(start + marker.size());
  std::size_t end = body.size();
  for (auto m : {kReflection, kPlan, kSolution}) end = std::min(end, body.find(m));
  return std::string(csv::trim(body.substr(0, end)));
}

}  // namespace

ParsedResponse parse_solution(std::string_view text, std::size_t expected) {
  const auto marker = text.rfind(kSolution);
  if (marker == std::string_view::npos) throw ParseError("response has no **Solution: section");

  ParsedResponse out;
  out.reflection = section(text.substr(0, marker), kReflection);
  out.research_plan = section(text.substr(0, marker), kPlan);

  std::string_view rest = text.substr(marker + kSolution.size());
  std::vector<std::string> names;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    auto line = csv::trim(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!line.starts_with("##")) continue;
    while (!line.empty() && line.front() == '#') line.remove_prefix(1);
    line = csv::trim(line);
    if (line.empty()) continue;
    if (std::find(names.begin(), names.end(), line) == names.end()) names.emplace_back(line);
  }
  if (names.empty()) throw ParseError("solution section lists no names");
  if (names.size() > expected) {
    names.resize(expected);
    out.truncated = true;
  }
  out.short_ = names.size() < expected;
  out.solution = std::move(names);
  return out;
}

}  // namespace expdesign::llm
