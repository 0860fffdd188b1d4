#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace expdesign::llm {

struct ParsedResponse {
  std::string reflection;     // empty when the section is missing
  std::string research_plan;  // empty when the section is missing
  std::vector<std::string> solution;
  bool truncated = false;  // more than `expected` names were offered
  bool short_ = false;     // fewer than `expected` names were found
};

// Reads the names listed after the last "**Solution:" marker. Only lines that
// start with "##" count; markers and surrounding whitespace are stripped and
// repeated names dropped (first occurrence wins). Keeps at most `expected`
// names. Throws ParseError when the marker is missing or no name is found.
ParsedResponse parse_solution(std::string_view text, std::size_t expected);

}  // namespace expdesign::llm
