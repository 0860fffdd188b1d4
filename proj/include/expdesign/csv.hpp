#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace expdesign::csv {

// Splits one CSV record. Fields may be double-quoted ("" escapes a quote);
// a trailing '\r' is dropped.
std::vector<std::string> split_record(std::string_view line);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape_field(std::string_view field);

void write_record(std::ostream& out, const std::vector<std::string>& fields);

// Strict double parse: the whole (trimmed) field must be consumed.
bool parse_double(std::string_view text, double& value);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

std::string_view trim(std::string_view s);

}  // namespace expdesign::csv
