#include "expdesign/smiles.hpp"

#include <algorithm>
#include <cctype>

namespace expdesign::smiles {
namespace {

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

// Parses the inside of a bracket atom, e.g. "13CH3+" or "nH".
void bracket_elements(std::string_view atom, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < atom.size() && std::isdigit(static_cast<unsigned char>(atom[i]))) ++i;
  if (i >= atom.size()) return;
  if (is_upper(atom[i])) {
    std::size_t len = 1;
    if (i + 1 < atom.size() && is_lower(atom[i + 1])) len = 2;
    out.emplace_back(atom.substr(i, len));
    i += len;
  } else if (is_lower(atom[i])) {
    // Aromatic: two-letter forms first.
    const std::string_view rest = atom.substr(i);
    std::size_t len = 1;
    for (std::string_view two : {"se", "as", "te"}) {
      if (rest.starts_with(two)) len = 2;
    }
    out.push_back(capitalize(atom.substr(i, len)));
    i += len;
  } else if (atom[i] == '*') {
    out.emplace_back("*");
    ++i;
  }
  for (; i < atom.size(); ++i) {
    if (atom[i] == 'H') out.emplace_back("H");
  }
}

}  // namespace

std::vector<std::string> elements(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '[') {
      const std::size_t close = s.find(']', i + 1);
      const std::size_t end = close == std::string_view::npos ? s.size() : close;
      bracket_elements(s.substr(i + 1, end - i - 1), out);
      i = end;
      continue;
    }
    if (c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') {
      out.emplace_back("Cl");
      ++i;
    } else if (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r') {
      out.emplace_back("Br");
      ++i;
    } else if (is_upper(c) || is_lower(c)) {
      out.push_back(capitalize(std::string_view(&s[i], 1)));
    } else if (c == '*') {
      out.emplace_back("*");
    }
  }
  return out;
}

bool composed_only_of(std::string_view s, std::span<const std::string> allowed) {
  const auto found = elements(s);
  return std::all_of(found.begin(), found.end(), [&](const std::string& e) {
    return std::find(allowed.begin(), allowed.end(), e) != allowed.end();
  });
}

}  // namespace expdesign::smiles
