#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace expdesign::smiles {

// Element symbols mentioned by a SMILES string, in order of appearance,
// including explicit hydrogens in bracket atoms. Aromatic lowercase atoms are
// reported in their element form ("c" -> "C"). Letters that are not valid
// organic-subset atoms outside brackets are reported as-is so callers reject
// them.
std::vector<std::string> elements(std::string_view smiles);

// True when every element in the string is in `allowed`.
bool composed_only_of(std::string_view smiles, std::span<const std::string> allowed);

}  // namespace expdesign::smiles
