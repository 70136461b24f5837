#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace covr {

/// Lowercases ASCII, splits on every non-alphanumeric byte and drops empty
/// pieces. Shared by the toy encoder and BM25 so both see the same terms.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace covr
