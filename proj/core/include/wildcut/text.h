#pragma once

#include <cstddef>
#include <string_view>

namespace wildcut {

// Number of code points in `utf8` that are not Unicode whitespace. Invalid
// byte sequences count as one character per offending byte.
std::size_t count_non_whitespace(std::string_view utf8);

bool is_valid_utf8(std::string_view bytes);

}  // namespace wildcut
