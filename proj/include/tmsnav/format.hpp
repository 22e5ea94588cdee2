#pragma once

#include <string>
#include <string_view>

namespace tmsnav {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict full-string parse; throws ParseError.
double parse_double(std::string_view text);

}  // namespace tmsnav
