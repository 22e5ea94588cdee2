#include "tmsnav/format.hpp"

#include <array>
#include <charconv>

#include "tmsnav/error.hpp"

namespace tmsnav {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError, "invalid number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace tmsnav
