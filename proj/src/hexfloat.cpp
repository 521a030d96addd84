// SPDX-License-Identifier: Apache-2.0

#include "stylo/hexfloat.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace stylo {

std::string format_hex(double value) {
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%a", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty() || text.front() == ' ' || text.front() == '\t') return std::nullopt;
  std::string buf(text);
  char* end = nullptr;
  errno = 0;
  double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE) return std::nullopt;
  return value;
}

}  // namespace stylo
