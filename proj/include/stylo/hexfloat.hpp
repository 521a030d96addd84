// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace stylo {

/// C99 hexadecimal float ("%a"); exact for every finite double.
std::string format_hex(double value);

/// Accepts hexadecimal or decimal floats; rejects trailing garbage.
std::optional<double> parse_double(std::string_view text);

}  // namespace stylo
