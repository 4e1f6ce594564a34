#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gnf {

// Shortest decimal form that parses back to the same double.
// Integral values render without a trailing ".0" ("10", not "10.0").
std::string format_double(double value);

// Strict double parse: the whole token must be consumed and the result
// finite. Returns nullopt otherwise (including "inf"/"nan" spellings).
std::optional<double> parse_double(std::string_view token);

// Strict non-negative integer parse.
std::optional<long long> parse_int(std::string_view token);

}  // namespace gnf
