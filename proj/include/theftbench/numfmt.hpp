#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace theftbench {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Strict parse of the whole token; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace theftbench
