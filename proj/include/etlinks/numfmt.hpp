#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace etlinks {

/// printf "%.<digits>g". Non-finite values render as "nan"/"inf"/"-inf".
std::string format_significant(double value, int digits = 9);

/// Shortest text that parses back to exactly `value`.
std::string format_shortest(double value);

/// Value after a round trip through format_significant.
double round_significant(double value, int digits = 9);

/// Exact-match numeric parsers: the whole string must be consumed.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

}  // namespace etlinks
