#pragma once

// Number formatting and parsing shared by the file formats. Locale
// independent; doubles written here parse back to the same value.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rema::text {

/// Shortest representation that round-trips ("0.8", "1e-05").
std::string shortest(double value);

/// printf("%.17g").
std::string sig17(double value);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);

/// Split on runs of spaces.
std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace rema::text
