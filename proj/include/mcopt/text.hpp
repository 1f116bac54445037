#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the instance readers and the CLI.
namespace mcopt::text {

/// Shortest representation that round-trips to the same double.
std::string format_number(double value);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_ws(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace mcopt::text
