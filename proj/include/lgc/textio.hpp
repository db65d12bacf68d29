#pragma once

// Helpers shared by the whitespace-separated text formats.

#include <string>
#include <string_view>
#include <vector>

namespace lgc::text {

/// Shortest form that round-trips: %.17g.
std::string format_double(double v);

/// Strips a trailing `#` comment and surrounding whitespace.
std::string_view strip(std::string_view line);

std::vector<std::string_view> split(std::string_view line);

/// Parses a finite double; `where` prefixes the error message.
double parse_double(std::string_view token, const std::string& where);
long long parse_int(std::string_view token, const std::string& where);

/// "path:line".
std::string location(const std::string& origin, std::size_t line);

/// Splits text into lines, handling a missing final newline and CRLF.
std::vector<std::string_view> lines(std::string_view text);

}  // namespace lgc::text
