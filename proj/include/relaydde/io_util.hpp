#pragma once

#include <string>
#include <string_view>

namespace relaydde {

// Shortest representation that round-trips the exact double value.
std::string format_shortest(double v);

// Fixed 17 significant digits, the form used in golden files.
std::string format_g17(double v);

// RFC-4180 quoting: field is quoted when it contains a comma, quote, or
// newline; embedded quotes are doubled.
std::string csv_escape(std::string_view field);

}  // namespace relaydde
