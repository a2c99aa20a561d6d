#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace critesn {

// Shortest round-trip formatting with up to 17 significant digits, '.' as
// decimal separator regardless of locale.
std::string format_double(double value);

// Strict parse of a full field; throws std::runtime_error on trailing junk.
double parse_double(std::string_view text);

// Splits on ',' and trims surrounding whitespace. No quoting support.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace critesn
