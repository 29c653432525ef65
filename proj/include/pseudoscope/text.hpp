#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pseudoscope::text {

// Shortest decimal text that parses back to exactly x ("inf", "-inf", "nan"
// for non-finite values).
std::string format_double(double x);

// Whole-string decimal parse; throws InvalidArgument on trailing characters,
// an empty string, or a non-finite result. A leading '+' is accepted.
double parse_double(std::string_view s);
// Whole-string unsigned decimal parse; throws InvalidArgument otherwise.
unsigned long long parse_unsigned(std::string_view s);

std::string_view trim(std::string_view s);
// Splits on `sep` and trims every piece; an empty input gives no pieces.
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace pseudoscope::text
