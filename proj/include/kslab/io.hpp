#pragma once

#include <string>
#include <vector>

namespace kslab {

// Shortest decimal string that round-trips the value through strtod.
std::string format_double(double v);

// RFC 4180 field quoting: wraps the field in quotes when it contains a
// comma, quote, or newline, doubling embedded quotes.
std::string csv_field(const std::string& raw);

// Joins fields with commas and terminates with a single LF.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace kslab
