#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace siv::csv {

/// Shortest form that round-trips a double: printf "%.17g".
std::string format_double(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& line);

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& msg);
int parse_int(const std::string& s, const std::string& source, std::size_t line);
double parse_double(const std::string& s, const std::string& source, std::size_t line);

}  // namespace siv::csv
