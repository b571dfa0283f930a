#include "siv/csv.hpp"

#include "siv/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace siv::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void fail_at(const std::string& source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::parse_error, source + ":" + std::to_string(line) + ": " + msg);
}

int parse_int(const std::string& s, const std::string& source, std::size_t line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) fail_at(source, line, "expected an integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& source, std::size_t line) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
  } catch (const std::logic_error&) {
    fail_at(source, line, "expected a number, got '" + s + "'");
  }
  if (!std::isfinite(v)) fail_at(source, line, "non-finite value '" + s + "'");
  return v;
}

}  // namespace siv::csv
