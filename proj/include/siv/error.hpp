#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace siv {

enum class ErrorCode {
  invalid_order,
  degenerate_direction_matrix,
  empty_restriction,
  too_many_vertices,
  wrong_dimension,
  candidates_insufficient,
  too_many_vectors,
  rank_deficient_patch,
  coverage_violation,
  local_dependence,
  frame_search_exhausted,
  unsupported_generator,
  rank_deficient,
  non_finite_input,
  phase_conflict,
  search_budget_exceeded,
  invalid_argument,
  parse_error,
  io_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace siv
