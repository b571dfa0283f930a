#pragma once

#include "siv/generator.hpp"
#include "siv/linalg.hpp"
#include "siv/region.hpp"

#include <vector>

namespace siv {

inline constexpr double kZeroTol = 1e-12;
inline constexpr double kGridStep = 1.0 / 32;

/// The shifts k with phi * phi(. - k) not identically zero, with one witness
/// point per shift. Shifts are sorted lexicographically.
struct OverlapSet {
  std::string generator_id;
  std::vector<Shift> shifts;
  std::vector<Point> witnesses;

  bool contains(const Shift& k) const;
};

OverlapSet overlap_set(const Generator& g, double grid_step = kGridStep, double zero_tol = kZeroTol);

/// K_A: shifts whose translate phi(. - k) does not vanish identically on A,
/// decided on the cell-centred grid of step `grid_step`. Lexicographic order.
std::vector<Shift> k_set(const Generator& g, const Region& a, double grid_step = kGridStep,
                         double zero_tol = kZeroTol);

/// Rows phi(x - k) for x in `points`, columns k in `shifts`.
Matrix local_matrix(const Generator& g, const std::vector<Point>& points, const std::vector<Shift>& shifts);

/// Numerical rank of the stacked Phi_A(x) over `sample_count` interior
/// samples equals #K_A. Throws empty-restriction if K_A is empty.
bool local_linear_independence(const Generator& g, const Region& a, std::size_t sample_count = 0,
                               double rank_tol = kRankTol);

}  // namespace siv
