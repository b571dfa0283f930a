#include "siv/overlap.hpp"

#include "siv/error.hpp"

#include <algorithm>
#include <cmath>

namespace siv {

bool OverlapSet::contains(const Shift& k) const {
  return std::binary_search(shifts.begin(), shifts.end(), k);
}

namespace {

// Integer shifts k_i in the closed range [lo_i, hi_i], lexicographic order.
std::vector<Shift> shift_box(const std::vector<int>& lo, const std::vector<int>& hi) {
  std::vector<Shift> out;
  const std::size_t d = lo.size();
  for (std::size_t i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) return out;
  }
  Shift k = lo;
  while (true) {
    out.push_back(k);
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (++k[i] <= hi[i]) break;
      k[i] = lo[i];
      if (i == 0) return out;
    }
    if (d == 0) return out;
  }
}

Region box_region(const std::vector<double>& lo, const std::vector<double>& hi) {
  return Region{lo, hi, {}};
}

}  // namespace

OverlapSet overlap_set(const Generator& g, double grid_step, double zero_tol) {
  if (!(grid_step > 0)) throw Error(ErrorCode::invalid_argument, "grid_step must be positive");
  const auto& sup = g.support();
  const std::size_t d = sup.lo.size();
  std::vector<int> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    // Open overlap of [a,b] and [a+k,b+k] needs |k| < b - a.
    const double w = sup.hi[i] - sup.lo[i];
    hi[i] = static_cast<int>(std::ceil(w)) - 1;
    lo[i] = -hi[i];
  }
  OverlapSet out;
  out.generator_id = g.id();
  for (const auto& k : shift_box(lo, hi)) {
    std::vector<double> a(d), b(d);
    bool empty = false;
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = std::max(sup.lo[i], sup.lo[i] + k[i]);
      b[i] = std::min(sup.hi[i], sup.hi[i] + k[i]);
      if (!(a[i] < b[i])) empty = true;
    }
    if (empty) continue;
    for (const auto& x : box_region(a, b).interior_grid(grid_step)) {
      if (std::abs(g.evaluate(x) * g.evaluate_shifted(x, k)) > zero_tol) {
        out.shifts.push_back(k);
        out.witnesses.push_back(x);
        break;
      }
    }
  }
  return out;
}

std::vector<Shift> k_set(const Generator& g, const Region& a, double grid_step, double zero_tol) {
  if (a.dimension() != g.dimension()) throw Error(ErrorCode::wrong_dimension, "region dimension mismatch");
  const auto& sup = g.support();
  const std::size_t d = sup.lo.size();
  std::vector<int> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    // support + k meets (a.lo, a.hi) with nonempty interior.
    lo[i] = static_cast<int>(std::floor(a.lo[i] - sup.hi[i])) + 1;
    hi[i] = static_cast<int>(std::ceil(a.hi[i] - sup.lo[i])) - 1;
  }
  const auto grid = a.interior_grid(grid_step);
  std::vector<Shift> out;
  for (const auto& k : shift_box(lo, hi)) {
    for (const auto& x : grid) {
      if (std::abs(g.evaluate_shifted(x, k)) > zero_tol) {
        out.push_back(k);
        break;
      }
    }
  }
  return out;
}

Matrix local_matrix(const Generator& g, const std::vector<Point>& points, const std::vector<Shift>& shifts) {
  Matrix m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(shifts.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    for (std::size_t c = 0; c < shifts.size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g.evaluate_shifted(points[r], shifts[c]);
    }
  }
  return m;
}

bool local_linear_independence(const Generator& g, const Region& a, std::size_t sample_count,
                               double rank_tol) {
  const auto ks = k_set(g, a);
  if (ks.empty()) throw Error(ErrorCode::empty_restriction, "no translate is active on the region");
  const std::size_t minimum = 4 * ks.size();
  if (sample_count == 0) sample_count = 8 * ks.size();
  if (sample_count < minimum) {
    throw Error(ErrorCode::invalid_argument, "sample_count must be at least 4 * #K_A");
  }
  const auto pts = a.quasi_random_points(sample_count);
  return numerical_rank(local_matrix(g, pts, ks), rank_tol) == static_cast<int>(ks.size());
}

}  // namespace siv
