#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace siv {

using Point = std::vector<double>;
using Shift = std::vector<int>;

/// Strict half-space a . x < b.
struct HalfSpace {
  std::vector<double> a;
  double b = 0.0;

  bool operator==(const HalfSpace&) const = default;
};

/// Bounded open set: an open box intersected with open half-spaces.
struct Region {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<HalfSpace> halfspaces;

  int dimension() const { return static_cast<int>(lo.size()); }

  bool contains(std::span<const double> x) const { return contains_with_margin(x, 0.0); }

  /// Membership with every constraint tightened by `margin`.
  bool contains_with_margin(std::span<const double> x, double margin) const;

  /// Cell-centred grid points of step `h` over the bounding box that lie
  /// strictly inside the region.
  std::vector<Point> interior_grid(double h) const;

  /// Points (i_1/q, ..., i_d/q) strictly inside the region (minus margin).
  std::vector<Point> lattice_points(int q, double margin = 0.0) const;

  /// `count` deterministic quasi-random interior points (Halton rejection).
  std::vector<Point> quasi_random_points(std::size_t count, double margin = 0.0) const;

  Point centroid_estimate() const;

  bool operator==(const Region&) const = default;

  static Region unit_cube(int d);
  static Region interval(double a, double b);
  /// {(s,t): 0 < s < t < 1}
  static Region upper_triangle();
  /// {(s,t): 0 < t < s < 1}
  static Region lower_triangle();
};

nlohmann::json to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

/// Parses "unit", "upper", "lower", "a:b" (1-D interval) or a JSON object.
Region parse_region(const std::string& text, int dim);

}  // namespace siv
