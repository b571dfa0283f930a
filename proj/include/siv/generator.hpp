#pragma once

#include "siv/region.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace siv {

/// Cardinal B-spline B_N supported on [0, N], via the convolution recursion.
double eval_bspline(int order, double t);

/// Axis-aligned closed box.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  bool operator==(const Box&) const = default;
};

struct CardinalBSpline {
  int order = 3;
};

struct TensorBSpline {
  std::vector<int> orders;
};

/// Box spline M_Xi for an integer d x s direction matrix of rank d.
struct BoxSpline {
  Eigen::MatrixXi directions;
};

/// Hand-written piecewise-polynomial generators used as counterexamples.
///  phi0: h(4t-1)+h(4t-3)+h(4t-5)-h(4t-7), h the hat on [-1,1]
///  phi1: the cubic on [0,3] whose shifted triple yields a phase retrievable
///        frame whose outer products do not span.
struct FixtureGenerator {
  std::string name;
};

/// Compactly supported continuous generator phi on R^d with exact evaluation.
class Generator {
 public:
  using Kind = std::variant<CardinalBSpline, TensorBSpline, BoxSpline, FixtureGenerator>;

  static Generator bspline(int order);
  static Generator tensor(std::vector<int> orders);
  static Generator box(Eigen::MatrixXi directions);
  static Generator fixture(const std::string& name);
  /// The bivariate box spline with Xi = [[1,1,0,1],[0,0,1,1]].
  static Generator zwart_powell();

  int dimension() const { return dim_; }
  const Kind& kind() const { return kind_; }

  double evaluate(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return evaluate(x); }
  double evaluate_shifted(std::span<const double> x, std::span<const int> k) const;

  /// Minimal closed box containing the support.
  const Box& support() const { return support_; }

  /// True when phi is known to be locally linearly independent on every
  /// open set: B-splines, tensor B-splines, unimodular box splines.
  bool locally_independent_on_open_sets() const { return lli_; }

  /// Mesh breakpoints are at multiples of 1/knot_density() along each axis
  /// (or along lines of the box-spline mesh).
  int knot_density() const;

  /// Stable identifier, e.g. "tensor(3,3)".
  std::string id() const;

  nlohmann::json to_json() const;
  static Generator from_json(const nlohmann::json& j);
  /// Accepts inline JSON or a path to a JSON file.
  static Generator parse(const std::string& text);

  bool operator==(const Generator& other) const { return id() == other.id(); }

 private:
  Generator(Kind kind, int dim, Box support, bool lli);

  Kind kind_;
  int dim_ = 1;
  Box support_;
  bool lli_ = false;
};

/// Direct evaluation of a box spline through the de Boor recurrence.
double eval_box_spline(const Eigen::MatrixXi& directions, std::span<const double> x);

/// All d x d minors of the direction matrix are 0 or +-1.
bool is_unimodular(const Eigen::MatrixXi& directions);

}  // namespace siv
