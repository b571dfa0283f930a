#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace siv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative threshold for numerical rank decisions.
inline constexpr double kRankTol = 1e-9;

/// Relative residual below which a vector counts as inside a span. Looser
/// than kRankTol: Gram-Schmidt residuals carry more rounding than an SVD.
inline constexpr double kSpanTol = 1e-7;

/// Singular values below rel_tol * sigma_max count as zero.
int numerical_rank(const Matrix& a, double rel_tol = kRankTol);

/// Smallest singular value, 0 when the matrix has fewer rows than columns.
double sigma_min(const Matrix& a);

/// Upper-triangle coordinates of v v^T, row-major (i <= j).
Vector outer_upper(const Vector& v);

/// Incrementally grown orthonormal basis; used for greedy span selection.
class SpanBasis {
 public:
  explicit SpanBasis(Eigen::Index dim) : dim_(dim) {}

  /// Adds v if it is independent of the current span (relative residual
  /// above rel_tol); returns whether it was added.
  bool try_add(const Vector& v, double rel_tol = kSpanTol);

  bool contains(const Vector& v, double rel_tol = kSpanTol) const;

  Eigen::Index rank() const { return static_cast<Eigen::Index>(basis_.size()); }
  Eigen::Index dim() const { return dim_; }

 private:
  Vector residual(const Vector& v) const;

  Eigen::Index dim_;
  std::vector<Vector> basis_;
};

/// Points of the Halton sequence in [0,1)^d (bases 2, 3, 5, ...), skipping
/// the first `skip` elements.
std::vector<std::vector<double>> halton_points(int dim, std::size_t count, std::size_t skip = 1);

}  // namespace siv
