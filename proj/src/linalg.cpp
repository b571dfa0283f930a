#include "siv/linalg.hpp"

#include "siv/error.hpp"

#include <algorithm>
#include <cmath>

namespace siv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_order: return "invalid-order";
    case ErrorCode::degenerate_direction_matrix: return "degenerate-direction-matrix";
    case ErrorCode::empty_restriction: return "empty-restriction";
    case ErrorCode::too_many_vertices: return "too-many-vertices";
    case ErrorCode::wrong_dimension: return "wrong-dimension";
    case ErrorCode::candidates_insufficient: return "candidates-insufficient";
    case ErrorCode::too_many_vectors: return "too-many-vectors";
    case ErrorCode::rank_deficient_patch: return "rank-deficient-patch";
    case ErrorCode::coverage_violation: return "coverage-violation";
    case ErrorCode::local_dependence: return "local-dependence";
    case ErrorCode::frame_search_exhausted: return "frame-search-exhausted";
    case ErrorCode::unsupported_generator: return "unsupported-generator";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::non_finite_input: return "non-finite-input";
    case ErrorCode::phase_conflict: return "phase-conflict";
    case ErrorCode::search_budget_exceeded: return "search-budget-exceeded";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rel_tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

double sigma_min(const Matrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(a.cols() - 1);
}

Vector outer_upper(const Vector& v) {
  const Eigen::Index n = v.size();
  Vector out(n * (n + 1) / 2);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) out(pos++) = v(i) * v(j);
  }
  return out;
}

Vector SpanBasis::residual(const Vector& v) const {
  Vector r = v;
  // Two passes of classical Gram-Schmidt keep the basis orthonormal to
  // working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis_) r -= q.dot(r) * q;
  }
  return r;
}

bool SpanBasis::contains(const Vector& v, double rel_tol) const {
  const double nv = v.norm();
  if (nv == 0.0) return true;
  return residual(v).norm() <= rel_tol * nv;
}

bool SpanBasis::try_add(const Vector& v, double rel_tol) {
  if (rank() >= dim_) return false;
  const double nv = v.norm();
  if (nv == 0.0) return false;
  Vector r = residual(v);
  const double nr = r.norm();
  if (nr <= rel_tol * nv) return false;
  basis_.push_back(r / nr);
  return true;
}

std::vector<std::vector<double>> halton_points(int dim, std::size_t count, std::size_t skip) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      const int base = kPrimes[k % 12];
      double f = 1.0, r = 0.0;
      std::size_t n = i + skip;
      while (n > 0) {
        f /= base;
        r += f * static_cast<double>(n % base);
        n /= base;
      }
      p[static_cast<std::size_t>(k)] = r;
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace siv
