#pragma once

#include "siv/generator.hpp"
#include "siv/linalg.hpp"
#include "siv/overlap.hpp"
#include "siv/region.hpp"
#include "siv/signal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace siv {

/// One sampling patch (A_m, Gamma_m, Omega_m). `phi` has rows indexed by
/// gamma (insertion order) and columns by omega (lexicographic).
struct Patch {
  Region region;
  std::vector<Point> gamma;
  std::vector<Shift> omega;
  Matrix phi;
};

enum class SamplingMode { spanning, frame };
std::string_view to_string(SamplingMode m);
SamplingMode parse_sampling_mode(const std::string& s);

struct PatchSystem {
  Generator generator;
  SamplingMode mode = SamplingMode::spanning;
  std::vector<Patch> patches;
  /// Cached stability constant; infinity when no admissible split exists.
  std::optional<double> phi_inv_norm;

  /// Number of distinct offsets in the union of all Gamma_m.
  std::size_t density() const;

  nlohmann::json to_json() const;
  static PatchSystem from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static PatchSystem load(const std::string& path);
};

/// Rows phi(gamma - k) for the given offsets and shifts.
Patch make_patch(const Generator& g, const Region& a, std::vector<Point> gamma);

/// Outer products v v^T of the rows of `rows`, in upper-triangle coordinates.
Matrix outer_product_rows(const Matrix& rows);

/// dim W_A from quasi-random samples; `samples` defaults to 4 (#K_A)^2.
int outer_space_dim(const Generator& g, const Region& a, std::size_t samples = 0);

/// Greedy subset of `candidates` (kept in candidate order) whose outer
/// products span W_A. Throws candidates-insufficient otherwise.
std::vector<Point> select_spanning_offsets(const Generator& g, const Region& a,
                                           const std::vector<Point>& candidates);

inline constexpr std::size_t kMaxFrameVectors = 24;
inline constexpr std::uint64_t kSearchNodeBudget = std::uint64_t{1} << 24;

/// Complement property: for every split S, T of the list, the vectors of S
/// or of T span a space of dimension `target_rank`. Depth-first over the
/// splits, pruning a branch as soon as either side reaches the target.
/// Throws search-budget-exceeded after `node_budget` visited nodes.
bool complement_property(const std::vector<Vector>& vectors, int target_rank,
                         std::uint64_t node_budget = kSearchNodeBudget);

/// Real phase retrievable frame for R^n, n the common vector length.
/// Throws too-many-vectors above `max_vectors`.
bool is_phase_retrievable_frame(const std::vector<Vector>& vectors, std::size_t max_vectors = kMaxFrameVectors);

/// Rank of {v v^T} equals `target_dim`.
bool outer_products_span(const std::vector<Vector>& vectors, int target_dim);

struct NormSearchStats {
  std::uint64_t nodes = 0;
  std::vector<std::size_t> best_split;  // rows in Theta
};

/// [min over splits Theta of max(s(Theta), s(Gamma \ Theta))]^{-1} for one
/// local matrix, s the smallest singular value (0 below full column rank).
/// Splits in which neither side has full column rank are skipped.
double patch_inverse_norm(const Matrix& phi, NormSearchStats* stats = nullptr,
                          std::uint64_t node_budget = kSearchNodeBudget);

/// Maximum of patch_inverse_norm over all patches.
double phi_inverse_norm(const PatchSystem& p, std::uint64_t node_budget = kSearchNodeBudget);

struct BuildOptions {
  /// Spanning mode draws candidates from {i/q} strictly inside each region.
  int grid_q = 6;
  /// Frame mode: seeded draws per patch size before growing the size.
  int frame_retries = 50;
  /// Frame mode: initial size; 0 means 2 #K_A - 1.
  std::size_t frame_size = 0;
  double margin = 1e-3;
  bool compute_norm = true;
};

/// Builds and validates a patch system on the given regions.
/// Errors: local-dependence, candidates-insufficient, frame-search-exhausted,
/// coverage-violation, rank-deficient-patch.
PatchSystem build_patch_system(const Generator& g, const std::vector<Region>& regions, SamplingMode mode,
                               std::uint64_t seed = 0, const BuildOptions& opts = {});

/// Every k in Lambda_phi has a point x in some A_m + Z^d with phi(x) phi(x-k) != 0.
bool covers_overlaps(const Generator& g, const std::vector<Region>& regions);

/// Maximal cells: (0,1)^d for tensor B-splines, otherwise the cells of
/// (0,1)^2 cut by the box-spline mesh lines, ordered by centroid.
std::vector<Region> default_regions(const Generator& g);

double sampling_density(const PatchSystem& p);

/// Complement property of V(phi) restricted to A, via a spanning set of
/// offsets and the complement property of the vectors Phi_A(gamma).
bool local_complement_property(const Generator& g, const Region& a,
                               std::uint64_t node_budget = kSearchNodeBudget);

/// Weights d_gamma(x) with Phi_A(x) Phi_A(x)^T = sum_gamma d_gamma(x) Phi_A(gamma) Phi_A(gamma)^T.
Vector reproduction_weights(const Generator& g, const Patch& patch, const Point& x);

/// A sample y in Gamma + Z^d with phi(y - k) phi(y - k') != 0, if any.
std::optional<Point> edge_witness(const PatchSystem& p, const Shift& k, const Shift& k2);

}  // namespace siv
