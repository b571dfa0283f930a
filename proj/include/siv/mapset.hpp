#pragma once

#include "siv/linalg.hpp"
#include "siv/sampling.hpp"
#include "siv/signal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace siv {

/// Magnitude samples z(gamma + l) for gamma in Gamma_m and l in K.
/// values[m][i] holds the samples of patch m at shift K[i], in gamma order.
struct NoisySamples {
  std::vector<Shift> shifts;
  std::vector<std::vector<Vector>> values;

  std::size_t shift_index(const Shift& l) const;
};

/// CSV with header m,l1..ld,g1..gd,z. Offsets are matched against the
/// patch system exactly.
void write_samples_csv(std::ostream& os, const NoisySamples& s, const PatchSystem& p);
NoisySamples read_samples_csv(std::istream& is, const PatchSystem& p, const std::string& source = "<samples>");
NoisySamples load_samples(const std::string& path, const PatchSystem& p);
void save_samples(const std::string& path, const NoisySamples& s, const PatchSystem& p);

struct ReconstructionConfig {
  double m0 = 0.01;
  std::size_t exact_max_rows = 20;
  int restarts = 16;
  int iterations = 200;
  double tol = 1e-12;
  bool force_exact = false;
  /// Above exact_max_rows, the alternating-minimization result is certified
  /// by a branch and bound over sign patterns.
  bool certify = true;
  std::uint64_t certify_node_budget = std::uint64_t{1} << 22;
  std::uint64_t seed = 0;
  /// Known noise level and coefficient floor, used only for reporting.
  std::optional<double> eps_inf;
  std::optional<double> f0;

  double eta() const;
};

enum class SolverKind { exact, altmin, certified, altmin_uncertified };
std::string_view to_string(SolverKind k);

struct LocalSolution {
  Vector c;
  std::vector<int> signs;
  /// sum over rows of (|Phi c| - z)^2
  double residual = 0.0;
  SolverKind solver = SolverKind::exact;
  std::uint64_t nodes = 0;
};

/// Projector-residual scan over all sign patterns with the first sign fixed.
LocalSolution local_minimize_exact(const Matrix& phi, const Vector& z);

/// Alternating minimization from the all-positive start and `restarts`
/// random sign starts drawn from `seed`.
LocalSolution local_minimize_altmin(const Matrix& phi, const Vector& z, int restarts, int iterations, double tol,
                                    std::uint64_t seed);

/// Branch and bound over sign patterns, seeded with an incumbent. Falls back
/// to the incumbent when the node budget runs out.
LocalSolution local_minimize_branch_and_bound(const Matrix& phi, const Vector& z, const LocalSolution& incumbent,
                                              std::uint64_t node_budget);

/// Dispatches on the row count and configuration. Errors: rank-deficient,
/// non-finite-input.
LocalSolution local_minimize(const Matrix& phi, const Vector& z, const ReconstructionConfig& cfg,
                             std::uint64_t seed);

struct PatchSolution {
  std::size_t patch = 0;
  Shift l;
  std::vector<Shift> shifts;  // l + Omega_m
  Vector c;
  double residual = 0.0;
  /// Entrywise forward-error bound of c from the local solve.
  double tolerance = 0.0;
  int sign = 1;
  SolverKind solver = SolverKind::exact;
};

struct PhaseSummary {
  std::size_t patches = 0;
  std::size_t zero_patches = 0;
  std::size_t edges = 0;
  std::size_t components = 0;
};

/// Assigns signs so that signed inner products over common shifts are
/// >= -M0 for every pair, up to the rounding allowance of each pair. Throws phase-conflict when no such choice is
/// reachable from a spanning forest of the |<c_i, c_j>| > M0 graph.
PhaseSummary adjust_phases(std::vector<PatchSolution>& solutions, double m0);

/// Averages signed solutions; the denominator counts every patch window
/// l + Omega_m containing k.
std::map<Shift, double> sew(const std::vector<PatchSolution>& solutions);

std::map<Shift, double> hard_threshold(const std::map<Shift, double>& d, double eta);

double stability_bound(const PatchSystem& p, double eps_inf);

struct PreconditionFlags {
  bool threshold_ok = false;  // M0 <= 2 F0 / 9
  bool noise_ok = false;      // 8 #Gamma ||Phi^-1||^2 eps^2 <= M0
};
PreconditionFlags check_preconditions(const PatchSystem& p, double f0, double m0, double eps_inf);

struct ReconstructionReport {
  Signal signal;
  std::vector<PatchSolution> solutions;
  PhaseSummary phases;
  std::optional<double> bound;
  std::optional<PreconditionFlags> flags;
  std::optional<bool> noise_flag;
  std::uint64_t seed = 0;
  double m0 = 0.0;

  nlohmann::json to_json() const;
};

/// Minimization, phase adjustment, sewing and thresholding over K x patches.
ReconstructionReport mapset_reconstruct(const NoisySamples& samples, const PatchSystem& p,
                                        const ReconstructionConfig& cfg);

}  // namespace siv
