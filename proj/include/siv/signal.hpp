#pragma once

#include "siv/generator.hpp"
#include "siv/overlap.hpp"
#include "siv/region.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace siv {

/// f = sum_k c(k) phi(. - k) with finitely many nonzero c(k).
class Signal {
 public:
  explicit Signal(Generator g, std::map<Shift, double> coefficients = {});

  const Generator& generator() const { return generator_; }
  int dimension() const { return generator_.dimension(); }
  const std::map<Shift, double>& coefficients() const { return coeffs_; }

  double coefficient(const Shift& k) const;
  void set(const Shift& k, double value);

  double evaluate(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return evaluate(x); }

  /// Smallest box containing the supports of all translates with c(k) != 0.
  std::optional<Box> support_hull() const;

  Signal scaled(double s) const;
  /// f(. - l): coefficients move from k to k + l.
  Signal translated(const Shift& l) const;
  Signal restricted(const std::vector<Shift>& keep) const;

 private:
  Generator generator_;
  std::map<Shift, double> coeffs_;
};

/// Signal CSV: header k1,...,kd,c then one row per coefficient.
void write_signal_csv(std::ostream& os, const Signal& f);
Signal read_signal_csv(std::istream& is, const Generator& g, const std::string& source = "<signal>");
Signal load_signal(const std::string& path, const Generator& g);
void save_signal(const std::string& path, const Signal& f);

/// Undirected graph on V_f with an edge when k - k' lies in Lambda_phi.
struct SignalGraph {
  std::vector<Shift> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j

  std::vector<std::vector<std::size_t>> adjacency() const;
  /// Connected components as vertex index lists, ordered by smallest index.
  std::vector<std::vector<std::size_t>> components() const;
  bool has_edge(const Shift& a, const Shift& b) const;
};

SignalGraph build_graph(const Signal& f, const OverlapSet& lambda, double coeff_tol = 0.0);
bool is_connected(const SignalGraph& g);

enum class Verdict { nonseparable, separable, inconclusive };
std::string_view to_string(Verdict v);

Verdict is_nonseparable(const Signal& f, double coeff_tol = 0.0);

inline constexpr std::size_t kMaxBruteForceVertices = 20;
inline constexpr double kSupGridStep = 1.0 / 64;

/// Exhaustive search over bipartitions V_f = W u W' for f_W * f_W' = 0 on
/// the grid covering the support hull.
bool brute_force_separable(const Signal& f, double grid_step = kSupGridStep);

/// Separability of f restricted to `window`: the grid points of `window`
/// where f != 0 fall into connected runs; some nontrivial union U of runs
/// must make f * chi_U agree with an element of V(phi) on the window.
/// Suited to truncations of infinite periodic signals.
bool brute_force_separable_on_window(const Signal& f, const Region& window, double grid_step = kSupGridStep);

/// The d = 1 criterion through windows of L - 1 consecutive coefficients,
/// for a generator supported on [0, L].
bool consecutive_zero_check_1d(const Signal& f);

/// Grid check of | |f| - |g| | < tol * scale over the union of support hulls,
/// or over `window` when given.
bool magnitude_equal(const Signal& f, const Signal& g, double grid_step = kSupGridStep,
                     const std::optional<Region>& window = std::nullopt, double tol = 1e-10);

/// Supremum of |h| over `box`: grid scan followed by compass refinement of
/// the largest grid values.
double sup_norm(const std::function<double(std::span<const double>)>& h, const Box& box,
                double grid_step = kSupGridStep);

/// min over delta in {-1, 1} of ||f - delta g||_inf.
double sup_distance_up_to_sign(const Signal& f, const Signal& g, double grid_step = kSupGridStep);
/// || |f| - |g| ||_inf.
double magnitude_gap(const Signal& f, const Signal& g, double grid_step = kSupGridStep);

}  // namespace siv
