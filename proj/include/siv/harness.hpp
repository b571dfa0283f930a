#pragma once

#include "siv/mapset.hpp"
#include "siv/sampling.hpp"
#include "siv/signal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace siv {

/// One Monte Carlo campaign. Missing fields take the defaults of
/// `for_generator`.
struct ExperimentConfig {
  Generator generator = Generator::tensor({3, 3});
  /// Patch system file; when empty, the system is built from `mode`.
  std::string set_path;
  SamplingMode mode = SamplingMode::spanning;
  std::uint64_t set_seed = 0;
  /// Coefficient box K = [k_min, k_max], also the shift set of the samples.
  Shift k_min{0, 0};
  Shift k_max{9, 9};
  double amp_min = 0.1;
  double amp_max = 1.0;
  double eps = 1e-4;
  int trials = 100;
  double m0 = 0.01;
  std::uint64_t seed = 0;
  bool exact_local_solver = false;
  /// Grid sup-norm of f_eps - delta f; the most expensive metric.
  bool sup_norm = true;

  /// Tensor B-splines: spanning offsets {i/6}. Box splines: frame patches on
  /// the mesh cells, K = [0,9] x [0,8]. One-dimensional: K = [0,9].
  static ExperimentConfig for_generator(const Generator& g);

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

/// Loads `set_path` or builds the default system for the configuration.
PatchSystem resolve_patch_system(const ExperimentConfig& cfg);

/// Lattice points of [lo, hi] in lexicographic order.
std::vector<Shift> shift_box(const Shift& lo, const Shift& hi);

/// Coefficients uniform on [-amp_max, -amp_min] u [amp_min, amp_max] over K.
Signal random_signal(const Generator& g, const Shift& k_min, const Shift& k_max, std::uint64_t seed,
                     double amp_min = 0.1, double amp_max = 1.0);

/// z(gamma + l) = |f(gamma + l)| + u with u uniform on [-eps, eps].
NoisySamples sample_with_noise(const Signal& f, const PatchSystem& p, const std::vector<Shift>& shifts, double eps,
                               std::uint64_t seed);

struct Metrics {
  /// min over delta of max_k |c_eps(k) - delta c(k)|
  double amplitude_error = 0.0;
  int delta = 1;
  /// min over delta of sup |f_eps - delta f| on a 1/64 grid
  std::optional<double> sup_error;
  bool support_recovered = false;
  bool graph_equal = false;
};

Metrics metrics(const Signal& f, const Signal& fe, bool with_sup_norm = true);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool phase_saved = false;
  bool phase_conflict = false;
  Metrics m;
  double bound = 0.0;
  PreconditionFlags flags;
  std::string error;
  /// Ground truth and reconstruction, kept for plot data.
  std::optional<Signal> truth;
  std::optional<Signal> reconstruction;

  nlohmann::json to_json() const;
};

struct CampaignSummary {
  int trials = 0;
  int phase_saved = 0;
  int phase_conflicts = 0;
  int failures = 0;
  double phase_save_rate = 0.0;
  double max_error = 0.0;
  double median_error = 0.0;
  double bound = 0.0;
  double phi_inv_norm = 0.0;
  std::size_t density = 0;
  bool bound_respected = true;
};

struct Campaign {
  ExperimentConfig config;
  std::vector<TrialResult> results;
  CampaignSummary summary;

  nlohmann::json to_json() const;
};

/// Worker count from SIV_THREADS, else the hardware concurrency.
unsigned thread_count();

/// Runs the trials concurrently with per-trial derived seeds; results are
/// ordered by trial index and do not depend on the thread count.
Campaign run_campaign(const ExperimentConfig& cfg, const PatchSystem& p, bool keep_signals = false);
Campaign run_campaign(const ExperimentConfig& cfg);

struct SweepRow {
  double eps = 0.0;
  double max_error = 0.0;
  double median_error = 0.0;
  double bound = 0.0;
  double phase_save_rate = 0.0;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const PatchSystem& p, const std::vector<double>& eps);

/// CSV k1..kd,diff of c_eps - delta c over the union of both supports.
void write_error_surface(const std::string& path, const Signal& f, const Signal& fe);
/// CSV eps,max_error,median_error,bound,phase_save_rate.
void write_sweep(const std::string& path, const std::vector<SweepRow>& rows);
/// Error surface of the first trial that kept its signals.
void emit_plot_data(const Campaign& c, const std::string& path);

}  // namespace siv
