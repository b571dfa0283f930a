#include "siv/harness.hpp"

#include "siv/csv.hpp"
#include "siv/error.hpp"
#include "siv/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

namespace siv {

ExperimentConfig ExperimentConfig::for_generator(const Generator& g) {
  ExperimentConfig c;
  c.generator = g;
  const int d = g.dimension();
  c.k_min.assign(static_cast<std::size_t>(d), 0);
  c.k_max.assign(static_cast<std::size_t>(d), 9);
  c.trials = 100;
  if (std::holds_alternative<BoxSpline>(g.kind())) {
    c.mode = SamplingMode::frame;
    c.trials = 1000;
    if (d == 2) c.k_max = {9, 8};
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"generator", generator.to_json()},
          {"set", set_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(set_path)},
          {"mode", std::string(to_string(mode))},
          {"set_seed", set_seed},
          {"K", {k_min, k_max}},
          {"amplitude", {amp_min, amp_max}},
          {"eps", eps},
          {"trials", trials},
          {"m0", m0},
          {"seed", seed},
          {"exact_local_solver", exact_local_solver},
          {"sup_norm", sup_norm}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse_error, "experiment config must be a JSON object");
  const Generator g = j.contains("generator") ? Generator::from_json(j.at("generator")) : Generator::tensor({3, 3});
  ExperimentConfig c = for_generator(g);
  try {
    if (j.contains("set") && !j.at("set").is_null()) c.set_path = j.at("set").get<std::string>();
    if (j.contains("mode")) c.mode = parse_sampling_mode(j.at("mode").get<std::string>());
    if (j.contains("set_seed")) c.set_seed = j.at("set_seed").get<std::uint64_t>();
    if (j.contains("K")) {
      const auto& k = j.at("K");
      c.k_min = k.at(0).get<Shift>();
      c.k_max = k.at(1).get<Shift>();
    }
    if (j.contains("amplitude")) {
      c.amp_min = j.at("amplitude").at(0).get<double>();
      c.amp_max = j.at("amplitude").at(1).get<double>();
    }
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("m0")) c.m0 = j.at("m0").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("exact_local_solver")) c.exact_local_solver = j.at("exact_local_solver").get<bool>();
    if (j.contains("sup_norm")) c.sup_norm = j.at("sup_norm").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("experiment config: ") + e.what());
  }
  const auto d = static_cast<std::size_t>(g.dimension());
  if (c.k_min.size() != d || c.k_max.size() != d) {
    throw Error(ErrorCode::wrong_dimension, "K box dimension does not match the generator");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (c.k_min[i] > c.k_max[i]) throw Error(ErrorCode::invalid_argument, "K box is empty");
  }
  if (!(c.eps >= 0) || !(c.m0 >= 0) || c.trials < 0 || !(0 <= c.amp_min && c.amp_min <= c.amp_max)) {
    throw Error(ErrorCode::invalid_argument, "experiment config out of range");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(j);
}

PatchSystem resolve_patch_system(const ExperimentConfig& cfg) {
  if (!cfg.set_path.empty()) {
    PatchSystem p = PatchSystem::load(cfg.set_path);
    if (!(p.generator == cfg.generator)) {
      throw Error(ErrorCode::invalid_argument, "patch system generator differs from the experiment generator");
    }
    return p;
  }
  return build_patch_system(cfg.generator, default_regions(cfg.generator), cfg.mode, cfg.set_seed);
}

std::vector<Shift> shift_box(const Shift& lo, const Shift& hi) {
  std::vector<Shift> out;
  if (lo.size() != hi.size()) throw Error(ErrorCode::wrong_dimension, "box corners differ in dimension");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) return out;
  }
  Shift k = lo;
  for (;;) {
    out.push_back(k);
    std::size_t i = k.size();
    for (; i > 0; --i) {
      if (k[i - 1] < hi[i - 1]) {
        ++k[i - 1];
        break;
      }
      k[i - 1] = lo[i - 1];
    }
    if (i == 0) return out;
  }
}

Signal random_signal(const Generator& g, const Shift& k_min, const Shift& k_max, std::uint64_t seed, double amp_min,
                     double amp_max) {
  Rng rng(seed);
  Signal f(g);
  for (const auto& k : shift_box(k_min, k_max)) {
    const double a = rng.uniform(amp_min, amp_max);
    f.set(k, rng.coin() ? a : -a);
  }
  return f;
}

NoisySamples sample_with_noise(const Signal& f, const PatchSystem& p, const std::vector<Shift>& shifts, double eps,
                               std::uint64_t seed) {
  if (!(eps >= 0)) throw Error(ErrorCode::invalid_argument, "noise level must be nonnegative");
  Rng rng(seed);
  NoisySamples s;
  s.shifts = shifts;
  std::sort(s.shifts.begin(), s.shifts.end());
  s.values.resize(p.patches.size());
  Point y;
  for (std::size_t m = 0; m < p.patches.size(); ++m) {
    const auto& gamma = p.patches[m].gamma;
    for (const auto& l : s.shifts) {
      Vector z(static_cast<Eigen::Index>(gamma.size()));
      for (std::size_t g = 0; g < gamma.size(); ++g) {
        y = gamma[g];
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += l[i];
        const double u = eps > 0 ? rng.uniform(-eps, eps) : 0.0;
        z(static_cast<Eigen::Index>(g)) = std::abs(f.evaluate(y)) + u;
      }
      s.values[m].push_back(std::move(z));
    }
  }
  return s;
}

Metrics metrics(const Signal& f, const Signal& fe, bool with_sup_norm) {
  Metrics out;
  std::map<Shift, int> keys;
  for (const auto& [k, c] : f.coefficients()) keys[k] |= c != 0.0 ? 1 : 0;
  for (const auto& [k, c] : fe.coefficients()) keys[k] |= c != 0.0 ? 2 : 0;
  double plus = 0.0, minus = 0.0;
  out.support_recovered = true;
  for (const auto& [k, mask] : keys) {
    const double a = fe.coefficient(k), b = f.coefficient(k);
    plus = std::max(plus, std::abs(a - b));
    minus = std::max(minus, std::abs(a + b));
    if (mask == 2) out.support_recovered = false;
  }
  out.delta = minus < plus ? -1 : 1;
  out.amplitude_error = std::min(plus, minus);
  if (with_sup_norm) out.sup_error = sup_distance_up_to_sign(fe, f);
  const auto lambda = overlap_set(f.generator());
  const auto g0 = build_graph(f, lambda);
  const auto g1 = build_graph(fe, lambda);
  out.graph_equal = g0.vertices == g1.vertices && g0.edges == g1.edges;
  return out;
}

nlohmann::json TrialResult::to_json() const {
  nlohmann::json j{{"trial", trial},
                   {"seed", seed},
                   {"phase_saved", phase_saved},
                   {"phase_conflict", phase_conflict},
                   {"e", m.amplitude_error},
                   {"delta", m.delta},
                   {"support_recovered", m.support_recovered},
                   {"graph_equal", m.graph_equal},
                   {"bound", bound},
                   {"flags", {{"threshold_ok", flags.threshold_ok}, {"noise_ok", flags.noise_ok}}}};
  j["sup_error"] = m.sup_error ? nlohmann::json(*m.sup_error) : nlohmann::json(nullptr);
  if (!error.empty()) j["error"] = error;
  return j;
}

nlohmann::json Campaign::to_json() const {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& r : results) trials.push_back(r.to_json());
  return {{"rng", std::string(kRngAlgorithm)},
          {"config", config.to_json()},
          {"summary",
           {{"trials", summary.trials},
            {"phase_saved", summary.phase_saved},
            {"phase_conflicts", summary.phase_conflicts},
            {"failures", summary.failures},
            {"phase_save_rate", summary.phase_save_rate},
            {"max_error", summary.max_error},
            {"median_error", summary.median_error},
            {"bound", summary.bound},
            {"phi_inv_norm", summary.phi_inv_norm},
            {"density", summary.density},
            {"bound_respected", summary.bound_respected}}},
          {"trials", trials}};
}

unsigned thread_count() {
  if (const char* env = std::getenv("SIV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

TrialResult run_trial(const ExperimentConfig& cfg, const PatchSystem& p, const std::vector<Shift>& shifts, int t,
                      bool keep_signals) {
  TrialResult r;
  r.trial = t;
  r.seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(t)).next();
  const Signal f = random_signal(cfg.generator, cfg.k_min, cfg.k_max, Rng::derive(r.seed, 0).next(), cfg.amp_min,
                                 cfg.amp_max);
  double f0 = std::numeric_limits<double>::infinity();
  for (const auto& [k, c] : f.coefficients()) f0 = std::min(f0, c * c);
  r.bound = stability_bound(p, cfg.eps);
  if (f0 > 0 && std::isfinite(f0)) r.flags = check_preconditions(p, f0, cfg.m0, cfg.eps);
  if (keep_signals) r.truth = f;

  ReconstructionConfig rc;
  rc.m0 = cfg.m0;
  rc.force_exact = cfg.exact_local_solver;
  rc.seed = r.seed;
  rc.eps_inf = cfg.eps;
  const NoisySamples s = sample_with_noise(f, p, shifts, cfg.eps, Rng::derive(r.seed, 1).next());
  try {
    const ReconstructionReport rep = mapset_reconstruct(s, p, rc);
    r.m = metrics(f, rep.signal, cfg.sup_norm);
    r.phase_saved = r.m.support_recovered;
    if (keep_signals) r.reconstruction = rep.signal;
  } catch (const Error& e) {
    r.phase_conflict = e.code() == ErrorCode::phase_conflict;
    r.error = e.what();
    r.m.amplitude_error = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace

Campaign run_campaign(const ExperimentConfig& cfg, const PatchSystem& system, bool keep_signals) {
  PatchSystem p = system;
  if (!p.phi_inv_norm) p.phi_inv_norm = phi_inverse_norm(p);
  const auto shifts = shift_box(cfg.k_min, cfg.k_max);

  Campaign c;
  c.config = cfg;
  c.results.resize(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::mutex fail_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      try {
        c.results[static_cast<std::size_t>(t)] = run_trial(cfg, p, shifts, t, keep_signals);
      } catch (...) {
        const std::lock_guard lock(fail_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<unsigned>(thread_count(), static_cast<unsigned>(std::max(cfg.trials, 1)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  CampaignSummary& s = c.summary;
  s.trials = cfg.trials;
  s.phi_inv_norm = *p.phi_inv_norm;
  s.density = p.density();
  s.bound = stability_bound(p, cfg.eps);
  std::vector<double> errors;
  for (const auto& r : c.results) {
    s.phase_saved += r.phase_saved;
    s.phase_conflicts += r.phase_conflict;
    if (!r.error.empty()) ++s.failures;
    if (r.error.empty()) errors.push_back(r.m.amplitude_error);
    if (r.phase_saved && cfg.eps > 0 && r.m.amplitude_error > r.bound) s.bound_respected = false;
  }
  s.phase_save_rate = cfg.trials > 0 ? static_cast<double>(s.phase_saved) / cfg.trials : 0.0;
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    s.max_error = errors.back();
    const std::size_t mid = errors.size() / 2;
    s.median_error = errors.size() % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  }
  return c;
}

Campaign run_campaign(const ExperimentConfig& cfg) { return run_campaign(cfg, resolve_patch_system(cfg)); }

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const PatchSystem& p, const std::vector<double>& eps) {
  std::vector<SweepRow> rows;
  for (double e : eps) {
    ExperimentConfig c = cfg;
    c.eps = e;
    const Campaign run = run_campaign(c, p);
    rows.push_back({e, run.summary.max_error, run.summary.median_error, run.summary.bound,
                    run.summary.phase_save_rate});
  }
  return rows;
}

void write_error_surface(const std::string& path, const Signal& f, const Signal& fe) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  const int d = f.dimension();
  for (int i = 1; i <= d; ++i) out << 'k' << i << ',';
  out << "diff\n";
  const int delta = metrics(f, fe, false).delta;
  std::map<Shift, double> keys;
  for (const auto& [k, c] : f.coefficients()) keys[k] = 0.0;
  for (const auto& [k, c] : fe.coefficients()) keys[k] = 0.0;
  for (const auto& [k, unused] : keys) {
    for (int v : k) out << v << ',';
    out << csv::format_double(fe.coefficient(k) - delta * f.coefficient(k)) << '\n';
  }
}

void write_sweep(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << "eps,max_error,median_error,bound,phase_save_rate\n";
  for (const auto& r : rows) {
    out << csv::format_double(r.eps) << ',' << csv::format_double(r.max_error) << ','
        << csv::format_double(r.median_error) << ',' << csv::format_double(r.bound) << ','
        << csv::format_double(r.phase_save_rate) << '\n';
  }
}

void emit_plot_data(const Campaign& c, const std::string& path) {
  for (const auto& r : c.results) {
    if (r.truth && r.reconstruction) {
      write_error_surface(path, *r.truth, *r.reconstruction);
      return;
    }
  }
  throw Error(ErrorCode::invalid_argument, "no trial kept its signals for plotting");
}

}  // namespace siv
