#include "siv/error.hpp"
#include "siv/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace siv;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const Generator& g, double eps, int trials) {
  ExperimentConfig c = ExperimentConfig::for_generator(g);
  c.k_max.assign(c.k_max.size(), 3);
  c.eps = eps;
  c.trials = trials;
  c.m0 = eps == 0 ? 0.0 : 0.01;
  c.sup_norm = false;
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("siv_test_" + name)).string();
}

}  // namespace

TEST_CASE("shift boxes") {
  const auto b = shift_box({0, 1}, {1, 2});
  CHECK(b == std::vector<Shift>{{0, 1}, {0, 2}, {1, 1}, {1, 2}});
  CHECK(shift_box({2}, {1}).empty());
  CHECK(shift_box({-1}, {-1}).size() == 1);
  CHECK_THROWS_AS(shift_box({0}, {1, 2}), Error);
}

TEST_CASE("random signals") {
  const Generator t = Generator::tensor({3, 3});
  const Signal f = random_signal(t, {0, 0}, {9, 9}, 42);
  CHECK(f.coefficients().size() == 100);
  bool both_signs[2] = {false, false};
  for (const auto& [k, c] : f.coefficients()) {
    CHECK(std::abs(c) >= 0.1);
    CHECK(std::abs(c) <= 1.0);
    both_signs[c > 0] = true;
  }
  CHECK(both_signs[0]);
  CHECK(both_signs[1]);
  CHECK(random_signal(t, {0, 0}, {9, 9}, 42).coefficients() == f.coefficients());
  CHECK(random_signal(t, {0, 0}, {9, 9}, 43).coefficients() != f.coefficients());
  CHECK(is_connected(build_graph(f, overlap_set(t))));
  CHECK(is_nonseparable(f) == Verdict::nonseparable);
  const Generator zp = Generator::zwart_powell();
  CHECK(is_nonseparable(random_signal(zp, {0, 0}, {9, 8}, 1)) == Verdict::nonseparable);
}

TEST_CASE("noise injection") {
  const Generator t = Generator::tensor({3, 3});
  const PatchSystem p = build_patch_system(t, default_regions(t), SamplingMode::spanning, 0, {6, 50, 0, 1e-3, false});
  const Signal f = random_signal(t, {0, 0}, {5, 5}, 1);
  const auto shifts = shift_box({0, 0}, {19, 19});
  const NoisySamples clean = sample_with_noise(f, p, shifts, 0.0, 3);
  const double eps = 1e-3;
  const NoisySamples noisy = sample_with_noise(f, p, shifts, eps, 3);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t li = 0; li < shifts.size(); ++li) {
    const auto& l = shifts[li];
    for (std::size_t g = 0; g < p.patches[0].gamma.size(); ++g) {
      Point y = p.patches[0].gamma[g];
      y[0] += l[0];
      y[1] += l[1];
      const auto i = static_cast<Eigen::Index>(g);
      CHECK(clean.values[0][li](i) == std::abs(f.evaluate(y)));
      CHECK(noisy.values[0][li](i) >= -eps);
      total += std::abs(noisy.values[0][li](i) - clean.values[0][li](i));
      ++count;
    }
  }
  REQUIRE(count == 10000);
  CHECK(std::abs(total / count / (eps / 2) - 1) < 0.05);
  CHECK_THROWS_AS(sample_with_noise(f, p, shifts, -1.0, 0), Error);
}

TEST_CASE("error metrics") {
  const Generator t = Generator::tensor({3, 3});
  const Signal f = random_signal(t, {0, 0}, {3, 3}, 5);
  const Metrics same = metrics(f, f);
  CHECK(same.amplitude_error == 0.0);
  CHECK(*same.sup_error == 0.0);
  CHECK(same.support_recovered);
  CHECK(same.graph_equal);
  const Metrics flipped = metrics(f, f.scaled(-1));
  CHECK(flipped.amplitude_error == 0.0);
  CHECK(flipped.delta == -1);

  Signal extra = f;
  extra.set({7, 7}, 0.2);
  const Metrics m = metrics(f, extra, false);
  CHECK_FALSE(m.support_recovered);
  CHECK_FALSE(m.graph_equal);
  CHECK(m.amplitude_error == doctest::Approx(0.2));

  const Generator b2 = Generator::bspline(2);
  for (double alpha : {0.1, 0.01}) {
    Signal fa(b2), ga(b2);
    fa.set({0}, 1.0);
    fa.set({1}, alpha);
    fa.set({2}, 1.0);
    ga.set({0}, 1.0);
    ga.set({1}, alpha);
    ga.set({2}, -1.0);
    CHECK(std::abs(*metrics(fa, ga).sup_error - 2.0) < 1e-9);
    CHECK(std::abs(magnitude_gap(fa, ga) - 2 * alpha / (1 + alpha)) < 1e-9);
  }
}

TEST_CASE("experiment config JSON") {
  ExperimentConfig c = ExperimentConfig::for_generator(Generator::zwart_powell());
  CHECK(c.mode == SamplingMode::frame);
  CHECK(c.k_max == Shift{9, 8});
  CHECK(c.trials == 1000);
  CHECK(ExperimentConfig::for_generator(Generator::tensor({3, 3})).k_max == Shift{9, 9});
  CHECK(ExperimentConfig::for_generator(Generator::tensor({3, 3})).trials == 100);
  c.eps = 3e-4;
  c.seed = 17;
  c.trials = 7;
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::array()), Error);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"eps", -1.0}}), Error);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"K", {{0}, {9}}}}), Error);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"trials", "many"}}), Error);
  const std::string path = temp_path("config.json");
  {
    std::ofstream out(path);
    out << "{\"eps\": 1e-4,\n \"trials\": }";
  }
  try {
    ExperimentConfig::load(path);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("campaigns are deterministic and thread-count independent") {
  const Generator t = Generator::tensor({3, 3});
  const ExperimentConfig cfg = small_config(t, 1e-4, 4);
  const PatchSystem p = resolve_patch_system(cfg);
  setenv("SIV_THREADS", "1", 1);
  CHECK(thread_count() == 1);
  const std::string one = run_campaign(cfg, p).to_json().dump();
  setenv("SIV_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  const std::string three = run_campaign(cfg, p).to_json().dump();
  unsetenv("SIV_THREADS");
  CHECK(one == three);
  const Campaign c = run_campaign(cfg, p);
  CHECK(c.summary.phase_save_rate == 1.0);
  CHECK(c.summary.bound_respected);
  CHECK(c.summary.max_error <= c.summary.bound);
  for (std::size_t i = 0; i < c.results.size(); ++i) CHECK(c.results[i].trial == static_cast<int>(i));
}

TEST_CASE("noiseless campaign and failure reporting") {
  const Generator zp = Generator::zwart_powell();
  const ExperimentConfig clean = small_config(zp, 0.0, 3);
  const PatchSystem p = resolve_patch_system(clean);
  const Campaign c = run_campaign(clean, p);
  for (const auto& r : c.results) {
    CHECK(r.error.empty());
    CHECK(r.m.amplitude_error < 1e-8);
  }

  ExperimentConfig loud = small_config(zp, 5e-2, 3);
  const Campaign bad = run_campaign(loud, p);
  CHECK(bad.summary.trials == 3);
  CHECK(bad.summary.phase_conflicts + bad.summary.phase_saved <= 3);
  CHECK(bad.summary.phase_save_rate < 1.0);
  for (const auto& r : bad.results) {
    if (r.phase_conflict) CHECK(r.error.find("phase-conflict") != std::string::npos);
  }
}

TEST_CASE("plot data") {
  const Generator t = Generator::tensor({3, 3});
  const ExperimentConfig cfg = small_config(t, 0.0, 1);
  const PatchSystem p = resolve_patch_system(cfg);
  const Campaign c = run_campaign(cfg, p, true);
  const std::string surface = temp_path("surface.csv");
  emit_plot_data(c, surface);
  std::istringstream lines(read_file(surface));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "k1,k2,diff");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::abs(std::stod(line.substr(line.rfind(',') + 1))) < 1e-8);
  }
  CHECK(rows >= 16);
  CHECK_THROWS_AS(emit_plot_data(run_campaign(cfg, p), surface), Error);

  ExperimentConfig sweep_cfg = small_config(t, 0.0, 2);
  sweep_cfg.m0 = 0.01;
  const auto rows_sweep = run_sweep(sweep_cfg, p, {1e-5, 1e-4, 1e-3});
  REQUIRE(rows_sweep.size() == 3);
  for (const auto& r : rows_sweep) {
    CHECK(r.max_error <= r.bound);
    CHECK(r.bound == doctest::Approx(stability_bound(p, r.eps)));
  }
  const std::string sweep = temp_path("sweep.csv");
  write_sweep(sweep, rows_sweep);
  CHECK(read_file(sweep).rfind("eps,max_error,median_error,bound,phase_save_rate\n", 0) == 0);
}
