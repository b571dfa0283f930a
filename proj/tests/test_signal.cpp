#include "siv/error.hpp"
#include "siv/rng.hpp"
#include "siv/signal.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace siv;

namespace {

Signal line_signal(const Generator& g, const std::vector<double>& c, int first = 0) {
  Signal f(g);
  for (std::size_t i = 0; i < c.size(); ++i) f.set({first + static_cast<int>(i)}, c[i]);
  return f;
}

// Truncations of f1 = sum_k phi0(. - k) and f2 = sum_k (-1)^k phi0(. - k).
Signal hat_combination(double a, double b, int count) {
  Signal f(Generator::fixture("phi0"));
  for (int k = 0; k < count; ++k) f.set({k}, a + b * (k % 2 == 0 ? 1.0 : -1.0));
  return f;
}

double at(const Signal& f, std::initializer_list<double> x) {
  std::vector<double> v(x);
  return f.evaluate(v);
}

}  // namespace

TEST_CASE("signal evaluation") {
  const Generator t = Generator::tensor({3, 3});
  CHECK(at(Signal(t), {0.3, 0.7}) == 0.0);
  Signal delta(t);
  delta.set({0, 0}, 1.0);
  CHECK(at(delta, {0.5, 0.5}) == doctest::Approx(0.015625).epsilon(1e-15));

  const Signal f1 = hat_combination(1.0, 0.0, 8);
  for (int j = 1; j < 8; ++j) {
    for (int i = 0; i <= 16; ++i) {
      CHECK(std::abs(at(f1, {j + 0.5 + i / 32.0})) < 1e-15);
    }
  }
  CHECK(at(f1, {3.25}) == doctest::Approx(2.0));

  // Many coefficients take the lattice-lookup path; compare with direct sums.
  Rng rng(2);
  Signal big(t);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) big.set({i, j}, rng.uniform(-1, 1));
  }
  for (int n = 0; n < 50; ++n) {
    const std::vector<double> x{rng.uniform(-1, 12), rng.uniform(-1, 12)};
    double direct = 0.0;
    for (const auto& [k, c] : big.coefficients()) direct += c * t.evaluate_shifted(x, k);
    CHECK(big.evaluate(x) == doctest::Approx(direct).epsilon(1e-14));
  }
}

TEST_CASE("signal graph") {
  const Generator b3 = Generator::bspline(3);
  const auto lambda = overlap_set(b3);

  const auto path = build_graph(line_signal(b3, {1, 2, 3}), lambda);
  CHECK(path.vertices.size() == 3);
  CHECK(path.edges.size() == 3);
  CHECK(is_connected(path));

  Signal apart(b3);
  apart.set({0}, 1.0);
  apart.set({5}, 1.0);
  const auto two = build_graph(apart, lambda);
  CHECK(two.edges.empty());
  CHECK_FALSE(is_connected(two));
  CHECK(two.components().size() == 2);

  const auto empty = build_graph(Signal(b3), lambda);
  CHECK(empty.vertices.empty());
  CHECK(is_connected(empty));

  const auto single = build_graph(line_signal(b3, {4.0}), lambda);
  CHECK(is_connected(single));

  CHECK(build_graph(line_signal(b3, {1, 0, 0, 1}), lambda).edges.empty());
  CHECK(build_graph(line_signal(b3, {1e-3, 1}), lambda, 1e-2).vertices.size() == 1);
}

TEST_CASE("graph edges move with translation") {
  const Generator t = Generator::tensor({3, 3});
  const auto lambda = overlap_set(t);
  Rng rng(4);
  Signal f(t);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (rng.uniform01() < 0.4) f.set({i, j}, rng.uniform(0.1, 1));
    }
  }
  const Shift l{3, -2};
  const auto g0 = build_graph(f, lambda);
  const auto g1 = build_graph(f.translated(l), lambda);
  REQUIRE(g0.vertices.size() == g1.vertices.size());
  CHECK(g0.edges == g1.edges);
  for (std::size_t i = 0; i < g0.vertices.size(); ++i) {
    CHECK(g1.vertices[i] == Shift{g0.vertices[i][0] + 3, g0.vertices[i][1] - 2});
  }
}

TEST_CASE("nonseparability verdicts") {
  const Generator t = Generator::tensor({3, 3});
  Signal boxed(t);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) boxed.set({i, j}, (i + j) % 2 ? 0.5 : -0.7);
  }
  CHECK(is_nonseparable(boxed) == Verdict::nonseparable);

  const Generator b3 = Generator::bspline(3);
  Signal apart(b3);
  apart.set({0}, 1.0);
  apart.set({5}, -2.0);
  CHECK(is_nonseparable(apart) == Verdict::separable);

  CHECK(is_nonseparable(hat_combination(1.0, 2.0, 10)) == Verdict::inconclusive);
  CHECK(to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("brute force separability") {
  const Generator b3 = Generator::bspline(3);
  CHECK_FALSE(brute_force_separable(line_signal(b3, {2.0})));
  CHECK_FALSE(brute_force_separable(line_signal(b3, {1, 1, 1, 1, 1})));
  Signal apart(b3);
  apart.set({0}, 1.0);
  apart.set({5}, 1.0);
  CHECK(brute_force_separable(apart));
  CHECK(brute_force_separable(line_signal(b3, {1, 0, 0, 1})));
  CHECK_FALSE(brute_force_separable(line_signal(b3, {1, 0, 1})));

  std::vector<double> many(21, 1.0);
  CHECK_THROWS_AS(brute_force_separable(line_signal(b3, many)), Error);

  // A finite truncation couples the two halves through its end coefficients.
  const Signal hat = hat_combination(1.0, 2.0, 10);
  CHECK_FALSE(brute_force_separable(hat));
  CHECK(brute_force_separable_on_window(hat, Region::interval(2, 8)));
  CHECK_FALSE(brute_force_separable_on_window(line_signal(b3, {1, 1, 1, 1, 1, 1, 1, 1}), Region::interval(2, 7)));
  CHECK(brute_force_separable_on_window(apart, Region::interval(-1, 9)));
}

TEST_CASE("consecutive-zero criterion") {
  const Generator b3 = Generator::bspline(3);
  CHECK_FALSE(consecutive_zero_check_1d(line_signal(b3, {1, 0, 0, 1})));
  CHECK(consecutive_zero_check_1d(line_signal(b3, {1, 0, 1})));
  CHECK(consecutive_zero_check_1d(line_signal(b3, {-3.0}, 7)));
  CHECK(consecutive_zero_check_1d(Signal(b3)));
  CHECK_THROWS_AS(consecutive_zero_check_1d(Signal(Generator::tensor({2, 2}))), Error);
}

TEST_CASE("connectivity, consecutive zeros and brute force agree in 1-D") {
  Rng rng(2024);
  int disagreements = 0;
  int separable = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int order = 2 + static_cast<int>(rng.uniform01() * 3);
    const Generator g = Generator::bspline(order);
    const int n = 1 + static_cast<int>(rng.uniform01() * 12);
    Signal f(g);
    for (int k = 0; k < n; ++k) {
      if (k == 0 || k == n - 1 || rng.uniform01() > 0.35) f.set({k}, rng.uniform(0.1, 1.0) * (rng.coin() ? 1 : -1));
    }
    const bool connected = is_connected(build_graph(f, overlap_set(g)));
    const bool windows = consecutive_zero_check_1d(f);
    const bool brute = !brute_force_separable(f);
    if (connected != windows || connected != brute) ++disagreements;
    if (!connected) ++separable;
  }
  CHECK(disagreements == 0);
  CHECK(separable > 20);
}

TEST_CASE("magnitude equality") {
  const Generator b3 = Generator::bspline(3);
  const Signal f = line_signal(b3, {1, -2, 0.5});
  CHECK(magnitude_equal(f, f.scaled(-1)));
  CHECK_FALSE(magnitude_equal(f, f.scaled(2)));
  const Signal plus = hat_combination(1.0, 2.0, 10);
  const Signal minus = hat_combination(1.0, -2.0, 10);
  CHECK(magnitude_equal(plus, minus, kSupGridStep, Region::interval(1, 9)));
  CHECK_FALSE(magnitude_equal(plus, minus));
}

TEST_CASE("resonance pair distances") {
  const Generator b2 = Generator::bspline(2);
  for (double alpha : {0.1, 0.01}) {
    const Signal f = line_signal(b2, {1.0, alpha, 1.0});
    const Signal g = line_signal(b2, {1.0, alpha, -1.0});
    CHECK(std::abs(sup_distance_up_to_sign(f, g) - 2.0) < 1e-9);
    CHECK(std::abs(magnitude_gap(f, g) - 2 * alpha / (1 + alpha)) < 1e-9);
  }
  const Signal f = line_signal(b2, {1.0, 0.3});
  CHECK(sup_distance_up_to_sign(f, f) == 0.0);
  CHECK(sup_distance_up_to_sign(f, f.scaled(-1)) == 0.0);
}

TEST_CASE("signal CSV round trip and errors") {
  const Generator t = Generator::tensor({3, 3});
  Rng rng(8);
  Signal f(t);
  for (int i = -2; i < 3; ++i) f.set({i, 2 * i}, rng.uniform(-1, 1));
  std::stringstream ss;
  write_signal_csv(ss, f);
  const Signal back = read_signal_csv(ss, t);
  CHECK(back.coefficients() == f.coefficients());

  std::istringstream bad("k1,k2,c\n0,0,1.0\n1,x,2\n");
  try {
    read_signal_csv(bad, t, "sig.csv");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
    CHECK(std::string(e.what()).find("sig.csv:3") != std::string::npos);
  }
  std::istringstream short_row("k1,k2,c\n0,1\n");
  CHECK_THROWS_AS(read_signal_csv(short_row, t), Error);
  std::istringstream wrong_header("k1,c\n0,1\n");
  CHECK_THROWS_AS(read_signal_csv(wrong_header, t), Error);
  std::istringstream dup("k1,k2,c\n0,1,1\n0,1,2\n");
  CHECK_THROWS_AS(read_signal_csv(dup, t), Error);
}
