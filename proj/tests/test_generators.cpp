#include "siv/error.hpp"
#include "siv/generator.hpp"
#include "siv/overlap.hpp"
#include "siv/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace siv;

namespace {

double at(const Generator& g, std::initializer_list<double> x) {
  std::vector<double> v(x);
  return g.evaluate(v);
}

// Closed-form quadratic B-spline pieces on [0,1).
double b0(double s) { return s * s / 2; }
double bm1(double s) { return (-2 * s * s + 2 * s + 1) / 2; }
double bm2(double s) { return (1 - s) * (1 - s) / 2; }

// Zwart-Powell element as the convolution of B_2(x) B_1(y) along (1,1):
// M(x,y) = int_0^1 B_2(x - t) B_1(y - t) dt, integrated piecewise exactly.
double zp_oracle(double x, double y) {
  std::vector<double> cuts{0.0, 1.0};
  for (int j = -3; j <= 3; ++j) {
    for (double c : {x - j, y - j}) {
      if (c > 0.0 && c < 1.0) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  auto f = [&](double t) {
    const double u = x - t;
    const double hat = u > 0 && u < 2 ? 1.0 - std::abs(u - 1.0) : 0.0;
    const double box = (y - t >= 0 && y - t < 1) ? 1.0 : 0.0;
    return hat * box;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-15) continue;
    // Integrand is linear on the open piece; the midpoint rule is exact.
    acc += (b - a) * f(0.5 * (a + b));
  }
  return acc;
}

std::set<Shift> as_set(const std::vector<Shift>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("cardinal B-spline values") {
  CHECK(eval_bspline(3, 0.5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(eval_bspline(2, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_bspline(3, 1.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(eval_bspline(1, 0.0) == 1.0);
  CHECK(eval_bspline(1, 1.0) == 0.0);
  CHECK(eval_bspline(4, -0.1) == 0.0);
  CHECK(eval_bspline(4, 4.0) == 0.0);
  CHECK_THROWS_AS(eval_bspline(0, 0.5), Error);
  try {
    eval_bspline(0, 0.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_order);
  }
}

TEST_CASE("quadratic B-spline matches its closed-form pieces") {
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = rng.uniform01();
    worst = std::max(worst, std::abs(eval_bspline(3, s) - b0(s)));
    worst = std::max(worst, std::abs(eval_bspline(3, s + 1) - bm1(s)));
    worst = std::max(worst, std::abs(eval_bspline(3, s + 2) - bm2(s)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("partition of unity") {
  Rng rng(5);
  for (int n = 1; n <= 6; ++n) {
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(-3.0, 3.0);
      double sum = 0.0;
      for (int k = -10; k <= 10; ++k) sum += eval_bspline(n, x - k);
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  }
  const Generator t = Generator::tensor({3, 2});
  const Generator zp = Generator::zwart_powell();
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    double st = 0.0, sz = 0.0;
    for (int a = -5; a <= 5; ++a) {
      for (int b = -5; b <= 5; ++b) {
        const std::vector<int> k{a, b};
        st += t.evaluate_shifted(x, k);
        sz += zp.evaluate_shifted(x, k);
      }
    }
    CHECK(std::abs(st - 1.0) < 1e-10);
    CHECK(std::abs(sz - 1.0) < 1e-10);
  }
}

TEST_CASE("partition of unity holds on box-spline mesh lines") {
  const Generator zp = Generator::zwart_powell();
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j <= 16; ++j) {
      const std::vector<double> x{i / 8.0, j / 8.0};
      double s = 0.0;
      for (int a = -4; a <= 4; ++a) {
        for (int b = -4; b <= 4; ++b) s += zp.evaluate_shifted(x, std::vector<int>{a, b});
      }
      CHECK(std::abs(s - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("tensor and box spline values") {
  const Generator t = Generator::tensor({3, 3});
  CHECK(at(t, {0.5, 0.5}) == doctest::Approx(0.125 * 0.125).epsilon(1e-15));
  CHECK(at(t, {0.5, 0.5}) == doctest::Approx(0.015625).epsilon(1e-15));
  CHECK(at(t, {3.5, 1.0}) == 0.0);
  CHECK(at(t, {-0.01, 1.0}) == 0.0);

  const Generator zp = Generator::zwart_powell();
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-0.5, 3.5), y = rng.uniform(-0.5, 2.5);
    worst = std::max(worst, std::abs(at(zp, {x, y}) - zp_oracle(x, y)));
  }
  CHECK(worst < 1e-12);
  CHECK(at(zp, {4.0, 1.0}) == 0.0);
  CHECK(at(zp, {1.5, -0.2}) == 0.0);
}

TEST_CASE("box spline integrates to one") {
  const Generator zp = Generator::zwart_powell();
  const double h = 1.0 / 256;
  double acc = 0.0;
  for (double x = h / 2; x < 3; x += h) {
    for (double y = h / 2; y < 2; y += h) acc += at(zp, {x, y});
  }
  CHECK(std::abs(acc * h * h - 1.0) < 1e-5);
}

TEST_CASE("generators are continuous across cell faces") {
  Rng rng(9);
  const Generator zp = Generator::zwart_powell();
  const Generator t = Generator::tensor({3, 3});
  const Generator p0 = Generator::fixture("phi0");
  const Generator p1 = Generator::fixture("phi1");
  double worst = 0.0;
  for (int i = 0; i < 400; ++i) {
    // Points on the lines x = j, y = j and x - y = j.
    const double u = rng.uniform(0.0, 3.0);
    const int j = static_cast<int>(rng.uniform(0.0, 3.0));
    const std::vector<std::vector<double>> on{{static_cast<double>(j), u * 2 / 3}, {u, static_cast<double>(j % 2)},
                                              {u, u - j + 1}};
    for (const auto& x : on) {
      for (const Generator* g : {&zp, &t}) {
        const double v = g->evaluate(x);
        for (double dx : {-1e-9, 1e-9}) {
          for (double dy : {-1e-9, 1e-9}) {
            const std::vector<double> y{x[0] + dx, x[1] + dy};
            worst = std::max(worst, std::abs(g->evaluate(y) - v));
          }
        }
      }
    }
  }
  for (int k = 0; k <= 12; ++k) {
    const double x = k / 4.0;
    for (const Generator* g : {&p0, &p1}) {
      const std::vector<double> a{x}, l{x - 1e-9}, r{x + 1e-9};
      worst = std::max(worst, std::abs(g->evaluate(a) - g->evaluate(l)));
      worst = std::max(worst, std::abs(g->evaluate(a) - g->evaluate(r)));
    }
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("supports") {
  CHECK(Generator::bspline(3).support() == Box{{0.0}, {3.0}});
  CHECK(Generator::tensor({3, 3}).support() == Box{{0.0, 0.0}, {3.0, 3.0}});
  CHECK(Generator::zwart_powell().support() == Box{{0.0, 0.0}, {3.0, 2.0}});
}

TEST_CASE("degenerate direction matrix is rejected") {
  Eigen::MatrixXi xi(2, 3);
  xi << 1, 2, 3,
        2, 4, 6;
  CHECK_THROWS_AS(Generator::box(xi), Error);
  try {
    Generator::box(xi);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_direction_matrix);
  }
  CHECK(is_unimodular(std::get<BoxSpline>(Generator::zwart_powell().kind()).directions));
  Eigen::MatrixXi scaled(2, 2);
  scaled << 2, 0,
            0, 1;
  CHECK_FALSE(is_unimodular(scaled));
}

TEST_CASE("generator JSON round trip") {
  for (const auto& g : {Generator::bspline(4), Generator::tensor({3, 2}), Generator::zwart_powell(),
                        Generator::fixture("phi0")}) {
    const Generator back = Generator::from_json(g.to_json());
    CHECK(back == g);
    CHECK(Generator::parse(g.to_json().dump()) == g);
  }
  CHECK(Generator::zwart_powell().to_json().dump() == R"({"Xi":[[1,1,0,1],[0,0,1,1]],"kind":"box"})");
  CHECK_THROWS_AS(Generator::parse(R"({"kind":"bspline"})"), Error);
  CHECK_THROWS_AS(Generator::parse(R"({"kind":"bspline","N":0})"), Error);
}

TEST_CASE("overlap sets") {
  for (int l = 1; l <= 5; ++l) {
    const auto o = overlap_set(Generator::bspline(l));
    std::vector<Shift> expect;
    for (int k = -(l - 1); k <= l - 1; ++k) expect.push_back({k});
    CHECK(o.shifts == expect);
  }
  const auto t = overlap_set(Generator::tensor({3, 3}));
  CHECK(t.shifts.size() == 25);
  for (const auto& k : t.shifts) CHECK((std::abs(k[0]) <= 2 && std::abs(k[1]) <= 2));

  const Generator zp = Generator::zwart_powell();
  const Generator p0 = Generator::fixture("phi0");
  for (const Generator* g : {&zp, &p0}) {
    const auto o = overlap_set(*g);
    const auto fine = overlap_set(*g, kGridStep / 10);
    CHECK(o.shifts == fine.shifts);
    CHECK(o.contains(Shift(static_cast<std::size_t>(g->dimension()), 0)));
    for (std::size_t i = 0; i < o.shifts.size(); ++i) {
      Shift neg = o.shifts[i];
      for (auto& v : neg) v = -v;
      CHECK(o.contains(neg));
      const auto& w = o.witnesses[i];
      CHECK(std::abs(g->evaluate(w) * g->evaluate_shifted(w, o.shifts[i])) > kZeroTol);
    }
  }
}

TEST_CASE("K_A sets") {
  const auto kt = k_set(Generator::tensor({3, 3}), Region::unit_cube(2));
  CHECK(kt.size() == 9);
  std::set<Shift> expect;
  for (int i = -2; i <= 0; ++i) {
    for (int j = -2; j <= 0; ++j) expect.insert({i, j});
  }
  CHECK(as_set(kt) == expect);

  const auto kz = k_set(Generator::zwart_powell(), Region::upper_triangle());
  CHECK(as_set(kz) == std::set<Shift>{{0, 0}, {-1, 0}, {-2, 0}, {-1, -1}, {-2, -1}});
  const auto kl = k_set(Generator::zwart_powell(), Region::lower_triangle());
  CHECK(kl.size() == 5);
}

TEST_CASE("local linear independence") {
  const Generator t = Generator::tensor({3, 3});
  CHECK(local_linear_independence(t, Region::unit_cube(2)));
  const Generator p0 = Generator::fixture("phi0");
  CHECK(local_linear_independence(p0, Region::interval(0, 1)));
  CHECK_FALSE(local_linear_independence(p0, Region::interval(0, 0.5)));
  const Generator zp = Generator::zwart_powell();
  CHECK(local_linear_independence(zp, Region::upper_triangle()));
  CHECK(local_linear_independence(zp, Region::unit_cube(2)));

  // Verdicts are stable when the sample count doubles.
  for (const auto& [g, a] : {std::pair{t, Region::unit_cube(2)}, std::pair{p0, Region::interval(0, 1)},
                             std::pair{p0, Region::interval(0, 0.5)}}) {
    const auto n = k_set(g, a).size();
    CHECK(local_linear_independence(g, a, 8 * n) == local_linear_independence(g, a, 16 * n));
  }
  CHECK_THROWS_AS(local_linear_independence(t, Region::unit_cube(2), 4), Error);
}
