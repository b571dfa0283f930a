#include "siv/error.hpp"
#include "siv/rng.hpp"
#include "siv/sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace siv;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Direct enumeration of every split, independent of the pruned search.
double inverse_norm_oracle(const Matrix& phi) {
  const auto m = static_cast<int>(phi.rows());
  const auto n = phi.cols();
  auto smin = [&](const std::vector<int>& rows) {
    if (static_cast<Eigen::Index>(rows.size()) < n) return 0.0;
    Matrix sub(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = phi.row(rows[i]);
    const Eigen::JacobiSVD<Matrix> svd(sub);
    return svd.singularValues()(n - 1);
  };
  const double floor = 1e-9 * Eigen::JacobiSVD<Matrix>(phi).singularValues()(0);
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> a, b;
    for (int i = 0; i < m; ++i) ((mask >> i) & 1 ? a : b).push_back(i);
    const double big = std::max(smin(a), smin(b));
    if (big > floor) best = std::min(best, big);
  }
  return 1.0 / best;
}

Signal random_box_signal(const Generator& g, Rng& rng, int lo, int hi) {
  Signal f(g);
  for (int i = lo; i <= hi; ++i) {
    for (int j = lo; j <= hi; ++j) f.set({i, j}, rng.uniform(-1, 1));
  }
  return f;
}

}  // namespace

TEST_CASE("outer product space dimensions") {
  CHECK(outer_space_dim(Generator::tensor({3, 3}), Region::unit_cube(2)) == 25);
  CHECK(outer_space_dim(Generator::zwart_powell(), Region::upper_triangle()) == 13);
  CHECK(outer_space_dim(Generator::zwart_powell(), Region::lower_triangle()) == 13);
  CHECK(outer_space_dim(Generator::bspline(1), Region::interval(0, 1)) == 1);
  CHECK(outer_space_dim(Generator::bspline(3), Region::interval(0, 1)) == 5);
}

TEST_CASE("spanning offsets") {
  const Generator t = Generator::tensor({3, 3});
  const Region unit = Region::unit_cube(2);
  const auto grid = unit.lattice_points(6, 1e-3);
  REQUIRE(grid.size() == 25);
  const auto chosen = select_spanning_offsets(t, unit, grid);
  CHECK(chosen == grid);

  const auto single = select_spanning_offsets(Generator::bspline(1), Region::interval(0, 1), {{0.3}, {0.6}});
  CHECK(single.size() == 1);

  for (int order = 2; order <= 4; ++order) {
    std::vector<Point> pts;
    for (int i = 1; i <= 2 * order - 1; ++i) pts.push_back({i / (2.0 * order)});
    const Generator b = Generator::bspline(order);
    const auto sel = select_spanning_offsets(b, Region::interval(0, 1), pts);
    CHECK(static_cast<int>(sel.size()) == outer_space_dim(b, Region::interval(0, 1)));
    CHECK(sel.size() <= static_cast<std::size_t>(order * (order + 1) / 2));
  }

  CHECK_THROWS_AS(select_spanning_offsets(t, unit, {{0.5, 0.5}, {0.25, 0.5}}), Error);
}

TEST_CASE("cubic fixture frame that does not span its outer products") {
  const Generator phi1 = Generator::fixture("phi1");
  const std::vector<Shift> shifts{{0}, {-1}, {-2}};
  std::vector<Point> pts;
  for (int m = 0; m < 5; ++m) pts.push_back({m / 5.0});
  const Matrix columns = local_matrix(phi1, pts, shifts).transpose();
  const int expected[3][5] = {{0, 1, 8, 27, 64}, {125, 173, 209, 221, 197}, {125, 76, 33, 2, -11}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) CHECK(columns(i, j) * 250 == doctest::Approx(expected[i][j]).epsilon(1e-13));
  }
  std::vector<Vector> vectors;
  for (int j = 0; j < 5; ++j) vectors.push_back(columns.col(j));
  CHECK(is_phase_retrievable_frame(vectors));
  CHECK_FALSE(outer_products_span(vectors, 6));
  CHECK(outer_products_span({vec({2.0})}, 1));
}

TEST_CASE("complement property") {
  // Any two of the three vectors span the plane, so every split has a spanning side.
  CHECK(is_phase_retrievable_frame({vec({1, 0}), vec({0, 1}), vec({1, 1})}));
  CHECK_FALSE(is_phase_retrievable_frame({vec({1, 0}), vec({0, 1})}));
  Rng rng(3);
  for (int n = 2; n <= 5; ++n) {
    std::vector<Vector> v;
    for (int i = 0; i < 2 * n - 2; ++i) {
      Vector x(n);
      for (int j = 0; j < n; ++j) x(j) = rng.uniform(-1, 1);
      v.push_back(x);
    }
    CHECK_FALSE(is_phase_retrievable_frame(v));
    Vector extra(n);
    for (int j = 0; j < n; ++j) extra(j) = rng.uniform(-1, 1);
    v.push_back(extra);
    CHECK(is_phase_retrievable_frame(v));
  }
  std::vector<Vector> many(25, vec({1.0, 0.0}));
  CHECK_THROWS_AS(is_phase_retrievable_frame(many), Error);
  CHECK(complement_property({vec({1, 0}), vec({2, 0})}, 1));
}

TEST_CASE("stability constant") {
  CHECK(patch_inverse_norm(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  Rng rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const int rows = 5 + trial;
    const int cols = 2 + trial % 2;
    Matrix phi(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) phi(i, j) = rng.uniform(-1, 1);
    }
    CHECK(patch_inverse_norm(phi) == doctest::Approx(inverse_norm_oracle(phi)).epsilon(1e-10));
  }

  // Adding a row never increases the constant.
  Matrix phi(6, 3);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 3; ++j) phi(i, j) = rng.uniform(-1, 1);
  }
  double prev = patch_inverse_norm(phi);
  for (int extra = 0; extra < 4; ++extra) {
    Matrix bigger(phi.rows() + 1, 3);
    bigger.topRows(phi.rows()) = phi;
    for (int j = 0; j < 3; ++j) bigger(phi.rows(), j) = rng.uniform(-1, 1);
    phi = bigger;
    const double now = patch_inverse_norm(phi);
    CHECK(now <= prev * (1 + 1e-12));
    prev = now;
  }
  Matrix wide(20, 5);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 5; ++j) wide(i, j) = rng.uniform(-1, 1);
  }
  CHECK_THROWS_AS(patch_inverse_norm(wide, nullptr, 4), Error);
}

TEST_CASE("tensor spanning system") {
  const Generator t = Generator::tensor({3, 3});
  const PatchSystem p = build_patch_system(t, default_regions(t), SamplingMode::spanning);
  REQUIRE(p.patches.size() == 1);
  CHECK(p.density() == 25);
  CHECK(sampling_density(p) == 25.0);
  CHECK(p.patches[0].omega.size() == 9);
  CHECK(std::abs(*p.phi_inv_norm / 2796.2 - 1) < 0.01);
  CHECK(p.density() <= 9 * 10 / 2);

  const auto j = p.to_json();
  const PatchSystem back = PatchSystem::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.patches[0].gamma == p.patches[0].gamma);
  CHECK(back.patches[0].phi == p.patches[0].phi);
  CHECK(back.phi_inv_norm == p.phi_inv_norm);
  CHECK(back.to_json().dump() == j.dump());
}

TEST_CASE("frame systems") {
  const Generator zp = Generator::zwart_powell();
  const auto regions = default_regions(zp);
  REQUIRE(regions.size() == 2);
  const PatchSystem p = build_patch_system(zp, regions, SamplingMode::frame, 0);
  REQUIRE(p.patches.size() == 2);
  for (const auto& patch : p.patches) {
    CHECK(patch.omega == k_set(zp, patch.region));
    CHECK(numerical_rank(patch.phi) == static_cast<int>(patch.omega.size()));
    std::vector<Vector> rows;
    for (Eigen::Index i = 0; i < patch.phi.rows(); ++i) rows.push_back(patch.phi.row(i).transpose());
    CHECK(is_phase_retrievable_frame(rows));
    CHECK(patch.gamma.size() == 9);
    for (const auto& x : patch.gamma) CHECK(patch.region.contains(x));
  }
  const PatchSystem again = build_patch_system(zp, regions, SamplingMode::frame, 0);
  CHECK(again.to_json() == p.to_json());

  const Generator t = Generator::tensor({3, 3});
  const PatchSystem tf = build_patch_system(t, default_regions(t), SamplingMode::frame, 1, {6, 50, 0, 1e-3, false});
  CHECK(tf.patches[0].gamma.size() >= 17);
  CHECK(tf.patches[0].gamma.size() <= 19);
}

TEST_CASE("regions, coverage and local dependence") {
  const Generator zp = Generator::zwart_powell();
  CHECK(default_regions(Generator::tensor({3, 3})).size() == 1);
  CHECK(default_regions(Generator::bspline(3))[0].hi == std::vector<double>{1.0});
  CHECK(covers_overlaps(zp, default_regions(zp)));
  CHECK(covers_overlaps(Generator::tensor({3, 3}), {Region::unit_cube(2)}));
  CHECK_THROWS_AS(default_regions(Generator::fixture("phi0")), Error);
  try {
    build_patch_system(Generator::fixture("phi0"), {Region::interval(0, 0.5)}, SamplingMode::spanning);
    FAIL("expected local dependence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::local_dependence);
  }
}

TEST_CASE("local complement property") {
  CHECK(local_complement_property(Generator::tensor({3, 3}), Region::unit_cube(2)));
  CHECK_FALSE(local_complement_property(Generator::zwart_powell(), Region::unit_cube(2)));
  CHECK(local_complement_property(Generator::zwart_powell(), Region::upper_triangle()));
  CHECK(local_complement_property(Generator::bspline(3), Region::interval(0, 1)));
}

TEST_CASE("reproduction identity on the tensor spanning system") {
  const Generator t = Generator::tensor({3, 3});
  const PatchSystem p = build_patch_system(t, default_regions(t), SamplingMode::spanning, 0, {6, 50, 0, 1e-3, false});
  const Patch& patch = p.patches[0];
  Rng rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Signal f = random_box_signal(t, rng, -2, 0);
    const Point x{rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
    const Vector d = reproduction_weights(t, patch, x);
    double rhs = 0.0;
    for (std::size_t g = 0; g < patch.gamma.size(); ++g) {
      const double v = f.evaluate(patch.gamma[g]);
      rhs += d(static_cast<Eigen::Index>(g)) * v * v;
    }
    const double lhs = f.evaluate(x) * f.evaluate(x);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("every signal edge has a sample witness") {
  const Generator zp = Generator::zwart_powell();
  const PatchSystem p = build_patch_system(zp, default_regions(zp), SamplingMode::frame, 0, {6, 50, 0, 1e-3, false});
  const auto lambda = overlap_set(zp);
  Rng rng(5);
  Signal f(zp);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) f.set({i, j}, rng.uniform(0.1, 1));
  }
  const auto graph = build_graph(f, lambda);
  REQUIRE(is_connected(graph));
  for (const auto& [a, b] : graph.edges) {
    const auto y = edge_witness(p, graph.vertices[a], graph.vertices[b]);
    REQUIRE(y.has_value());
    CHECK(std::abs(zp.evaluate_shifted(*y, graph.vertices[a]) * zp.evaluate_shifted(*y, graph.vertices[b])) > 0);
  }
}

TEST_CASE("patch system files reject malformed input") {
  const Generator t = Generator::tensor({3, 3});
  const PatchSystem p = build_patch_system(t, default_regions(t), SamplingMode::spanning, 0, {6, 50, 0, 1e-3, false});
  auto j = p.to_json();
  j["patches"][0]["gamma"][0] = {2.0, 0.5};
  CHECK_THROWS_AS(PatchSystem::from_json(j), Error);
  auto k = p.to_json();
  k["patches"][0]["gamma"][0] = {0.5};
  CHECK_THROWS_AS(PatchSystem::from_json(k), Error);
  CHECK_THROWS_AS(PatchSystem::load("/nonexistent/set.json"), Error);
}
