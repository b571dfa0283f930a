#include "siv/generator.hpp"

#include "siv/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

namespace siv {

double eval_bspline(int order, double t) {
  if (order < 1) throw Error(ErrorCode::invalid_order, "B-spline order must be >= 1");
  if (!(t >= 0.0 && t < static_cast<double>(order))) return 0.0;
  // b[j] holds B_n(t - j) for the current n.
  std::vector<double> b(static_cast<std::size_t>(order), 0.0);
  const int cell = static_cast<int>(std::floor(t));
  b[static_cast<std::size_t>(cell)] = 1.0;
  for (int n = 2; n <= order; ++n) {
    for (int j = 0; j < order; ++j) {
      const double s = t - j;
      const double left = b[static_cast<std::size_t>(j)];
      const double right = j + 1 < order ? b[static_cast<std::size_t>(j + 1)] : 0.0;
      b[static_cast<std::size_t>(j)] = (s * left + (n - s) * right) / (n - 1);
    }
  }
  return b[0];
}

namespace {

double hat(double t) { return std::max(1.0 - std::abs(t), 0.0); }

double eval_phi0(double t) {
  return hat(4 * t - 1) + hat(4 * t - 3) + hat(4 * t - 5) - hat(4 * t - 7);
}

double eval_phi1(double x) {
  if (x >= 0 && x < 1) return x * x * x / 2;
  if (x >= 1 && x < 2) return -x * x * x + 3 * x * x - 2 * x + 0.5;
  if (x >= 2 && x < 3) return x * x * x / 2 - 3 * x * x + 5 * x - 1.5;
  return 0.0;
}

// Per-subset data for the box-spline recurrence. Subsets are bit masks over
// the columns of the direction matrix.
struct BoxTable {
  int d = 0;
  int s = 0;
  std::vector<Eigen::VectorXd> columns;
  std::vector<char> spans;               // rank(mask) == d
  std::vector<Eigen::MatrixXd> pinv;     // least-norm solver, |mask| x d
  std::vector<Eigen::MatrixXd> inverse;  // square masks only
  std::vector<double> inv_abs_det;
  // Coordinates of the probe direction in each square basis; decides
  // membership of points on parallelepiped faces.
  std::vector<Eigen::VectorXd> probe;
};

// Points on mesh lines take the limit value along this fixed direction.
Eigen::VectorXd probe_direction(int d) {
  static constexpr std::array<double, 6> v{0.5772156649015329, 0.3183098861837907, 0.1410142264820785,
                                           0.2718281828459045, 0.6931471805599453, 0.1618033988749895};
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) out(i) = v[static_cast<std::size_t>(i) % v.size()] * (1 + i / 6);
  return out;
}

BoxTable make_table(const Eigen::MatrixXi& xi) {
  BoxTable t;
  t.d = static_cast<int>(xi.rows());
  t.s = static_cast<int>(xi.cols());
  if (t.s > 20) throw Error(ErrorCode::invalid_argument, "box spline with more than 20 directions");
  for (int j = 0; j < t.s; ++j) t.columns.push_back(xi.col(j).cast<double>());
  const std::size_t masks = std::size_t{1} << t.s;
  t.spans.assign(masks, 0);
  t.pinv.resize(masks);
  t.inverse.resize(masks);
  t.inv_abs_det.assign(masks, 0.0);
  t.probe.resize(masks);
  const Eigen::VectorXd dir = probe_direction(t.d);
  for (std::size_t m = 1; m < masks; ++m) {
    const int cnt = std::popcount(m);
    if (cnt < t.d) continue;
    Eigen::MatrixXd sub(t.d, cnt);
    int c = 0;
    for (int j = 0; j < t.s; ++j) {
      if (m & (std::size_t{1} << j)) sub.col(c++) = t.columns[static_cast<std::size_t>(j)];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() < t.d) continue;
    t.spans[m] = 1;
    if (cnt == t.d) {
      t.inverse[m] = sub.inverse();
      t.probe[m] = t.inverse[m] * dir;
      t.inv_abs_det[m] = 1.0 / std::abs(sub.determinant());
    } else {
      t.pinv[m] = sub.transpose() * (sub * sub.transpose()).inverse();
    }
  }
  return t;
}

double snap(double u) {
  const double r = std::round(u);
  return std::abs(u - r) < 1e-12 ? r : u;
}

double box_recurse(const BoxTable& t, std::size_t mask, const Eigen::VectorXd& x) {
  if (!t.spans[mask]) return 0.0;
  const int cnt = std::popcount(mask);
  if (cnt == t.d) {
    const Eigen::VectorXd u = t.inverse[mask] * x;
    const Eigen::VectorXd& w = t.probe[mask];
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double ui = snap(u(i));
      if (ui < 0.0 || ui > 1.0) return 0.0;
      if (ui == 0.0 && w(i) <= 0.0) return 0.0;
      if (ui == 1.0 && w(i) >= 0.0) return 0.0;
    }
    return t.inv_abs_det[mask];
  }
  const Eigen::VectorXd coef = t.pinv[mask] * x;
  double acc = 0.0;
  int c = 0;
  for (int j = 0; j < t.s; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    if (!(mask & bit)) continue;
    const double tj = snap(coef(c++));
    const std::size_t rest = mask & ~bit;
    if (!t.spans[rest]) continue;
    const Eigen::VectorXd& xi = t.columns[static_cast<std::size_t>(j)];
    if (tj != 0.0) acc += tj * box_recurse(t, rest, x);
    if (tj != 1.0) acc += (1.0 - tj) * box_recurse(t, rest, x - xi);
  }
  return acc / static_cast<double>(cnt - t.d);
}

// Box-spline tables are kept per direction matrix and shared between copies.
const BoxTable& table_for(const Eigen::MatrixXi& xi) {
  thread_local std::vector<std::pair<Eigen::MatrixXi, std::shared_ptr<const BoxTable>>> cache;
  for (const auto& [key, table] : cache) {
    if (key.rows() == xi.rows() && key.cols() == xi.cols() && key == xi) return *table;
  }
  cache.emplace_back(xi, std::make_shared<const BoxTable>(make_table(xi)));
  return *cache.back().second;
}

int rank_of(const Eigen::MatrixXi& xi) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xi.cast<double>());
  return static_cast<int>(lu.rank());
}

}  // namespace

double eval_box_spline(const Eigen::MatrixXi& directions, std::span<const double> x) {
  if (directions.rows() == 0 || rank_of(directions) < directions.rows()) {
    throw Error(ErrorCode::degenerate_direction_matrix, "direction matrix must have full row rank");
  }
  const BoxTable& t = table_for(directions);
  Eigen::VectorXd v(t.d);
  for (int i = 0; i < t.d; ++i) v(i) = x[static_cast<std::size_t>(i)];
  return box_recurse(t, (std::size_t{1} << t.s) - 1, v);
}

bool is_unimodular(const Eigen::MatrixXi& xi) {
  const int d = static_cast<int>(xi.rows());
  const int s = static_cast<int>(xi.cols());
  std::vector<int> pick(static_cast<std::size_t>(d));
  std::iota(pick.begin(), pick.end(), 0);
  if (d > s) return false;
  while (true) {
    Eigen::MatrixXd sub(d, d);
    for (int c = 0; c < d; ++c) sub.col(c) = xi.col(pick[static_cast<std::size_t>(c)]).cast<double>();
    const double det = std::round(sub.determinant());
    if (std::abs(det) > 1.0) return false;
    int i = d - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == s - d + i) --i;
    if (i < 0) return true;
    ++pick[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < d; ++k) {
      pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
}

Generator::Generator(Kind kind, int dim, Box support, bool lli)
    : kind_(std::move(kind)), dim_(dim), support_(std::move(support)), lli_(lli) {}

Generator Generator::bspline(int order) {
  if (order < 1) throw Error(ErrorCode::invalid_order, "B-spline order must be >= 1");
  return Generator(CardinalBSpline{order}, 1, Box{{0.0}, {static_cast<double>(order)}}, true);
}

Generator Generator::tensor(std::vector<int> orders) {
  if (orders.empty()) throw Error(ErrorCode::invalid_order, "tensor B-spline needs at least one order");
  Box b;
  for (int n : orders) {
    if (n < 1) throw Error(ErrorCode::invalid_order, "B-spline order must be >= 1");
    b.lo.push_back(0.0);
    b.hi.push_back(static_cast<double>(n));
  }
  const int d = static_cast<int>(orders.size());
  return Generator(TensorBSpline{std::move(orders)}, d, std::move(b), true);
}

Generator Generator::box(Eigen::MatrixXi directions) {
  const int d = static_cast<int>(directions.rows());
  if (d == 0 || directions.cols() < d || rank_of(directions) < d) {
    throw Error(ErrorCode::degenerate_direction_matrix, "direction matrix must have full row rank");
  }
  Box b;
  for (int i = 0; i < d; ++i) {
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < directions.cols(); ++j) {
      const int v = directions(i, j);
      (v < 0 ? lo : hi) += v;
    }
    b.lo.push_back(lo);
    b.hi.push_back(hi);
  }
  const bool lli = is_unimodular(directions);
  return Generator(BoxSpline{std::move(directions)}, d, std::move(b), lli);
}

Generator Generator::fixture(const std::string& name) {
  // Neither fixture is locally linearly independent on every open set.
  if (name == "phi0") return Generator(FixtureGenerator{name}, 1, Box{{0.0}, {2.0}}, false);
  if (name == "phi1") return Generator(FixtureGenerator{name}, 1, Box{{0.0}, {3.0}}, false);
  throw Error(ErrorCode::unsupported_generator, "unknown fixture '" + name + "'");
}

Generator Generator::zwart_powell() {
  Eigen::MatrixXi xi(2, 4);
  xi << 1, 1, 0, 1,
        0, 0, 1, 1;
  return box(xi);
}

double Generator::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw Error(ErrorCode::wrong_dimension, "point dimension does not match generator");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_input, "non-finite evaluation point");
  }
  for (int i = 0; i < dim_; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (x[k] < support_.lo[k] || x[k] > support_.hi[k]) return 0.0;
  }
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CardinalBSpline>) {
          return eval_bspline(g.order, x[0]);
        } else if constexpr (std::is_same_v<T, TensorBSpline>) {
          double v = 1.0;
          for (std::size_t i = 0; i < g.orders.size() && v != 0.0; ++i) v *= eval_bspline(g.orders[i], x[i]);
          return v;
        } else if constexpr (std::is_same_v<T, BoxSpline>) {
          const BoxTable& t = table_for(g.directions);
          Eigen::VectorXd v(t.d);
          for (int i = 0; i < t.d; ++i) v(i) = x[static_cast<std::size_t>(i)];
          return box_recurse(t, (std::size_t{1} << t.s) - 1, v);
        } else {
          return g.name == "phi0" ? eval_phi0(x[0]) : eval_phi1(x[0]);
        }
      },
      kind_);
}

double Generator::evaluate_shifted(std::span<const double> x, std::span<const int> k) const {
  std::array<double, 8> buf{};
  std::vector<double> heap;
  double* y = buf.data();
  if (x.size() > buf.size()) {
    heap.resize(x.size());
    y = heap.data();
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - k[i];
  return evaluate(std::span<const double>(y, x.size()));
}

int Generator::knot_density() const {
  if (const auto* f = std::get_if<FixtureGenerator>(&kind_)) return f->name == "phi0" ? 4 : 1;
  return 1;
}

std::string Generator::id() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CardinalBSpline>) {
          os << "bspline(" << g.order << ")";
        } else if constexpr (std::is_same_v<T, TensorBSpline>) {
          os << "tensor(";
          for (std::size_t i = 0; i < g.orders.size(); ++i) os << (i ? "," : "") << g.orders[i];
          os << ")";
        } else if constexpr (std::is_same_v<T, BoxSpline>) {
          os << "box([";
          for (int i = 0; i < g.directions.rows(); ++i) {
            os << (i ? ",[" : "[");
            for (int j = 0; j < g.directions.cols(); ++j) os << (j ? "," : "") << g.directions(i, j);
            os << "]";
          }
          os << "])";
        } else {
          os << "fixture(" << g.name << ")";
        }
      },
      kind_);
  return os.str();
}

nlohmann::json Generator::to_json() const {
  return std::visit(
      [](const auto& g) -> nlohmann::json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CardinalBSpline>) {
          return {{"kind", "bspline"}, {"N", g.order}};
        } else if constexpr (std::is_same_v<T, TensorBSpline>) {
          return {{"kind", "tensor"}, {"N", g.orders}};
        } else if constexpr (std::is_same_v<T, BoxSpline>) {
          nlohmann::json rows = nlohmann::json::array();
          for (int i = 0; i < g.directions.rows(); ++i) {
            std::vector<int> row;
            for (int j = 0; j < g.directions.cols(); ++j) row.push_back(g.directions(i, j));
            rows.push_back(row);
          }
          return {{"kind", "box"}, {"Xi", rows}};
        } else {
          return {{"kind", "fixture"}, {"name", g.name}};
        }
      },
      kind_);
}

Generator Generator::from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "bspline") return bspline(j.at("N").get<int>());
    if (kind == "tensor") return tensor(j.at("N").get<std::vector<int>>());
    if (kind == "box") {
      const auto rows = j.at("Xi").get<std::vector<std::vector<int>>>();
      if (rows.empty() || rows.front().empty()) {
        throw Error(ErrorCode::degenerate_direction_matrix, "empty direction matrix");
      }
      Eigen::MatrixXi xi(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw Error(ErrorCode::parse_error, "ragged Xi");
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
          xi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
      }
      return box(xi);
    }
    if (kind == "fixture") return fixture(j.at("name").get<std::string>());
    throw Error(ErrorCode::parse_error, "unknown generator kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("generator: ") + e.what());
  }
}

Generator Generator::parse(const std::string& text) {
  std::string body = text;
  if (body.empty() || body.front() != '{') {
    std::ifstream in(text);
    if (!in) throw Error(ErrorCode::io_error, "cannot open generator file " + text);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return from_json(nlohmann::json::parse(body));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

}  // namespace siv
