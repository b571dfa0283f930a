#include "siv/sampling.hpp"

#include "siv/error.hpp"
#include "siv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace siv {

std::string_view to_string(SamplingMode m) { return m == SamplingMode::spanning ? "spanning" : "frame"; }

SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "spanning") return SamplingMode::spanning;
  if (s == "frame") return SamplingMode::frame;
  throw Error(ErrorCode::parse_error, "mode must be 'spanning' or 'frame', got '" + s + "'");
}

std::size_t PatchSystem::density() const {
  std::set<Point> all;
  for (const auto& p : patches) all.insert(p.gamma.begin(), p.gamma.end());
  return all.size();
}

nlohmann::json PatchSystem::to_json() const {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : patches) {
    ps.push_back({{"region", siv::to_json(p.region)}, {"gamma", p.gamma}, {"omega", p.omega}});
  }
  nlohmann::json norm = nullptr;
  if (phi_inv_norm && std::isfinite(*phi_inv_norm)) norm = *phi_inv_norm;
  return {{"generator", generator.to_json()},
          {"mode", std::string(to_string(mode))},
          {"patches", ps},
          {"phi_inv_norm", norm},
          {"density", density()}};
}

PatchSystem PatchSystem::from_json(const nlohmann::json& j) {
  try {
    const Generator g = Generator::from_json(j.at("generator"));
    PatchSystem out{g, parse_sampling_mode(j.at("mode").get<std::string>()), {}, std::nullopt};
    const auto d = static_cast<std::size_t>(g.dimension());
    for (const auto& pj : j.at("patches")) {
      const Region region = region_from_json(pj.at("region"));
      if (region.lo.size() != d) throw Error(ErrorCode::parse_error, "patch region dimension mismatch");
      auto gamma = pj.at("gamma").get<std::vector<Point>>();
      auto omega = pj.at("omega").get<std::vector<Shift>>();
      for (const auto& x : gamma) {
        if (x.size() != d) throw Error(ErrorCode::parse_error, "offset dimension mismatch");
        if (!region.contains(x)) throw Error(ErrorCode::parse_error, "offset outside its region");
      }
      for (const auto& k : omega) {
        if (k.size() != d) throw Error(ErrorCode::parse_error, "shift dimension mismatch");
      }
      Patch p{region, std::move(gamma), std::move(omega), Matrix()};
      p.phi = local_matrix(g, p.gamma, p.omega);
      out.patches.push_back(std::move(p));
    }
    if (j.contains("phi_inv_norm")) {
      const auto& n = j.at("phi_inv_norm");
      out.phi_inv_norm = n.is_null() ? std::numeric_limits<double>::infinity() : n.get<double>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("patch system: ") + e.what());
  }
}

void PatchSystem::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << to_json().dump(2) << '\n';
}

PatchSystem PatchSystem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(j);
}

Patch make_patch(const Generator& g, const Region& a, std::vector<Point> gamma) {
  Patch p{a, std::move(gamma), k_set(g, a), Matrix()};
  p.phi = local_matrix(g, p.gamma, p.omega);
  return p;
}

Matrix outer_product_rows(const Matrix& rows) {
  const auto n = rows.cols();
  Matrix out(rows.rows(), n * (n + 1) / 2);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.row(i) = outer_upper(rows.row(i).transpose()).transpose();
  return out;
}

int outer_space_dim(const Generator& g, const Region& a, std::size_t samples) {
  const auto ks = k_set(g, a);
  if (ks.empty()) return 0;
  if (samples == 0) samples = 4 * ks.size() * ks.size();
  const Matrix phi = local_matrix(g, a.quasi_random_points(samples), ks);
  return numerical_rank(outer_product_rows(phi));
}

std::vector<Point> select_spanning_offsets(const Generator& g, const Region& a,
                                           const std::vector<Point>& candidates) {
  const auto ks = k_set(g, a);
  if (ks.empty()) throw Error(ErrorCode::empty_restriction, "no translate is active on the region");
  const int target = outer_space_dim(g, a);
  const auto n = static_cast<Eigen::Index>(ks.size());
  SpanBasis basis(n * (n + 1) / 2);
  std::vector<Point> chosen;
  for (const auto& x : candidates) {
    if (!a.contains(x)) throw Error(ErrorCode::invalid_argument, "candidate outside the region");
    const Matrix row = local_matrix(g, {x}, ks);
    if (basis.try_add(outer_upper(row.row(0).transpose()))) chosen.push_back(x);
    if (basis.rank() == target) return chosen;
  }
  throw Error(ErrorCode::candidates_insufficient,
              "outer products of the candidates span " + std::to_string(basis.rank()) + " of " +
                  std::to_string(target) + " dimensions");
}

namespace {

// Orthonormal basis that supports undoing the most recent addition.
class StackBasis {
 public:
  explicit StackBasis(Eigen::Index n) : q_(n, n) {}

  Eigen::Index rank() const { return r_; }

  bool push(const Vector& v) {
    if (r_ == q_.rows()) return false;
    const double nv = v.norm();
    if (nv == 0.0) return false;
    Vector res = v;
    for (int pass = 0; pass < 2; ++pass) {
      if (r_ > 0) res -= q_.leftCols(r_) * (q_.leftCols(r_).transpose() * res);
    }
    const double nr = res.norm();
    if (nr <= kSpanTol * nv) return false;
    q_.col(r_++) = res / nr;
    return true;
  }

  void pop() { --r_; }

 private:
  Matrix q_;
  Eigen::Index r_ = 0;
};

struct SplitSearch {
  const std::vector<Vector>& v;
  Eigen::Index target;
  std::uint64_t budget;
  std::uint64_t nodes = 0;
  StackBasis s, t;

  bool all_good(std::size_t i) {
    if (++nodes > budget) throw Error(ErrorCode::search_budget_exceeded, "complement property search budget exceeded");
    if (s.rank() >= target || t.rank() >= target) return true;
    const auto left = static_cast<Eigen::Index>(v.size() - i);
    if (s.rank() + left < target && t.rank() + left < target) return false;
    if (i == v.size()) return false;
    for (StackBasis* side : {&s, &t}) {
      if (i == 0 && side == &t) break;
      const bool grew = side->push(v[i]);
      const bool ok = all_good(i + 1);
      if (grew) side->pop();
      if (!ok) return false;
    }
    return true;
  }
};

}  // namespace

bool complement_property(const std::vector<Vector>& vectors, int target_rank, std::uint64_t node_budget) {
  if (target_rank <= 0) return true;
  if (vectors.empty()) return false;
  const Eigen::Index n = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != n) throw Error(ErrorCode::wrong_dimension, "frame vectors differ in length");
  }
  SplitSearch search{vectors, target_rank, node_budget, 0, StackBasis(n), StackBasis(n)};
  return search.all_good(0);
}

bool is_phase_retrievable_frame(const std::vector<Vector>& vectors, std::size_t max_vectors) {
  if (vectors.size() > max_vectors) {
    throw Error(ErrorCode::too_many_vectors,
                "frame check supports at most " + std::to_string(max_vectors) + " vectors");
  }
  if (vectors.empty()) return false;
  return complement_property(vectors, static_cast<int>(vectors.front().size()));
}

bool outer_products_span(const std::vector<Vector>& vectors, int target_dim) {
  if (vectors.empty()) return target_dim == 0;
  Matrix rows(static_cast<Eigen::Index>(vectors.size()), vectors.front().size());
  for (std::size_t i = 0; i < vectors.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  return numerical_rank(outer_product_rows(rows)) == target_dim;
}

namespace {

struct NormSearch {
  std::vector<Matrix> outer;  // r_i r_i^T
  Eigen::Index n;
  std::size_t m;
  double full_rank_floor;     // sigma above this counts as full column rank
  std::uint64_t budget;
  std::uint64_t nodes = 0;
  double best;                // incumbent min-max sigma
  std::vector<char> side;     // 0: Theta, 1: complement
  std::vector<char> best_side;
  std::vector<Matrix> ga, gb;  // Gram matrices per depth
  std::vector<std::size_t> ca, cb;

  static double sigma_of(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues()(0), 0.0));
  }

  // True when lambda_min(g) >= best^2, i.e. this side alone already
  // reaches the incumbent.
  bool reaches_best(const Matrix& g, std::size_t rows) const {
    if (rows < static_cast<std::size_t>(n)) return false;
    const Matrix shifted = g - best * best * Matrix::Identity(n, n);
    Eigen::LLT<Matrix> llt(shifted);
    return llt.info() == Eigen::Success;
  }

  void visit(std::size_t depth) {
    if (++nodes > budget) throw Error(ErrorCode::search_budget_exceeded, "split search budget exceeded");
    if (reaches_best(ga[depth], ca[depth]) || reaches_best(gb[depth], cb[depth])) return;
    if (depth == m) {
      const double sa = ca[depth] >= static_cast<std::size_t>(n) ? sigma_of(ga[depth]) : 0.0;
      const double sb = cb[depth] >= static_cast<std::size_t>(n) ? sigma_of(gb[depth]) : 0.0;
      if (std::max(sa, sb) <= full_rank_floor) return;
      const double v = std::max(sa, sb);
      if (v < best) {
        best = v;
        best_side = side;
      }
      return;
    }
    for (char s : {char{0}, char{1}}) {
      if (depth == 0 && s == 1) break;
      side[depth] = s;
      ga[depth + 1] = ga[depth];
      gb[depth + 1] = gb[depth];
      ca[depth + 1] = ca[depth];
      cb[depth + 1] = cb[depth];
      if (s == 0) {
        ga[depth + 1] += outer[depth];
        ++ca[depth + 1];
      } else {
        gb[depth + 1] += outer[depth];
        ++cb[depth + 1];
      }
      visit(depth + 1);
    }
  }
};

Matrix rows_of(const Matrix& phi, const std::vector<char>& side, char which) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < side.size(); ++i) {
    if (side[i] == which) idx.push_back(static_cast<Eigen::Index>(i));
  }
  Matrix out(static_cast<Eigen::Index>(idx.size()), phi.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = phi.row(idx[i]);
  return out;
}

}  // namespace

double patch_inverse_norm(const Matrix& phi, NormSearchStats* stats, std::uint64_t node_budget) {
  const Eigen::Index n = phi.cols();
  const auto m = static_cast<std::size_t>(phi.rows());
  if (n == 0 || numerical_rank(phi) < n) {
    throw Error(ErrorCode::rank_deficient_patch, "local matrix does not have full column rank");
  }
  Eigen::JacobiSVD<Matrix> svd(phi);
  const double smax = svd.singularValues()(0);

  NormSearch s;
  s.n = n;
  s.m = m;
  s.full_rank_floor = kRankTol * smax;
  s.budget = node_budget;
  s.best = svd.singularValues()(n - 1);
  s.side.assign(m, 0);
  s.best_side.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector r = phi.row(static_cast<Eigen::Index>(i)).transpose();
    s.outer.push_back(r * r.transpose());
  }
  s.ga.assign(m + 1, Matrix::Zero(n, n));
  s.gb.assign(m + 1, Matrix::Zero(n, n));
  s.ca.assign(m + 1, 0);
  s.cb.assign(m + 1, 0);
  s.visit(0);

  const double value = std::max(sigma_min(rows_of(phi, s.best_side, 0)), sigma_min(rows_of(phi, s.best_side, 1)));
  if (stats) {
    stats->nodes = s.nodes;
    stats->best_split.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (s.best_side[i] == 0) stats->best_split.push_back(i);
    }
  }
  return 1.0 / value;
}

double phi_inverse_norm(const PatchSystem& p, std::uint64_t node_budget) {
  double worst = 0.0;
  for (const auto& patch : p.patches) worst = std::max(worst, patch_inverse_norm(patch.phi, nullptr, node_budget));
  return worst;
}

namespace {

std::vector<Point> random_points(const Region& a, std::size_t count, double margin, Rng& rng) {
  std::vector<Point> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000000) throw Error(ErrorCode::invalid_argument, "region has no interior points");
    Point x(a.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(a.lo[i], a.hi[i]);
    if (a.contains_with_margin(x, margin)) out.push_back(std::move(x));
  }
  return out;
}

// Calls f(j) for integer j in the box [lo, hi] until f returns true.
template <typename F>
bool any_shift(const std::vector<int>& lo, const std::vector<int>& hi, F&& f) {
  const std::size_t d = lo.size();
  for (std::size_t i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) return false;
  }
  Shift j = lo;
  while (true) {
    if (f(j)) return true;
    std::size_t i = d;
    while (true) {
      if (i == 0) return false;
      --i;
      if (++j[i] <= hi[i]) break;
      j[i] = lo[i];
    }
  }
}

std::vector<Vector> row_vectors(const Matrix& m) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m.row(i).transpose());
  return out;
}

}  // namespace

PatchSystem build_patch_system(const Generator& g, const std::vector<Region>& regions, SamplingMode mode,
                               std::uint64_t seed, const BuildOptions& opts) {
  if (regions.empty()) throw Error(ErrorCode::invalid_argument, "no regions given");
  PatchSystem out{g, mode, {}, std::nullopt};
  for (std::size_t m = 0; m < regions.size(); ++m) {
    const Region& a = regions[m];
    if (a.dimension() != g.dimension()) throw Error(ErrorCode::wrong_dimension, "region dimension mismatch");
    if (!local_linear_independence(g, a)) {
      throw Error(ErrorCode::local_dependence, "generator is locally linearly dependent on region " + std::to_string(m));
    }
    const auto ks = k_set(g, a);
    const std::size_t n = ks.size();
    if (mode == SamplingMode::spanning) {
      out.patches.push_back(make_patch(g, a, select_spanning_offsets(g, a, a.lattice_points(opts.grid_q, opts.margin))));
    } else {
      const std::size_t first = opts.frame_size ? opts.frame_size : 2 * n - 1;
      const std::size_t last = std::max(first, n * (n + 1) / 2);
      bool found = false;
      for (std::size_t size = first; size <= last && !found; ++size) {
        for (int r = 0; r < opts.frame_retries && !found; ++r) {
          Rng rng = Rng::derive(seed, (static_cast<std::uint64_t>(m) << 40) | (static_cast<std::uint64_t>(size) << 20) |
                                          static_cast<std::uint64_t>(r));
          Patch p = make_patch(g, a, random_points(a, size, opts.margin, rng));
          if (numerical_rank(p.phi) < static_cast<int>(n)) continue;
          if (!complement_property(row_vectors(p.phi), static_cast<int>(n))) continue;
          out.patches.push_back(std::move(p));
          found = true;
        }
      }
      if (!found) {
        throw Error(ErrorCode::frame_search_exhausted, "no phase retrievable frame found on region " + std::to_string(m));
      }
    }
    const Patch& p = out.patches.back();
    if (numerical_rank(p.phi) < static_cast<int>(p.omega.size())) {
      throw Error(ErrorCode::rank_deficient_patch, "patch " + std::to_string(m) + " is rank deficient");
    }
  }
  if (!covers_overlaps(g, regions)) {
    throw Error(ErrorCode::coverage_violation, "regions miss an overlap set S_k");
  }
  if (opts.compute_norm) out.phi_inv_norm = phi_inverse_norm(out);
  return out;
}

bool covers_overlaps(const Generator& g, const std::vector<Region>& regions) {
  const auto lambda = overlap_set(g);
  const auto& sup = g.support();
  const std::size_t d = sup.lo.size();
  std::vector<std::vector<Point>> grids;
  for (const auto& a : regions) grids.push_back(a.interior_grid(kGridStep));
  std::vector<int> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = static_cast<int>(std::floor(sup.lo[i])) - 1;
    hi[i] = static_cast<int>(std::ceil(sup.hi[i])) + 1;
  }
  Point y(d);
  for (const auto& k : lambda.shifts) {
    bool hit = false;
    for (std::size_t m = 0; m < regions.size() && !hit; ++m) {
      for (const auto& x : grids[m]) {
        hit = any_shift(lo, hi, [&](const Shift& j) {
          for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + j[i];
          return std::abs(g.evaluate(y) * g.evaluate_shifted(y, k)) > kZeroTol;
        });
        if (hit) break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

std::vector<Region> default_regions(const Generator& g) {
  if (!g.locally_independent_on_open_sets()) {
    throw Error(ErrorCode::unsupported_generator, "maximal cells need local linear independence on open sets");
  }
  const int d = g.dimension();
  if (std::holds_alternative<CardinalBSpline>(g.kind()) || std::holds_alternative<TensorBSpline>(g.kind()) || d == 1) {
    return {Region::unit_cube(d)};
  }
  const auto* box = std::get_if<BoxSpline>(&g.kind());
  if (!box || d != 2) throw Error(ErrorCode::unsupported_generator, "no maximal-cell construction for " + g.id());

  // Mesh lines n.x = j crossing the open unit square, n normal to a direction.
  struct Line {
    std::array<double, 2> normal;
    double offset;
  };
  std::vector<Line> lines;
  std::set<std::pair<std::array<int, 2>, int>> seen;
  for (Eigen::Index c = 0; c < box->directions.cols(); ++c) {
    std::array<int, 2> nrm{-box->directions(1, c), box->directions(0, c)};
    const int gcd = std::gcd(std::abs(nrm[0]), std::abs(nrm[1]));
    nrm = {nrm[0] / gcd, nrm[1] / gcd};
    if (nrm[0] < 0 || (nrm[0] == 0 && nrm[1] < 0)) nrm = {-nrm[0], -nrm[1]};
    const int vmin = std::min({0, nrm[0], nrm[1], nrm[0] + nrm[1]});
    const int vmax = std::max({0, nrm[0], nrm[1], nrm[0] + nrm[1]});
    for (int j = vmin + 1; j < vmax; ++j) {
      if (seen.insert({nrm, j}).second) {
        lines.push_back({{static_cast<double>(nrm[0]), static_cast<double>(nrm[1])}, static_cast<double>(j)});
      }
    }
  }
  std::map<std::vector<int>, std::vector<Point>> cells;
  for (const auto& x : Region::unit_cube(2).interior_grid(1.0 / 64)) {
    std::vector<int> signs;
    bool on_line = false;
    for (const auto& l : lines) {
      const double v = l.normal[0] * x[0] + l.normal[1] * x[1] - l.offset;
      if (std::abs(v) < 1e-12) on_line = true;
      signs.push_back(v > 0 ? 1 : -1);
    }
    if (!on_line) cells[signs].push_back(x);
  }
  std::vector<std::pair<Point, Region>> out;
  for (const auto& [signs, pts] : cells) {
    Region r = Region::unit_cube(2);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto& l = lines[i];
      if (signs[i] > 0) {
        r.halfspaces.push_back(HalfSpace{{-l.normal[0], -l.normal[1]}, -l.offset});
      } else {
        r.halfspaces.push_back(HalfSpace{{l.normal[0], l.normal[1]}, l.offset});
      }
    }
    Point c{0.0, 0.0};
    for (const auto& p : pts) {
      c[0] += p[0];
      c[1] += p[1];
    }
    c[0] /= static_cast<double>(pts.size());
    c[1] /= static_cast<double>(pts.size());
    out.emplace_back(c, std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Region> regions;
  for (auto& [c, r] : out) regions.push_back(std::move(r));
  return regions;
}

double sampling_density(const PatchSystem& p) { return static_cast<double>(p.density()); }

bool local_complement_property(const Generator& g, const Region& a, std::uint64_t node_budget) {
  const auto ks = k_set(g, a);
  if (ks.empty()) throw Error(ErrorCode::empty_restriction, "no translate is active on the region");
  const std::size_t n = ks.size();
  const auto candidates = a.quasi_random_points(4 * n * n + 16);
  const auto gamma = select_spanning_offsets(g, a, candidates);
  const Matrix phi = local_matrix(g, gamma, ks);
  return complement_property(row_vectors(phi), numerical_rank(phi), node_budget);
}

Vector reproduction_weights(const Generator& g, const Patch& patch, const Point& x) {
  const Matrix at_x = local_matrix(g, {x}, patch.omega);
  const Vector target = outer_upper(at_x.row(0).transpose());
  const Matrix basis = outer_product_rows(patch.phi).transpose();
  return basis.colPivHouseholderQr().solve(target);
}

std::optional<Point> edge_witness(const PatchSystem& p, const Shift& k, const Shift& k2) {
  const Generator& g = p.generator;
  const auto& sup = g.support();
  const std::size_t d = sup.lo.size();
  for (const auto& patch : p.patches) {
    for (const auto& gamma : patch.gamma) {
      std::vector<int> lo(d), hi(d);
      bool empty = false;
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = static_cast<int>(std::ceil(std::max(k[i], k2[i]) + sup.lo[i] - gamma[i]));
        hi[i] = static_cast<int>(std::floor(std::min(k[i], k2[i]) + sup.hi[i] - gamma[i]));
        if (lo[i] > hi[i]) empty = true;
      }
      if (empty) continue;
      Point y(d);
      const bool hit = any_shift(lo, hi, [&](const Shift& j) {
        for (std::size_t i = 0; i < d; ++i) y[i] = gamma[i] + j[i];
        return std::abs(g.evaluate_shifted(y, k) * g.evaluate_shifted(y, k2)) > kZeroTol;
      });
      if (hit) return y;
    }
  }
  return std::nullopt;
}

}  // namespace siv
