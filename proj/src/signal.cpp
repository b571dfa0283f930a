#include "siv/signal.hpp"

#include "siv/csv.hpp"
#include "siv/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

namespace siv {

Signal::Signal(Generator g, std::map<Shift, double> coefficients)
    : generator_(std::move(g)), coeffs_(std::move(coefficients)) {
  for (const auto& [k, c] : coeffs_) {
    if (static_cast<int>(k.size()) != generator_.dimension()) {
      throw Error(ErrorCode::wrong_dimension, "coefficient index dimension does not match generator");
    }
    if (!std::isfinite(c)) throw Error(ErrorCode::non_finite_input, "non-finite coefficient");
  }
}

double Signal::coefficient(const Shift& k) const {
  const auto it = coeffs_.find(k);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void Signal::set(const Shift& k, double value) {
  if (static_cast<int>(k.size()) != dimension()) {
    throw Error(ErrorCode::wrong_dimension, "coefficient index dimension does not match generator");
  }
  if (!std::isfinite(value)) throw Error(ErrorCode::non_finite_input, "non-finite coefficient");
  coeffs_[k] = value;
}

double Signal::evaluate(std::span<const double> x) const {
  const int d = dimension();
  const auto& sup = generator_.support();
  std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  long long candidates = 1;
  for (int i = 0; i < d; ++i) {
    const auto u = static_cast<std::size_t>(i);
    lo[u] = static_cast<int>(std::ceil(x[u] - sup.hi[u]));
    hi[u] = static_cast<int>(std::floor(x[u] - sup.lo[u]));
    candidates *= std::max(0, hi[u] - lo[u] + 1);
  }
  double acc = 0.0;
  if (static_cast<long long>(coeffs_.size()) <= candidates) {
    for (const auto& [k, c] : coeffs_) {
      if (c != 0.0) acc += c * generator_.evaluate_shifted(x, k);
    }
    return acc;
  }
  if (candidates == 0) return 0.0;
  Shift k = lo;
  while (true) {
    const auto it = coeffs_.find(k);
    if (it != coeffs_.end() && it->second != 0.0) acc += it->second * generator_.evaluate_shifted(x, k);
    int i = d - 1;
    while (i >= 0) {
      const auto u = static_cast<std::size_t>(i);
      if (++k[u] <= hi[u]) break;
      k[u] = lo[u];
      --i;
    }
    if (i < 0) break;
  }
  return acc;
}

std::optional<Box> Signal::support_hull() const {
  std::optional<Box> out;
  const auto& sup = generator_.support();
  for (const auto& [k, c] : coeffs_) {
    if (c == 0.0) continue;
    if (!out) {
      out = Box{sup.lo, sup.hi};
      for (std::size_t i = 0; i < k.size(); ++i) {
        out->lo[i] += k[i];
        out->hi[i] += k[i];
      }
      continue;
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
      out->lo[i] = std::min(out->lo[i], sup.lo[i] + k[i]);
      out->hi[i] = std::max(out->hi[i], sup.hi[i] + k[i]);
    }
  }
  return out;
}

Signal Signal::scaled(double s) const {
  Signal out(generator_);
  for (const auto& [k, c] : coeffs_) out.coeffs_[k] = s * c;
  return out;
}

Signal Signal::translated(const Shift& l) const {
  Signal out(generator_);
  for (const auto& [k, c] : coeffs_) {
    Shift m = k;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += l[i];
    out.coeffs_[m] = c;
  }
  return out;
}

Signal Signal::restricted(const std::vector<Shift>& keep) const {
  Signal out(generator_);
  for (const auto& k : keep) {
    const auto it = coeffs_.find(k);
    if (it != coeffs_.end()) out.coeffs_[k] = it->second;
  }
  return out;
}

namespace {

// Points lo + i*h, i = 0..n, including both ends of every side.
std::vector<Point> box_lattice(const Box& box, double h) {
  const std::size_t d = box.lo.size();
  std::vector<int> counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    counts[i] = static_cast<int>(std::ceil((box.hi[i] - box.lo[i]) / h - 1e-9)) + 1;
  }
  std::vector<Point> out;
  std::vector<int> idx(d, 0);
  Point x(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = std::min(box.lo[i] + idx[i] * h, box.hi[i]);
    out.push_back(x);
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
    if (d == 0) return out;
  }
}

std::optional<Box> merge(const std::optional<Box>& a, const std::optional<Box>& b) {
  if (!a) return b;
  if (!b) return a;
  Box out = *a;
  for (std::size_t i = 0; i < out.lo.size(); ++i) {
    out.lo[i] = std::min(out.lo[i], b->lo[i]);
    out.hi[i] = std::max(out.hi[i], b->hi[i]);
  }
  return out;
}

std::vector<int> lattice_counts(const Box& box, double h) {
  std::vector<int> counts(box.lo.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] = static_cast<int>(std::ceil((box.hi[i] - box.lo[i]) / h - 1e-9)) + 1;
  }
  return counts;
}

Point lattice_point(const Box& box, double h, const std::vector<int>& counts, std::size_t index) {
  Point x(counts.size());
  for (std::size_t i = counts.size(); i > 0; --i) {
    const auto c = static_cast<std::size_t>(counts[i - 1]);
    x[i - 1] = std::min(box.lo[i - 1] + static_cast<double>(index % c) * h, box.hi[i - 1]);
    index /= c;
  }
  return x;
}

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

// Values of f on the box lattice by superposing one tabulated copy of the
// generator per coefficient. Requires step = 1/q and box corners on the
// 1/q grid; returns nullopt otherwise.
std::optional<std::vector<double>> lattice_values(const Signal& f, const Box& box, double h) {
  const double qd = 1.0 / h;
  if (!near_integer(qd)) return std::nullopt;
  const int q = static_cast<int>(std::round(qd));
  const auto d = box.lo.size();
  const Box& sup = f.generator().support();
  std::vector<long> lo(d), glo(d), glen(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!near_integer(box.lo[i] * q) || !near_integer(box.hi[i] * q) || !near_integer(sup.lo[i] * q) ||
        !near_integer(sup.hi[i] * q)) {
      return std::nullopt;
    }
    lo[i] = std::lround(box.lo[i] * q);
    glo[i] = std::lround(sup.lo[i] * q);
    glen[i] = std::lround(sup.hi[i] * q) - glo[i] + 1;
  }
  const auto counts = lattice_counts(box, h);
  std::size_t total = 1, table_size = 1;
  for (std::size_t i = 0; i < d; ++i) {
    total *= static_cast<std::size_t>(counts[i]);
    table_size *= static_cast<std::size_t>(glen[i]);
  }
  std::vector<double> table(table_size);
  {
    Point x(d);
    for (std::size_t t = 0; t < table_size; ++t) {
      std::size_t r = t;
      for (std::size_t i = d; i > 0; --i) {
        const auto n = static_cast<std::size_t>(glen[i - 1]);
        x[i - 1] = static_cast<double>(glo[i - 1] + static_cast<long>(r % n)) / q;
        r /= n;
      }
      table[t] = f.generator().evaluate(x);
    }
  }
  std::vector<double> vals(total, 0.0);
  std::vector<long> idx(d);
  for (const auto& [k, c] : f.coefficients()) {
    if (c == 0.0) continue;
    // Lattice index of the table origin x = k + sup.lo.
    for (std::size_t t = 0; t < table_size; ++t) {
      std::size_t r = t, flat = 0;
      bool inside = true;
      for (std::size_t i = d; i > 0; --i) {
        const auto n = static_cast<std::size_t>(glen[i - 1]);
        idx[i - 1] = static_cast<long>(k[i - 1]) * q + glo[i - 1] + static_cast<long>(r % n) - lo[i - 1];
        r /= n;
        if (idx[i - 1] < 0 || idx[i - 1] >= counts[i - 1]) inside = false;
      }
      if (!inside || table[t] == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) flat = flat * static_cast<std::size_t>(counts[i]) + static_cast<std::size_t>(idx[i]);
      vals[flat] += c * table[t];
    }
  }
  return vals;
}

// Grid maximum of |vals| followed by compass refinement of the 16 largest.
double refine_sup(const std::function<double(std::span<const double>)>& h, const Box& box, double grid_step,
                  const std::vector<double>& raw) {
  const auto counts = lattice_counts(box, grid_step);
  std::vector<double> vals(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) vals[i] = std::abs(raw[i]);
  std::vector<std::size_t> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t top = std::min<std::size_t>(16, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
  double best = top ? vals[order[0]] : 0.0;
  const std::size_t d = box.lo.size();
  for (std::size_t t = 0; t < top; ++t) {
    Point x = lattice_point(box, grid_step, counts, order[t]);
    double fx = vals[order[t]];
    double step = grid_step;
    while (step > 1e-14) {
      bool moved = false;
      for (std::size_t i = 0; i < d && !moved; ++i) {
        for (double dir : {-1.0, 1.0}) {
          Point y = x;
          y[i] = std::clamp(y[i] + dir * step, box.lo[i], box.hi[i]);
          const double fy = std::abs(h(y));
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step /= 2;
    }
    best = std::max(best, fx);
  }
  return best;
}

Signal combine(const Signal& f, const Signal& g, double s) {
  std::map<Shift, double> c = f.coefficients();
  for (const auto& [k, v] : g.coefficients()) c[k] += s * v;
  return Signal(f.generator(), std::move(c));
}

double signal_sup(const Signal& f, const Box& box, double grid_step) {
  auto h = [&](std::span<const double> x) { return f.evaluate(x); };
  if (auto vals = lattice_values(f, box, grid_step)) return refine_sup(h, box, grid_step, *vals);
  return sup_norm(h, box, grid_step);
}

}  // namespace

void write_signal_csv(std::ostream& os, const Signal& f) {
  for (int i = 1; i <= f.dimension(); ++i) os << 'k' << i << ',';
  os << "c\n";
  for (const auto& [k, c] : f.coefficients()) {
    for (int v : k) os << v << ',';
    os << csv::format_double(c) << '\n';
  }
}

Signal read_signal_csv(std::istream& is, const Generator& g, const std::string& source) {
  const int d = g.dimension();
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::map<Shift, double> coeffs;
  while (std::getline(is, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (!header) {
      if (static_cast<int>(cells.size()) != d + 1) {
        csv::fail_at(source, lineno, "header must be k1,...,k" + std::to_string(d) + ",c");
      }
      for (int i = 0; i < d; ++i) {
        if (cells[static_cast<std::size_t>(i)] != "k" + std::to_string(i + 1)) {
          csv::fail_at(source, lineno, "header must be k1,...,k" + std::to_string(d) + ",c");
        }
      }
      if (cells.back() != "c") csv::fail_at(source, lineno, "header must end with column c");
      header = true;
      continue;
    }
    if (static_cast<int>(cells.size()) != d + 1) {
      csv::fail_at(source, lineno, "expected " + std::to_string(d + 1) + " fields, got " + std::to_string(cells.size()));
    }
    Shift k(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) k[static_cast<std::size_t>(i)] = csv::parse_int(cells[static_cast<std::size_t>(i)], source, lineno);
    const double c = csv::parse_double(cells.back(), source, lineno);
    if (!coeffs.emplace(k, c).second) csv::fail_at(source, lineno, "duplicate coefficient index");
  }
  if (!header) csv::fail_at(source, lineno, "missing header");
  return Signal(g, std::move(coeffs));
}

Signal load_signal(const std::string& path, const Generator& g) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return read_signal_csv(in, g, path);
}

void save_signal(const std::string& path, const Signal& f) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  write_signal_csv(out, f);
}

std::vector<std::vector<std::size_t>> SignalGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(vertices.size());
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

std::vector<std::vector<std::size_t>> SignalGraph::components() const {
  const auto adj = adjacency();
  std::vector<char> seen(vertices.size(), 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < vertices.size(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (auto w : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool SignalGraph::has_edge(const Shift& a, const Shift& b) const {
  const auto ia = std::lower_bound(vertices.begin(), vertices.end(), a);
  const auto ib = std::lower_bound(vertices.begin(), vertices.end(), b);
  if (ia == vertices.end() || *ia != a || ib == vertices.end() || *ib != b) return false;
  auto i = static_cast<std::size_t>(ia - vertices.begin());
  auto j = static_cast<std::size_t>(ib - vertices.begin());
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::pair{i, j});
}

SignalGraph build_graph(const Signal& f, const OverlapSet& lambda, double coeff_tol) {
  SignalGraph g;
  for (const auto& [k, c] : f.coefficients()) {
    if (std::abs(c) > coeff_tol) g.vertices.push_back(k);
  }
  Shift diff;
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < g.vertices.size(); ++j) {
      diff = g.vertices[i];
      for (std::size_t t = 0; t < diff.size(); ++t) diff[t] -= g.vertices[j][t];
      if (lambda.contains(diff)) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

bool is_connected(const SignalGraph& g) { return g.vertices.empty() || g.components().size() == 1; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::nonseparable: return "nonseparable";
    case Verdict::separable: return "separable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict is_nonseparable(const Signal& f, double coeff_tol) {
  const auto graph = build_graph(f, overlap_set(f.generator()), coeff_tol);
  if (!is_connected(graph)) return Verdict::separable;
  return f.generator().locally_independent_on_open_sets() ? Verdict::nonseparable : Verdict::inconclusive;
}

bool brute_force_separable(const Signal& f, double grid_step) {
  std::vector<Shift> verts;
  std::vector<double> coef;
  for (const auto& [k, c] : f.coefficients()) {
    if (c != 0.0) {
      verts.push_back(k);
      coef.push_back(c);
    }
  }
  const std::size_t n = verts.size();
  if (n > kMaxBruteForceVertices) {
    throw Error(ErrorCode::too_many_vertices, "brute force separability needs at most 20 vertices");
  }
  if (n < 2) return false;

  // Per grid point, the nonzero terms c(k) phi(x - k); points with a single
  // term cannot witness a nonzero product.
  struct Term {
    std::uint32_t vertex;
    double value;
  };
  std::vector<std::vector<Term>> points;
  double scale = 0.0;
  for (const auto& x : box_lattice(*f.support_hull(), grid_step)) {
    std::vector<Term> terms;
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double val = coef[v] * f.generator().evaluate_shifted(x, verts[v]);
      if (val != 0.0) {
        terms.push_back({static_cast<std::uint32_t>(v), val});
        total += std::abs(val);
      }
    }
    scale = std::max(scale, total * total);
    if (terms.size() >= 2) points.push_back(std::move(terms));
  }
  const double tol = 1e-12 * std::max(scale, 1e-300);

  // Vertex 0 always lies in W; mask selects the members of W' among 1..n-1.
  const std::uint32_t masks = std::uint32_t{1} << (n - 1);
  for (std::uint32_t mask = 1; mask < masks; ++mask) {
    const std::uint32_t in_w2 = mask << 1;
    bool ok = true;
    for (const auto& terms : points) {
      double f1 = 0.0, f2 = 0.0;
      for (const auto& t : terms) ((in_w2 >> t.vertex) & 1U ? f2 : f1) += t.value;
      if (std::abs(f1 * f2) >= tol) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

bool brute_force_separable_on_window(const Signal& f, const Region& window, double grid_step) {
  const Generator& g = f.generator();
  const std::size_t d = static_cast<std::size_t>(g.dimension());
  if (window.dimension() != g.dimension()) throw Error(ErrorCode::wrong_dimension, "window dimension mismatch");

  const Box wbox{window.lo, window.hi};
  std::vector<int> counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    counts[i] = static_cast<int>(std::ceil((wbox.hi[i] - wbox.lo[i]) / grid_step - 1e-9)) + 1;
  }
  const auto lattice = box_lattice(wbox, grid_step);
  std::vector<long> slot(lattice.size(), -1);
  std::vector<Point> pts;
  std::vector<double> vals;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (!window.contains(lattice[i])) continue;
    slot[i] = static_cast<long>(pts.size());
    pts.push_back(lattice[i]);
    vals.push_back(f.evaluate(lattice[i]));
  }
  if (pts.empty()) return false;
  double fmax = 0.0;
  for (double v : vals) fmax = std::max(fmax, std::abs(v));
  if (fmax == 0.0) return false;
  const double zero = 1e-12 * fmax;

  // Connected runs of nonzero values under lattice adjacency.
  std::vector<int> comp(pts.size(), -1);
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t i = d; i-- > 1;) stride[i - 1] = stride[i] * static_cast<std::size_t>(counts[i]);
  int ncomp = 0;
  for (std::size_t s = 0; s < lattice.size(); ++s) {
    if (slot[s] < 0) continue;
    const auto ps = static_cast<std::size_t>(slot[s]);
    if (comp[ps] >= 0 || std::abs(vals[ps]) <= zero) continue;
    std::deque<std::size_t> queue{s};
    comp[ps] = ncomp;
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      for (std::size_t ax = 0; ax < d; ++ax) {
        const auto coord = (cur / stride[ax]) % static_cast<std::size_t>(counts[ax]);
        for (int dir : {-1, 1}) {
          if ((dir < 0 && coord == 0) || (dir > 0 && coord + 1 == static_cast<std::size_t>(counts[ax]))) continue;
          const auto nb = dir < 0 ? cur - stride[ax] : cur + stride[ax];
          if (slot[nb] < 0) continue;
          const auto pn = static_cast<std::size_t>(slot[nb]);
          if (comp[pn] >= 0 || std::abs(vals[pn]) <= zero) continue;
          comp[pn] = ncomp;
          queue.push_back(nb);
        }
      }
    }
    ++ncomp;
  }
  if (ncomp < 2) return false;
  if (static_cast<std::size_t>(ncomp) > kMaxBruteForceVertices) {
    throw Error(ErrorCode::too_many_vertices, "window has more than 20 nonzero runs");
  }

  const auto shifts = k_set(g, window);
  const Matrix a = local_matrix(g, pts, shifts);
  const Eigen::ColPivHouseholderQR<Matrix> qr(a);
  // Residual of each run's indicator part after projecting onto V(phi)|window.
  std::vector<Vector> resid(static_cast<std::size_t>(ncomp));
  const auto m = static_cast<Eigen::Index>(pts.size());
  for (int c = 0; c < ncomp; ++c) {
    Vector y = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (comp[static_cast<std::size_t>(i)] == c) y(i) = vals[static_cast<std::size_t>(i)];
    }
    resid[static_cast<std::size_t>(c)] = y - a * qr.solve(y);
  }
  double fnorm = 0.0;
  for (double v : vals) fnorm += v * v;
  const double tol = 1e-9 * std::sqrt(fnorm);

  const std::uint32_t masks = std::uint32_t{1} << (ncomp - 1);
  Vector acc(m);
  for (std::uint32_t mask = 1; mask < masks; ++mask) {
    acc.setZero();
    for (int c = 1; c < ncomp; ++c) {
      if ((mask >> (c - 1)) & 1U) acc += resid[static_cast<std::size_t>(c)];
    }
    if (acc.norm() <= tol) return true;
  }
  return false;
}

bool consecutive_zero_check_1d(const Signal& f) {
  if (f.dimension() != 1) throw Error(ErrorCode::wrong_dimension, "consecutive-zero criterion needs d = 1");
  const auto& sup = f.generator().support();
  const int len = static_cast<int>(std::lround(sup.hi[0] - sup.lo[0]));
  std::vector<int> nz;
  for (const auto& [k, c] : f.coefficients()) {
    if (c != 0.0) nz.push_back(k[0]);
  }
  if (nz.empty()) return true;
  const int kmin = nz.front(), kmax = nz.back();
  for (int k = kmin - len + 2; k <= kmax; ++k) {
    double s = 0.0;
    for (int l = 0; l <= len - 2; ++l) {
      const double c = f.coefficient({k + l});
      s += c * c;
    }
    if (s == 0.0) return false;
  }
  return true;
}

bool magnitude_equal(const Signal& f, const Signal& g, double grid_step, const std::optional<Region>& window,
                     double tol) {
  std::vector<Point> pts;
  if (window) {
    for (auto& x : box_lattice(Box{window->lo, window->hi}, grid_step)) {
      if (window->contains(x)) pts.push_back(std::move(x));
    }
  } else {
    const auto hull = merge(f.support_hull(), g.support_hull());
    if (!hull) return true;
    pts = box_lattice(*hull, grid_step);
  }
  std::vector<double> gaps;
  double scale = 1.0;
  for (const auto& x : pts) {
    const double a = std::abs(f.evaluate(x)), b = std::abs(g.evaluate(x));
    scale = std::max({scale, a, b});
    gaps.push_back(std::abs(a - b));
  }
  return std::all_of(gaps.begin(), gaps.end(), [&](double v) { return v < tol * scale; });
}

double sup_norm(const std::function<double(std::span<const double>)>& h, const Box& box, double grid_step) {
  const auto pts = box_lattice(box, grid_step);
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = h(pts[i]);
  return refine_sup(h, box, grid_step, vals);
}

double sup_distance_up_to_sign(const Signal& f, const Signal& g, double grid_step) {
  const auto hull = merge(f.support_hull(), g.support_hull());
  if (!hull) return 0.0;
  return std::min(signal_sup(combine(f, g, -1.0), *hull, grid_step), signal_sup(combine(f, g, 1.0), *hull, grid_step));
}

double magnitude_gap(const Signal& f, const Signal& g, double grid_step) {
  const auto hull = merge(f.support_hull(), g.support_hull());
  if (!hull) return 0.0;
  auto h = [&](std::span<const double> x) { return std::abs(f.evaluate(x)) - std::abs(g.evaluate(x)); };
  const auto fv = lattice_values(f, *hull, grid_step);
  const auto gv = lattice_values(g, *hull, grid_step);
  if (!fv || !gv) return sup_norm(h, *hull, grid_step);
  std::vector<double> vals(fv->size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::abs((*fv)[i]) - std::abs((*gv)[i]);
  return refine_sup(h, *hull, grid_step, vals);
}

}  // namespace siv
