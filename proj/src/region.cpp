#include "siv/region.hpp"

#include "siv/error.hpp"
#include "siv/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace siv {

bool Region::contains_with_margin(std::span<const double> x, double margin) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(x[i] > lo[i] + margin && x[i] < hi[i] - margin)) return false;
  }
  for (const auto& h : halfspaces) {
    double dot = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < h.a.size(); ++i) {
      dot += h.a[i] * x[i];
      norm2 += h.a[i] * h.a[i];
    }
    if (!(dot < h.b - margin * std::sqrt(norm2))) return false;
  }
  return true;
}

namespace {

template <typename Fn>
void for_each_index(const std::vector<int>& counts, Fn&& fn) {
  const std::size_t d = counts.size();
  std::vector<int> idx(d, 0);
  for (int c : counts) {
    if (c <= 0) return;
  }
  while (true) {
    fn(idx);
    std::size_t k = 0;
    while (k < d) {
      if (++idx[k] < counts[k]) break;
      idx[k] = 0;
      ++k;
    }
    if (k == d) return;
  }
}

}  // namespace

std::vector<Point> Region::interior_grid(double h) const {
  const std::size_t d = lo.size();
  std::vector<int> counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    counts[i] = static_cast<int>(std::ceil((hi[i] - lo[i]) / h - 1e-9));
  }
  std::vector<Point> out;
  Point x(d);
  for_each_index(counts, [&](const std::vector<int>& idx) {
    for (std::size_t i = 0; i < d; ++i) x[i] = lo[i] + (idx[i] + 0.5) * h;
    if (contains(x)) out.push_back(x);
  });
  return out;
}

std::vector<Point> Region::lattice_points(int q, double margin) const {
  const std::size_t d = lo.size();
  std::vector<int> first(d), counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    first[i] = static_cast<int>(std::floor(lo[i] * q));
    counts[i] = static_cast<int>(std::ceil(hi[i] * q)) - first[i] + 1;
  }
  std::vector<Point> out;
  Point x(d);
  // Last axis varies fastest so (i,j)/q comes out in lexicographic order.
  std::vector<int> rev(counts.rbegin(), counts.rend());
  for_each_index(rev, [&](const std::vector<int>& idx) {
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = static_cast<double>(first[i] + idx[d - 1 - i]) / q;
    }
    if (contains_with_margin(x, margin)) out.push_back(x);
  });
  return out;
}

std::vector<Point> Region::quasi_random_points(std::size_t count, double margin) const {
  const int d = dimension();
  std::vector<Point> out;
  std::size_t skip = 1;
  while (out.size() < count) {
    const std::size_t batch = 4 * (count - out.size()) + 16;
    for (auto& u : halton_points(d, batch, skip)) {
      Point x(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        const auto k = static_cast<std::size_t>(i);
        x[k] = lo[k] + (hi[k] - lo[k]) * u[k];
      }
      if (contains_with_margin(x, margin)) {
        out.push_back(std::move(x));
        if (out.size() == count) break;
      }
    }
    skip += batch;
    if (skip > 1000000 + 64 * count) {
      throw Error(ErrorCode::invalid_argument, "region has no interior points");
    }
  }
  return out;
}

Point Region::centroid_estimate() const {
  const auto pts = interior_grid(1.0 / 64);
  Point c(lo.size(), 0.0);
  if (pts.empty()) return c;
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += p[i];
  }
  for (auto& v : c) v /= static_cast<double>(pts.size());
  return c;
}

Region Region::unit_cube(int d) {
  return Region{std::vector<double>(static_cast<std::size_t>(d), 0.0),
                std::vector<double>(static_cast<std::size_t>(d), 1.0),
                {}};
}

Region Region::interval(double a, double b) { return Region{{a}, {b}, {}}; }

Region Region::upper_triangle() {
  return Region{{0.0, 0.0}, {1.0, 1.0}, {HalfSpace{{1.0, -1.0}, 0.0}}};
}

Region Region::lower_triangle() {
  return Region{{0.0, 0.0}, {1.0, 1.0}, {HalfSpace{{-1.0, 1.0}, 0.0}}};
}

nlohmann::json to_json(const Region& r) {
  nlohmann::json box = nlohmann::json::array();
  for (std::size_t i = 0; i < r.lo.size(); ++i) box.push_back({r.lo[i], r.hi[i]});
  nlohmann::json hs = nlohmann::json::array();
  for (const auto& h : r.halfspaces) hs.push_back({{"a", h.a}, {"b", h.b}});
  return {{"box", box}, {"halfspaces", hs}};
}

Region region_from_json(const nlohmann::json& j) {
  try {
    Region r;
    for (const auto& side : j.at("box")) {
      r.lo.push_back(side.at(0).get<double>());
      r.hi.push_back(side.at(1).get<double>());
    }
    if (j.contains("halfspaces")) {
      for (const auto& h : j.at("halfspaces")) {
        HalfSpace hs{h.at("a").get<std::vector<double>>(), h.at("b").get<double>()};
        if (hs.a.size() != r.lo.size()) {
          throw Error(ErrorCode::parse_error, "half-space dimension mismatch");
        }
        r.halfspaces.push_back(std::move(hs));
      }
    }
    if (r.lo.empty()) throw Error(ErrorCode::parse_error, "region box is empty");
    for (std::size_t i = 0; i < r.lo.size(); ++i) {
      if (!(r.lo[i] < r.hi[i])) throw Error(ErrorCode::parse_error, "region box side is empty");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("region: ") + e.what());
  }
}

Region parse_region(const std::string& text, int dim) {
  if (text == "unit") return Region::unit_cube(dim);
  if (text == "upper") return Region::upper_triangle();
  if (text == "lower") return Region::lower_triangle();
  if (!text.empty() && text.front() == '{') {
    try {
      return region_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::parse_error, e.what());
    }
  }
  const auto colon = text.find(':');
  if (colon != std::string::npos && dim == 1) {
    try {
      const double a = std::stod(text.substr(0, colon));
      const double b = std::stod(text.substr(colon + 1));
      if (!(a < b)) throw Error(ErrorCode::parse_error, "empty interval " + text);
      return Region::interval(a, b);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse_error, "bad interval " + text);
    }
  }
  throw Error(ErrorCode::parse_error, "unrecognized region '" + text + "'");
}

}  // namespace siv
