#include "siv/mapset.hpp"

#include "siv/csv.hpp"
#include "siv/error.hpp"
#include "siv/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cfloat>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace siv {

std::size_t NoisySamples::shift_index(const Shift& l) const {
  const auto it = std::lower_bound(shifts.begin(), shifts.end(), l);
  if (it == shifts.end() || *it != l) throw Error(ErrorCode::invalid_argument, "shift not in the sample region");
  return static_cast<std::size_t>(it - shifts.begin());
}

void write_samples_csv(std::ostream& os, const NoisySamples& s, const PatchSystem& p) {
  const int d = p.generator.dimension();
  os << 'm';
  for (int i = 1; i <= d; ++i) os << ",l" << i;
  for (int i = 1; i <= d; ++i) os << ",g" << i;
  os << ",z\n";
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    for (std::size_t li = 0; li < s.shifts.size(); ++li) {
      const auto& z = s.values[m][li];
      for (std::size_t g = 0; g < p.patches[m].gamma.size(); ++g) {
        os << m;
        for (int v : s.shifts[li]) os << ',' << v;
        for (double x : p.patches[m].gamma[g]) os << ',' << csv::format_double(x);
        os << ',' << csv::format_double(z(static_cast<Eigen::Index>(g))) << '\n';
      }
    }
  }
}

NoisySamples read_samples_csv(std::istream& is, const PatchSystem& p, const std::string& source) {
  const auto d = static_cast<std::size_t>(p.generator.dimension());
  std::vector<std::map<Point, std::size_t>> gamma_index(p.patches.size());
  for (std::size_t m = 0; m < p.patches.size(); ++m) {
    for (std::size_t g = 0; g < p.patches[m].gamma.size(); ++g) gamma_index[m][p.patches[m].gamma[g]] = g;
  }
  struct Row {
    std::size_t m;
    Shift l;
    std::size_t g;
    double z;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (!header) {
      std::vector<std::string> expect{"m"};
      for (std::size_t i = 1; i <= d; ++i) expect.push_back("l" + std::to_string(i));
      for (std::size_t i = 1; i <= d; ++i) expect.push_back("g" + std::to_string(i));
      expect.emplace_back("z");
      if (cells != expect) csv::fail_at(source, lineno, "header must be m,l1..ld,g1..gd,z");
      header = true;
      continue;
    }
    if (cells.size() != 2 * d + 2) {
      csv::fail_at(source, lineno, "expected " + std::to_string(2 * d + 2) + " fields, got " + std::to_string(cells.size()));
    }
    const int m = csv::parse_int(cells[0], source, lineno);
    if (m < 0 || static_cast<std::size_t>(m) >= p.patches.size()) csv::fail_at(source, lineno, "patch index out of range");
    Shift l(d);
    Point g(d);
    for (std::size_t i = 0; i < d; ++i) {
      l[i] = csv::parse_int(cells[1 + i], source, lineno);
      g[i] = csv::parse_double(cells[1 + d + i], source, lineno);
    }
    const auto it = gamma_index[static_cast<std::size_t>(m)].find(g);
    if (it == gamma_index[static_cast<std::size_t>(m)].end()) {
      csv::fail_at(source, lineno, "offset is not a sample point of patch " + std::to_string(m));
    }
    rows.push_back({static_cast<std::size_t>(m), l, it->second, csv::parse_double(cells.back(), source, lineno), lineno});
  }
  if (!header) csv::fail_at(source, lineno, "missing header");

  NoisySamples s;
  for (const auto& r : rows) s.shifts.push_back(r.l);
  std::sort(s.shifts.begin(), s.shifts.end());
  s.shifts.erase(std::unique(s.shifts.begin(), s.shifts.end()), s.shifts.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.values.resize(p.patches.size());
  for (std::size_t m = 0; m < p.patches.size(); ++m) {
    s.values[m].assign(s.shifts.size(), Vector::Constant(static_cast<Eigen::Index>(p.patches[m].gamma.size()), nan));
  }
  for (const auto& r : rows) {
    double& slot = s.values[r.m][s.shift_index(r.l)](static_cast<Eigen::Index>(r.g));
    if (!std::isnan(slot)) csv::fail_at(source, r.line, "duplicate sample");
    slot = r.z;
  }
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    for (const auto& v : s.values[m]) {
      if (v.hasNaN()) csv::fail_at(source, lineno, "samples incomplete for patch " + std::to_string(m));
    }
  }
  return s;
}

NoisySamples load_samples(const std::string& path, const PatchSystem& p) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return read_samples_csv(in, p, path);
}

void save_samples(const std::string& path, const NoisySamples& s, const PatchSystem& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  write_samples_csv(out, s, p);
}

double ReconstructionConfig::eta() const { return std::sqrt(m0); }

std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::exact: return "exact";
    case SolverKind::altmin: return "altmin";
    case SolverKind::certified: return "altmin+certified";
    case SolverKind::altmin_uncertified: return "altmin+budget-exhausted";
  }
  return "exact";
}

namespace {

void check_inputs(const Matrix& phi, const Vector& z) {
  if (phi.rows() != z.size()) throw Error(ErrorCode::invalid_argument, "sample count does not match local matrix");
  if (!phi.allFinite() || !z.allFinite()) throw Error(ErrorCode::non_finite_input, "non-finite local data");
  if (numerical_rank(phi) < phi.cols()) throw Error(ErrorCode::rank_deficient, "local matrix is rank deficient");
}

std::vector<int> signs_of(const Vector& v) {
  std::vector<int> s(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) s[static_cast<std::size_t>(i)] = v(i) < 0 ? -1 : 1;
  return s;
}

Vector signed_z(const std::vector<int>& s, const Vector& z) {
  Vector y = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) y(i) *= s[static_cast<std::size_t>(i)];
  return y;
}

double magnitude_residual(const Matrix& phi, const Vector& c, const Vector& z) {
  return ((phi * c).cwiseAbs() - z).squaredNorm();
}

// Least-squares fit to a sign pattern, then the signs of the fit.
LocalSolution polish(const Matrix& phi, const Eigen::HouseholderQR<Matrix>& qr, const Vector& z,
                     const std::vector<int>& s) {
  LocalSolution out;
  out.c = qr.solve(signed_z(s, z));
  out.signs = signs_of(phi * out.c);
  out.residual = magnitude_residual(phi, out.c, z);
  return out;
}

}  // namespace

LocalSolution local_minimize_exact(const Matrix& phi, const Vector& z) {
  check_inputs(phi, z);
  const Eigen::Index m = phi.rows(), n = phi.cols();
  if (m > 40) throw Error(ErrorCode::invalid_argument, "exact enumeration is limited to 40 rows");
  const Eigen::HouseholderQR<Matrix> qr(phi);
  const Matrix q = qr.householderQ() * Matrix::Identity(m, n);
  const Matrix proj = Matrix::Identity(m, m) - q * q.transpose();

  Vector y = z;
  Vector w = proj * y;
  double r = y.dot(w);
  double best = r;
  std::vector<int> s(static_cast<std::size_t>(m), 1), best_s = s;
  const std::uint64_t patterns = std::uint64_t{1} << (m - 1);
  for (std::uint64_t t = 1; t < patterns; ++t) {
    const auto i = static_cast<Eigen::Index>(std::countr_zero(t)) + 1;
    const double yi = y(i);
    r = r - 4 * yi * w(i) + 4 * yi * yi * proj(i, i);
    w -= (2 * yi) * proj.col(i);
    y(i) = -yi;
    s[static_cast<std::size_t>(i)] = -s[static_cast<std::size_t>(i)];
    if ((t & 0xFFF) == 0) {
      w = proj * y;
      r = y.dot(w);
    }
    if (r < best) {
      best = r;
      best_s = s;
    }
  }
  LocalSolution out = polish(phi, qr, z, best_s);
  out.solver = SolverKind::exact;
  out.nodes = patterns;
  return out;
}

LocalSolution local_minimize_altmin(const Matrix& phi, const Vector& z, int restarts, int iterations, double tol,
                                    std::uint64_t seed) {
  check_inputs(phi, z);
  const Eigen::HouseholderQR<Matrix> qr(phi);
  const auto m = static_cast<std::size_t>(phi.rows());
  LocalSolution best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int start = 0; start <= restarts; ++start) {
    std::vector<int> s(m, 1);
    if (start > 0) {
      Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(start));
      for (auto& v : s) v = rng.coin() ? 1 : -1;
    }
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iterations; ++it) {
      const Vector c = qr.solve(signed_z(s, z));
      const Vector fit = phi * c;
      const auto next = signs_of(fit);
      const double res = (fit.cwiseAbs() - z).squaredNorm();
      const bool stalled = std::abs(prev - res) <= tol * (1.0 + res);
      prev = res;
      if (next == s || stalled) break;
      s = next;
    }
    LocalSolution cand = polish(phi, qr, z, s);
    cand.nodes = static_cast<std::uint64_t>(start + 1);
    if (cand.residual < best.residual) best = std::move(cand);
  }
  best.solver = SolverKind::altmin;
  return best;
}

namespace {

struct SignBranchAndBound {
  const Matrix& phi;
  const Vector& z;
  std::vector<Eigen::Index> order{};
  Eigen::Index n;
  std::uint64_t budget;
  std::uint64_t nodes = 0;
  bool exhausted = false;
  double best;
  std::vector<int> pattern{};  // indexed by original row
  std::vector<int> best_pattern{};
  std::vector<Matrix> r{};    // triangular factor per depth
  std::vector<Vector> qtb{};  // rotated right-hand side per depth

  void visit(std::size_t depth, double res) {
    if (exhausted) return;
    if (++nodes > budget) {
      exhausted = true;
      return;
    }
    if (res >= best) return;
    if (depth == order.size()) {
      best = res;
      best_pattern = pattern;
      return;
    }
    const Eigen::Index row = order[depth];
    // Rotate the new row into the factor; u carries the old right-hand
    // side and v the unit response to the new entry.
    Matrix& rn = r[depth + 1];
    rn = r[depth];
    Vector a = phi.row(row).transpose();
    Vector u = qtb[depth];
    Vector v = Vector::Zero(n);
    double ue = 0.0, ve = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(j) == 0.0) continue;
      const double h = std::hypot(rn(j, j), a(j));
      const double c = rn(j, j) / h, s = a(j) / h;
      for (Eigen::Index k = j; k < n; ++k) {
        const double x = rn(j, k), y = a(k);
        rn(j, k) = c * x + s * y;
        a(k) = -s * x + c * y;
      }
      const double ux = u(j), vx = v(j);
      u(j) = c * ux + s * ue;
      ue = -s * ux + c * ue;
      v(j) = c * vx + s * ve;
      ve = -s * vx + c * ve;
    }
    const double zr = z(row);
    std::array<int, 2> signs{1, -1};
    const double e_plus = ue + zr * ve, e_minus = ue - zr * ve;
    if (std::abs(e_minus) < std::abs(e_plus)) signs = {-1, 1};
    for (int s : signs) {
      if (s < 0 && (depth == 0 || zr == 0.0)) continue;
      const double e = ue + s * zr * ve;
      qtb[depth + 1] = u + (s * zr) * v;
      pattern[static_cast<std::size_t>(row)] = s;
      visit(depth + 1, res + e * e);
      pattern[static_cast<std::size_t>(row)] = 1;
    }
  }
};

}  // namespace

LocalSolution local_minimize_branch_and_bound(const Matrix& phi, const Vector& z, const LocalSolution& incumbent,
                                              std::uint64_t node_budget) {
  check_inputs(phi, z);
  const auto m = static_cast<std::size_t>(phi.rows());
  const Eigen::Index n = phi.cols();
  SignBranchAndBound bb{.phi = phi, .z = z, .n = n, .budget = node_budget, .best = incumbent.residual};
  bb.order.resize(m);
  std::iota(bb.order.begin(), bb.order.end(), Eigen::Index{0});
  std::stable_sort(bb.order.begin(), bb.order.end(), [&](Eigen::Index a, Eigen::Index b) { return z(a) > z(b); });
  bb.pattern.assign(m, 1);
  bb.r.assign(m + 1, Matrix::Zero(n, n));
  bb.qtb.assign(m + 1, Vector::Zero(n));
  bb.visit(0, 0.0);

  if (bb.exhausted || bb.best_pattern.empty()) {
    LocalSolution out = incumbent;
    out.nodes = bb.nodes;
    out.solver = bb.exhausted ? SolverKind::altmin_uncertified : SolverKind::certified;
    return out;
  }
  const Eigen::HouseholderQR<Matrix> qr(phi);
  LocalSolution out = polish(phi, qr, z, bb.best_pattern);
  if (out.residual > incumbent.residual) out = incumbent;
  out.nodes = bb.nodes;
  out.solver = SolverKind::certified;
  return out;
}

LocalSolution local_minimize(const Matrix& phi, const Vector& z, const ReconstructionConfig& cfg,
                             std::uint64_t seed) {
  if (cfg.force_exact || static_cast<std::size_t>(phi.rows()) <= cfg.exact_max_rows) {
    return local_minimize_exact(phi, z);
  }
  LocalSolution alt = local_minimize_altmin(phi, z, cfg.restarts, cfg.iterations, cfg.tol, seed);
  if (!cfg.certify) return alt;
  return local_minimize_branch_and_bound(phi, z, alt, cfg.certify_node_budget);
}

PhaseSummary adjust_phases(std::vector<PatchSolution>& solutions, double m0) {
  const std::size_t count = solutions.size();
  PhaseSummary summary;
  summary.patches = count;
  std::vector<char> zero(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    solutions[i].sign = 1;
    zero[i] = solutions[i].c.size() == 0 || (solutions[i].c.array() == 0.0).all();
    summary.zero_patches += zero[i];
  }

  // Inner products over common shifts, with a rounding allowance.
  std::map<Shift, std::vector<std::pair<std::size_t, double>>> by_shift;
  for (std::size_t i = 0; i < count; ++i) {
    if (zero[i]) continue;
    for (std::size_t t = 0; t < solutions[i].shifts.size(); ++t) {
      by_shift[solutions[i].shifts[t]].emplace_back(i, solutions[i].c(static_cast<Eigen::Index>(t)));
    }
  }
  struct Pair {
    double ip = 0.0;
    double mag = 0.0;
    double abs_i = 0.0;
    double abs_j = 0.0;
    int common = 0;
  };
  std::unordered_map<std::uint64_t, Pair> pairs;
  for (const auto& [k, entries] : by_shift) {
    for (std::size_t a = 0; a < entries.size(); ++a) {
      for (std::size_t b = a + 1; b < entries.size(); ++b) {
        auto ei = entries[a], ej = entries[b];
        if (ei.first > ej.first) std::swap(ei, ej);
        auto& p = pairs[static_cast<std::uint64_t>(ei.first) * count + ej.first];
        const double prod = ei.second * ej.second;
        p.ip += prod;
        p.mag += std::abs(prod);
        p.abs_i += std::abs(ei.second);
        p.abs_j += std::abs(ej.second);
        ++p.common;
      }
    }
  }
  auto slack = [&](std::uint64_t key, const Pair& p) {
    const double ti = solutions[static_cast<std::size_t>(key / count)].tolerance;
    const double tj = solutions[static_cast<std::size_t>(key % count)].tolerance;
    return 64 * DBL_EPSILON * p.mag + ti * p.abs_j + tj * p.abs_i + ti * tj * p.common;
  };

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(count);
  for (const auto& [key, p] : pairs) {
    if (std::abs(p.ip) > m0 + slack(key, p)) {
      const auto i = static_cast<std::size_t>(key / count), j = static_cast<std::size_t>(key % count);
      adj[i].emplace_back(j, p.ip);
      adj[j].emplace_back(i, p.ip);
      ++summary.edges;
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  std::vector<char> seen(count, 0);
  for (std::size_t root = 0; root < count; ++root) {
    if (zero[root] || seen[root]) continue;
    ++summary.components;
    seen[root] = 1;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (const auto& [w, ip] : adj[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        solutions[w].sign = ip > 0 ? solutions[v].sign : -solutions[v].sign;
        queue.push_back(w);
      }
    }
  }
  for (const auto& [key, p] : pairs) {
    const auto i = static_cast<std::size_t>(key / count), j = static_cast<std::size_t>(key % count);
    const double signed_ip = solutions[i].sign * solutions[j].sign * p.ip;
    if (signed_ip < -m0 - slack(key, p)) {
      std::ostringstream os;
      os << "patches " << i << " and " << j << " have signed inner product " << signed_ip << " below -M0 = " << -m0;
      throw Error(ErrorCode::phase_conflict, os.str());
    }
  }
  return summary;
}

std::map<Shift, double> sew(const std::vector<PatchSolution>& solutions) {
  std::map<Shift, std::pair<double, int>> acc;
  for (const auto& s : solutions) {
    for (std::size_t t = 0; t < s.shifts.size(); ++t) {
      auto& slot = acc[s.shifts[t]];
      slot.first += s.sign * s.c(static_cast<Eigen::Index>(t));
      slot.second += 1;
    }
  }
  std::map<Shift, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / v.second;
  return out;
}

std::map<Shift, double> hard_threshold(const std::map<Shift, double>& d, double eta) {
  if (!(eta >= 0)) throw Error(ErrorCode::invalid_argument, "threshold must be nonnegative");
  std::map<Shift, double> out;
  for (const auto& [k, v] : d) out[k] = std::abs(v) >= eta ? v : 0.0;
  return out;
}

double stability_bound(const PatchSystem& p, double eps_inf) {
  if (!(eps_inf >= 0)) throw Error(ErrorCode::invalid_argument, "noise level must be nonnegative");
  if (eps_inf == 0) return 0.0;
  const double norm = p.phi_inv_norm ? *p.phi_inv_norm : phi_inverse_norm(p);
  return 2.0 * std::sqrt(static_cast<double>(p.density())) * norm * eps_inf;
}

PreconditionFlags check_preconditions(const PatchSystem& p, double f0, double m0, double eps_inf) {
  if (!(f0 > 0)) throw Error(ErrorCode::invalid_argument, "F0 must be positive");
  PreconditionFlags flags;
  flags.threshold_ok = m0 <= 2 * f0 / 9;
  if (eps_inf == 0) {
    flags.noise_ok = m0 >= 0;
  } else {
    const double norm = p.phi_inv_norm ? *p.phi_inv_norm : phi_inverse_norm(p);
    flags.noise_ok = 8 * static_cast<double>(p.density()) * norm * norm * eps_inf * eps_inf <= m0;
  }
  return flags;
}

nlohmann::json ReconstructionReport::to_json() const {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [k, c] : signal.coefficients()) coeffs.push_back({{"k", k}, {"c", c}});
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& s : solutions) {
    patches.push_back({{"m", s.patch},
                       {"l", s.l},
                       {"residual", s.residual},
                       {"sign", s.sign},
                       {"solver", std::string(to_string(s.solver))}});
  }
  nlohmann::json j{{"rng", std::string(kRngAlgorithm)},
                   {"seed", seed},
                   {"generator", signal.generator().to_json()},
                   {"m0", m0},
                   {"eta", std::sqrt(m0)},
                   {"coefficients", coeffs},
                   {"patches", patches},
                   {"phase_graph",
                    {{"patches", phases.patches},
                     {"zero_patches", phases.zero_patches},
                     {"edges", phases.edges},
                     {"components", phases.components}}}};
  j["bound"] = bound ? nlohmann::json(*bound) : nlohmann::json(nullptr);
  nlohmann::json fl = nlohmann::json::object();
  if (noise_flag) fl["noise_ok"] = *noise_flag;
  if (flags) {
    fl["threshold_ok"] = flags->threshold_ok;
    fl["noise_ok"] = flags->noise_ok;
  }
  j["flags"] = fl;
  return j;
}

ReconstructionReport mapset_reconstruct(const NoisySamples& samples, const PatchSystem& p,
                                        const ReconstructionConfig& cfg) {
  if (!(cfg.m0 >= 0)) throw Error(ErrorCode::invalid_argument, "M0 must be nonnegative");
  if (samples.values.size() != p.patches.size()) {
    throw Error(ErrorCode::invalid_argument, "samples do not match the patch system");
  }
  std::vector<PatchSolution> solutions;
  for (std::size_t m = 0; m < p.patches.size(); ++m) {
    const Patch& patch = p.patches[m];
    const Eigen::JacobiSVD<Matrix> svd(patch.phi);
    const Vector sv = svd.singularValues();
    const double kappa = sv.size() && sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                                             : std::numeric_limits<double>::infinity();
    if (samples.values[m].size() != samples.shifts.size()) {
      throw Error(ErrorCode::invalid_argument, "samples do not cover every shift");
    }
    for (std::size_t li = 0; li < samples.shifts.size(); ++li) {
      Vector z = samples.values[m][li];
      if (z.size() != static_cast<Eigen::Index>(patch.gamma.size())) {
        throw Error(ErrorCode::invalid_argument, "sample count does not match patch offsets");
      }
      z = z.cwiseMax(0.0);
      const std::uint64_t index = static_cast<std::uint64_t>(m) * samples.shifts.size() + li;
      const LocalSolution local = local_minimize(patch.phi, z, cfg, Rng::derive(cfg.seed, index).next());
      PatchSolution s;
      s.patch = m;
      s.l = samples.shifts[li];
      for (const auto& w : patch.omega) {
        Shift k = w;
        for (std::size_t i = 0; i < k.size(); ++i) k[i] += s.l[i];
        s.shifts.push_back(std::move(k));
      }
      s.c = local.c;
      s.residual = local.residual;
      s.tolerance = 64 * DBL_EPSILON * kappa * local.c.norm();
      s.solver = local.solver;
      solutions.push_back(std::move(s));
    }
  }
  const PhaseSummary phases = adjust_phases(solutions, cfg.m0);
  const auto coeffs = hard_threshold(sew(solutions), cfg.eta());
  std::map<Shift, double> nonzero;
  for (const auto& [k, c] : coeffs) {
    if (c != 0.0) nonzero[k] = c;
  }
  ReconstructionReport report{Signal(p.generator, std::move(nonzero)), std::move(solutions), phases,
                              std::nullopt, std::nullopt, std::nullopt, cfg.seed, cfg.m0};
  if (cfg.eps_inf) {
    report.bound = stability_bound(p, *cfg.eps_inf);
    if (cfg.f0) {
      report.flags = check_preconditions(p, *cfg.f0, cfg.m0, *cfg.eps_inf);
    } else {
      const double norm = p.phi_inv_norm ? *p.phi_inv_norm : phi_inverse_norm(p);
      report.noise_flag = 8 * static_cast<double>(p.density()) * norm * norm * *cfg.eps_inf * *cfg.eps_inf <= cfg.m0;
    }
  }
  return report;
}

}  // namespace siv
