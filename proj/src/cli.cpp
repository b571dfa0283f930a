#include "siv/cli.hpp"

#include "siv/csv.hpp"
#include "siv/error.hpp"
#include "siv/harness.hpp"
#include "siv/mapset.hpp"
#include "siv/sampling.hpp"
#include "siv/signal.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace siv {

namespace {

// Short names, "bspline:N", "tensor:N1,N2", inline JSON or a JSON file.
Generator parse_generator(const std::string& text) {
  if (text == "zp" || text == "zwart-powell") return Generator::zwart_powell();
  if (text == "phi0" || text == "phi1") return Generator::fixture(text);
  auto numbers = [&](const std::string& body) {
    std::vector<int> out;
    for (const auto& part : csv::split(body)) out.push_back(csv::parse_int(part, "--generator", 1));
    return out;
  };
  if (text.rfind("bspline:", 0) == 0) {
    const auto n = numbers(text.substr(8));
    if (n.size() != 1) throw Error(ErrorCode::parse_error, "bspline takes one order");
    return Generator::bspline(n[0]);
  }
  if (text.rfind("tensor:", 0) == 0) return Generator::tensor(numbers(text.substr(7)));

  // Identifiers as printed in reports: bspline(3), tensor(3,3), box([[..]]), fixture(phi0).
  const auto open = text.find('(');
  if (open != std::string::npos && text.back() == ')') {
    const std::string name = text.substr(0, open);
    const std::string body = text.substr(open + 1, text.size() - open - 2);
    if (name == "bspline") return parse_generator("bspline:" + body);
    if (name == "tensor") return parse_generator("tensor:" + body);
    if (name == "fixture") return Generator::fixture(body);
    if (name == "box") {
      try {
        const auto rows = nlohmann::json::parse(body).get<std::vector<std::vector<int>>>();
        if (rows.empty() || rows[0].empty()) throw Error(ErrorCode::parse_error, "empty direction matrix");
        Eigen::MatrixXi xi(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != rows[0].size()) throw Error(ErrorCode::parse_error, "ragged direction matrix");
          for (std::size_t j = 0; j < rows[i].size(); ++j) {
            xi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
          }
        }
        return Generator::box(xi);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("bad direction matrix: ") + e.what());
      }
    }
  }
  return Generator::parse(text);
}

// "a1,a2:b1,b2" for the box [a, b].
std::pair<Shift, Shift> parse_shift_box(const std::string& text, int dim) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::parse_error, "shift box must look like a1,a2:b1,b2");
  auto corner = [&](const std::string& s) {
    Shift k;
    for (const auto& part : csv::split(s)) k.push_back(csv::parse_int(part, "--shifts", 1));
    if (static_cast<int>(k.size()) != dim) throw Error(ErrorCode::wrong_dimension, "shift box dimension mismatch");
    return k;
  };
  return {corner(text.substr(0, colon)), corner(text.substr(colon + 1))};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : csv::split(text)) out.push_back(csv::parse_double(part, "--sweep", 1));
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::phase_conflict: return kExitPhaseConflict;
    case ErrorCode::parse_error:
    case ErrorCode::io_error:
    case ErrorCode::invalid_argument:
    case ErrorCode::wrong_dimension:
    case ErrorCode::unsupported_generator:
    case ErrorCode::invalid_order: return kExitUsage;
    default: return kExitNumeric;
  }
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void write_trials_csv(std::ostream& os, const Campaign& c) {
  os << "trial,seed,phase_saved,phase_conflict,e,sup_error,bound,support_recovered,graph_equal\n";
  for (const auto& r : c.results) {
    os << r.trial << ',' << r.seed << ',' << r.phase_saved << ',' << r.phase_conflict << ','
       << csv::format_double(r.m.amplitude_error) << ','
       << (r.m.sup_error ? csv::format_double(*r.m.sup_error) : std::string("nan")) << ','
       << csv::format_double(r.bound) << ',' << r.m.support_recovered << ',' << r.m.graph_equal << '\n';
  }
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phaseless sampling and reconstruction in shift-invariant spaces", "siv"};
  app.require_subcommand(1);

  std::string generator_text = "tensor:3,3", set_path, signal_path, samples_path, out_path, format = "json";
  std::string mode_text, region_text = "unit", shifts_text, config_path, plot_path, sweep_text,
              sweep_out;
  std::vector<std::string> regions_text;
  double noise = 0.0, m0 = 0.01;
  std::uint64_t seed = 0;
  int trials = -1, grid_q = 6;
  bool exact = false, no_norm = false;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* gen_set = app.add_subcommand("gen-set", "Build and serialize a patch system");
  gen_set->add_option("--generator", generator_text, "Generator: zp, bspline:N, tensor:N1,N2, JSON or file");
  gen_set->add_option("--mode", mode_text, "spanning or frame (default: frame for box splines, else spanning)")->check(CLI::IsMember({"spanning", "frame"}));
  gen_set->add_option("--regions", regions_text, "Regions (unit, upper, lower, a:b, JSON); default: mesh cells");
  gen_set->add_option("--seed", seed, "Seed for frame draws");
  gen_set->add_option("--grid-q", grid_q, "Spanning candidates {i/q}");
  gen_set->add_flag("--no-norm", no_norm, "Skip the stability constant");
  gen_set->add_option("--out", out_path, "Output JSON file")->required();

  auto* check = app.add_subcommand("check", "Nonseparability verdict and graph components");
  check->add_option("--generator", generator_text, "Generator of the signal");
  check->add_option("--signal", signal_path, "Signal CSV")->required();
  add_format(check);

  auto* sample = app.add_subcommand("sample", "Noisy magnitude samples on Gamma + K");
  sample->add_option("--set", set_path, "Patch system JSON")->required();
  sample->add_option("--signal", signal_path, "Signal CSV")->required();
  sample->add_option("--noise", noise, "Uniform noise level eps")->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", seed, "Noise seed");
  sample->add_option("--shifts", shifts_text, "Shift box a1,a2:b1,b2; default depends on the generator");
  sample->add_option("--out", out_path, "Samples CSV (stdout when omitted)");

  auto* recon = app.add_subcommand("reconstruct", "MAPSET reconstruction from magnitude samples");
  recon->add_option("--set", set_path, "Patch system JSON")->required();
  recon->add_option("--samples", samples_path, "Samples CSV")->required();
  recon->add_option("--m0", m0, "Phase adjustment threshold M0")->check(CLI::NonNegativeNumber);
  recon->add_option("--noise", noise, "Known noise level, for the bound and flags")->check(CLI::NonNegativeNumber);
  recon->add_option("--seed", seed, "Seed for alternating-minimization restarts");
  recon->add_flag("--exact-local-solver", exact, "Enumerate sign patterns for every patch");
  recon->add_option("--out", out_path, "Output file (stdout when omitted)");
  add_format(recon);

  auto* norm = app.add_subcommand("phi-inv-norm", "Stability constant of a patch system");
  norm->add_option("--set", set_path, "Patch system JSON")->required();

  auto* bench = app.add_subcommand("bench", "Seeded Monte Carlo campaign");
  bench->add_option("--config", config_path, "Experiment config JSON");
  bench->add_option("--generator", generator_text, "Generator");
  bench->add_option("--set", set_path, "Patch system JSON; default: built from the generator");
  bench->add_option("--noise", noise, "Noise level eps")->check(CLI::NonNegativeNumber);
  bench->add_option("--m0", m0, "Phase adjustment threshold M0")->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", seed, "Campaign seed");
  bench->add_option("--trials", trials, "Trial count (default: 100 for tensor B-splines, 1000 for box splines)")->check(CLI::NonNegativeNumber);
  bench->add_flag("--exact-local-solver", exact, "Enumerate sign patterns for every patch");
  bench->add_option("--out", out_path, "Report file (stdout when omitted)");
  bench->add_option("--plot", plot_path, "Error surface CSV of the first trial");
  bench->add_option("--sweep", sweep_text, "Comma-separated noise levels for a sweep table");
  bench->add_option("--sweep-out", sweep_out, "Sweep table CSV");
  add_format(bench);

  auto* lcp = app.add_subcommand("lcp-check", "Local complement property on a region");
  lcp->add_option("--generator", generator_text, "Generator");
  lcp->add_option("--region", region_text, "unit, upper, lower, a:b or JSON");

  std::vector<std::string> storage{"siv"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_set) {
      const Generator g = parse_generator(generator_text);
      std::vector<Region> regions;
      for (const auto& r : regions_text) regions.push_back(parse_region(r, g.dimension()));
      if (regions.empty()) regions = default_regions(g);
      BuildOptions opts;
      opts.grid_q = grid_q;
      opts.compute_norm = !no_norm;
      const PatchSystem p = build_patch_system(
          g, regions, mode_text.empty() ? ExperimentConfig::for_generator(g).mode : parse_sampling_mode(mode_text), seed,
          opts);
      p.save(out_path);
      out << "patches " << p.patches.size() << " density " << p.density();
      if (p.phi_inv_norm) out << " phi_inv_norm " << csv::format_double(*p.phi_inv_norm);
      out << '\n';
      return kExitOk;
    }
    if (*check) {
      const Generator g = parse_generator(generator_text);
      const Signal f = load_signal(signal_path, g);
      const auto graph = build_graph(f, overlap_set(g));
      const Verdict v = is_nonseparable(f);
      if (format == "json") {
        out << nlohmann::json{{"verdict", std::string(to_string(v))},
                              {"vertices", graph.vertices.size()},
                              {"edges", graph.edges.size()},
                              {"components", graph.components().size()}}
                   .dump()
            << '\n';
      } else {
        out << "verdict,vertices,edges,components\n"
            << to_string(v) << ',' << graph.vertices.size() << ',' << graph.edges.size() << ','
            << graph.components().size() << '\n';
      }
      return kExitOk;
    }
    if (*sample) {
      const PatchSystem p = PatchSystem::load(set_path);
      const Signal f = load_signal(signal_path, p.generator);
      auto cfg = ExperimentConfig::for_generator(p.generator);
      if (!shifts_text.empty()) std::tie(cfg.k_min, cfg.k_max) = parse_shift_box(shifts_text, p.generator.dimension());
      const NoisySamples s = sample_with_noise(f, p, shift_box(cfg.k_min, cfg.k_max), noise, seed);
      Output o(out_path, out);
      write_samples_csv(*o, s, p);
      return kExitOk;
    }
    if (*recon) {
      const PatchSystem p = PatchSystem::load(set_path);
      const NoisySamples s = load_samples(samples_path, p);
      ReconstructionConfig cfg;
      cfg.m0 = m0;
      cfg.seed = seed;
      cfg.force_exact = exact;
      if (noise > 0) cfg.eps_inf = noise;
      const ReconstructionReport rep = mapset_reconstruct(s, p, cfg);
      Output o(out_path, out);
      if (format == "json") {
        *o << rep.to_json().dump(2) << '\n';
      } else {
        write_signal_csv(*o, rep.signal);
      }
      return kExitOk;
    }
    if (*norm) {
      const PatchSystem p = PatchSystem::load(set_path);
      out << csv::format_double(phi_inverse_norm(p)) << '\n';
      return kExitOk;
    }
    if (*bench) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = ExperimentConfig::load(config_path);
      } else {
        cfg = ExperimentConfig::for_generator(parse_generator(generator_text));
        cfg.eps = noise;
        cfg.m0 = m0;
        if (trials >= 0) cfg.trials = trials;
        cfg.seed = seed;
        cfg.exact_local_solver = exact;
        cfg.set_path = set_path;
      }
      const PatchSystem p = resolve_patch_system(cfg);
      const Campaign c = run_campaign(cfg, p, !plot_path.empty());
      {
        Output o(out_path, out);
        if (format == "json") {
          *o << c.to_json().dump(2) << '\n';
        } else {
          write_trials_csv(*o, c);
        }
      }
      if (!out_path.empty()) {
        out << "phase_save_rate " << csv::format_double(c.summary.phase_save_rate) << " max_error "
            << csv::format_double(c.summary.max_error) << " bound " << csv::format_double(c.summary.bound) << '\n';
      }
      if (!plot_path.empty()) emit_plot_data(c, plot_path);
      if (!sweep_text.empty()) {
        if (sweep_out.empty()) throw Error(ErrorCode::invalid_argument, "--sweep needs --sweep-out");
        write_sweep(sweep_out, run_sweep(cfg, p, parse_list(sweep_text)));
      }
      if (c.summary.phase_conflicts > 0) {
        err << "phase-conflict in " << c.summary.phase_conflicts << " of " << c.summary.trials << " trials\n";
        return kExitPhaseConflict;
      }
      return c.summary.failures > 0 ? kExitNumeric : kExitOk;
    }
    if (*lcp) {
      const Generator g = parse_generator(generator_text);
      const Region a = parse_region(region_text, g.dimension());
      out << (local_complement_property(g, a) ? "true" : "false") << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "siv: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "siv: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

int cli_dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace siv
