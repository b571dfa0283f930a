#include "siv/error.hpp"
#include "siv/harness.hpp"
#include "siv/mapset.hpp"
#include "siv/overlap.hpp"
#include "siv/sampling.hpp"
#include "siv/signal.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace siv;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict coefficients_dict(const Signal& f) {
  py::dict d;
  for (const auto& [k, c] : f.coefficients()) d[py::tuple(py::cast(k))] = c;
  return d;
}

Signal make_signal(const Generator& g, const py::dict& coefficients) {
  Signal f(g);
  for (const auto& [k, c] : coefficients) f.set(py::cast<Shift>(k), py::cast<double>(c));
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase retrieval of real signals in shift-invariant spaces";

  static py::exception<Error> siv_error(m, "SivError", PyExc_RuntimeError);
  static py::exception<Error> conflict_error(m, "PhaseConflictError", siv_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::phase_conflict) {
        py::set_error(conflict_error, e.what());
      } else {
        py::set_error(siv_error, e.what());
      }
    }
  });

  py::class_<Generator>(m, "Generator")
      .def_static("bspline", &Generator::bspline, py::arg("order"))
      .def_static("tensor", &Generator::tensor, py::arg("orders"))
      .def_static("zwart_powell", &Generator::zwart_powell)
      .def_static("box", &Generator::box, py::arg("directions"))
      .def_static("fixture", &Generator::fixture, py::arg("name"))
      .def_static("from_json", [](const py::object& o) { return Generator::from_json(from_python(o)); })
      .def("to_json", [](const Generator& g) { return to_python(g.to_json()); })
      .def_property_readonly("dimension", &Generator::dimension)
      .def_property_readonly("id", &Generator::id)
      .def_property_readonly("support", [](const Generator& g) { return py::make_tuple(g.support().lo, g.support().hi); })
      .def("__call__", [](const Generator& g, const Point& x) { return g.evaluate(x); }, py::arg("x"))
      .def("__eq__", &Generator::operator==)
      .def("__repr__", [](const Generator& g) { return "Generator(" + g.id() + ")"; });

  py::class_<Region>(m, "Region")
      .def_static("unit_cube", &Region::unit_cube, py::arg("d"))
      .def_static("interval", &Region::interval, py::arg("a"), py::arg("b"))
      .def_static("upper_triangle", &Region::upper_triangle)
      .def_static("lower_triangle", &Region::lower_triangle)
      .def("contains", [](const Region& r, const Point& x) { return r.contains(x); }, py::arg("x"))
      .def("to_json", [](const Region& r) { return to_python(to_json(r)); });

  py::class_<Signal>(m, "Signal")
      .def(py::init(&make_signal), py::arg("generator"), py::arg("coefficients") = py::dict())
      .def_property_readonly("generator", &Signal::generator)
      .def_property_readonly("coefficients", &coefficients_dict)
      .def("coefficient", &Signal::coefficient, py::arg("k"))
      .def("set", &Signal::set, py::arg("k"), py::arg("value"))
      .def("scaled", &Signal::scaled, py::arg("s"))
      .def("translated", &Signal::translated, py::arg("l"))
      .def("__call__", [](const Signal& f, const Point& x) { return f.evaluate(x); }, py::arg("x"))
      .def("__repr__",
           [](const Signal& f) {
             return "Signal(" + f.generator().id() + ", " + std::to_string(f.coefficients().size()) + " coefficients)";
           });

  m.def("k_set", [](const Generator& g, const Region& a) { return k_set(g, a); }, py::arg("generator"),
        py::arg("region"));
  m.def("outer_space_dim", [](const Generator& g, const Region& a) { return outer_space_dim(g, a); },
        py::arg("generator"), py::arg("region"));
  m.def("overlap_shifts", [](const Generator& g) { return overlap_set(g).shifts; }, py::arg("generator"));
  m.def("is_phase_retrievable_frame",
        [](const std::vector<Vector>& vectors) { return is_phase_retrievable_frame(vectors); }, py::arg("vectors"));
  m.def("outer_products_span", &outer_products_span, py::arg("vectors"), py::arg("target_dim"));

  m.def("is_nonseparable", [](const Signal& f) { return std::string(to_string(is_nonseparable(f))); },
        py::arg("signal"), "Returns 'nonseparable', 'separable' or 'inconclusive'.");
  m.def("graph_connected", [](const Signal& f) { return is_connected(build_graph(f, overlap_set(f.generator()))); },
        py::arg("signal"));
  m.def("brute_force_separable", [](const Signal& f) { return brute_force_separable(f); }, py::arg("signal"));
  m.def("consecutive_zero_check_1d", &consecutive_zero_check_1d, py::arg("signal"));
  m.def("sup_distance_up_to_sign", [](const Signal& f, const Signal& g) { return sup_distance_up_to_sign(f, g); },
        py::arg("f"), py::arg("g"));
  m.def("magnitude_gap", [](const Signal& f, const Signal& g) { return magnitude_gap(f, g); }, py::arg("f"),
        py::arg("g"));

  py::class_<PatchSystem>(m, "PatchSystem")
      .def_static("load", &PatchSystem::load, py::arg("path"))
      .def_static("from_json", [](const py::object& o) { return PatchSystem::from_json(from_python(o)); })
      .def("save", &PatchSystem::save, py::arg("path"))
      .def("to_json", [](const PatchSystem& p) { return to_python(p.to_json()); })
      .def_readonly("generator", &PatchSystem::generator)
      .def_readonly("phi_inv_norm", &PatchSystem::phi_inv_norm)
      .def_property_readonly("density", &PatchSystem::density)
      .def_property_readonly("mode", [](const PatchSystem& p) { return std::string(to_string(p.mode)); })
      .def("__len__", [](const PatchSystem& p) { return p.patches.size(); })
      .def("patch", [](const PatchSystem& p, std::size_t i) {
        const Patch& patch = p.patches.at(i);
        py::dict d;
        d["gamma"] = patch.gamma;
        d["omega"] = patch.omega;
        d["phi"] = patch.phi;
        return d;
      }, py::arg("index"));

  m.def(
      "build_patch_system",
      [](const Generator& g, std::optional<std::string> mode, std::uint64_t seed, int grid_q, bool compute_norm,
         std::optional<std::vector<Region>> regions) {
        BuildOptions opts;
        opts.grid_q = grid_q;
        opts.compute_norm = compute_norm;
        return build_patch_system(g, regions ? *regions : default_regions(g),
                                  mode ? parse_sampling_mode(*mode) : ExperimentConfig::for_generator(g).mode, seed, opts);
      },
      py::arg("generator"), py::arg("mode") = py::none(), py::arg("seed") = 0, py::arg("grid_q") = 6,
      py::arg("compute_norm") = true, py::arg("regions") = py::none());
  m.def("phi_inverse_norm", [](const PatchSystem& p) { return phi_inverse_norm(p); }, py::arg("system"));
  m.def("stability_bound", &stability_bound, py::arg("system"), py::arg("eps"));

  m.def(
      "local_minimize",
      [](const Matrix& phi, const Vector& z, const std::string& method, int restarts, std::uint64_t seed) {
        LocalSolution s;
        if (method == "exact") {
          s = local_minimize_exact(phi, z);
        } else if (method == "altmin") {
          s = local_minimize_altmin(phi, z, restarts, 200, 1e-12, seed);
        } else {
          throw Error(ErrorCode::invalid_argument, "method must be 'exact' or 'altmin'");
        }
        return py::make_tuple(s.c, s.residual);
      },
      py::arg("phi"), py::arg("z"), py::arg("method") = "exact", py::arg("restarts") = 16, py::arg("seed") = 0,
      "Minimizes || |phi c| - z ||^2 over c; returns (c, residual).");

  py::class_<NoisySamples>(m, "Samples")
      .def_readonly("shifts", &NoisySamples::shifts)
      .def_readonly("values", &NoisySamples::values);

  m.def(
      "random_signal",
      [](const Generator& g, const Shift& k_min, const Shift& k_max, std::uint64_t seed) {
        return random_signal(g, k_min, k_max, seed);
      },
      py::arg("generator"), py::arg("k_min"), py::arg("k_max"), py::arg("seed"));
  m.def("shift_box", &shift_box, py::arg("lo"), py::arg("hi"));
  m.def("sample", &sample_with_noise, py::arg("signal"), py::arg("system"), py::arg("shifts"), py::arg("eps") = 0.0,
        py::arg("seed") = 0);
  m.def(
      "mapset_reconstruct",
      [](const NoisySamples& samples, const PatchSystem& p, double m0, std::uint64_t seed, bool exact,
         std::optional<double> eps, std::optional<double> f0) {
        ReconstructionConfig cfg;
        cfg.m0 = m0;
        cfg.seed = seed;
        cfg.force_exact = exact;
        cfg.eps_inf = eps;
        cfg.f0 = f0;
        const ReconstructionReport r = mapset_reconstruct(samples, p, cfg);
        return py::make_tuple(r.signal, to_python(r.to_json()));
      },
      py::arg("samples"), py::arg("system"), py::arg("m0") = 0.01, py::arg("seed") = 0,
      py::arg("exact_local_solver") = false, py::arg("eps") = py::none(), py::arg("f0") = py::none(),
      "Returns (signal, report) where report is a dict. Passing the noise level eps adds the error bound, and f0 "
      "adds the precondition flags.");
  m.def(
      "amplitude_error",
      [](const Signal& f, const Signal& fe) { return metrics(f, fe, false).amplitude_error; }, py::arg("truth"),
      py::arg("estimate"));
  m.def("default_config", [](const Generator& g) { return to_python(ExperimentConfig::for_generator(g).to_json()); },
        py::arg("generator"));
  m.def(
      "run_campaign",
      [](const py::object& config, std::optional<PatchSystem> system) {
        const ExperimentConfig cfg = ExperimentConfig::from_json(from_python(config));
        py::gil_scoped_release release;
        const Campaign c = system ? run_campaign(cfg, *system) : run_campaign(cfg);
        py::gil_scoped_acquire acquire;
        return to_python(c.to_json());
      },
      py::arg("config"), py::arg("system") = py::none(), "Runs a seeded campaign; config mirrors the JSON config file.");
}
