#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/finsler_core.hpp"
#include "finsler/flow_engine.hpp"
#include "finsler/oracles.hpp"
#include "finsler/report.hpp"
#include "finsler/scenario.hpp"

namespace py = pybind11;
using namespace finsler;

namespace {

// pybind11 holders cannot be shared_ptr<const T>.
struct Structure {
  StructurePtr ptr;
};

py::array_t<double> to_array(const SquareMatrix<double>& m) {
  py::array_t<double> out({m.size(), m.size()});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) a(i, j) = m(i, j);
  return out;
}

py::array_t<double> to_array(const bundle::ScalarBundleField& f) {
  const auto& g = f.grid();
  py::array_t<double> out({g.n1(), g.n2(), g.ntheta()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Structure structure(const std::string& kind, const py::kwargs& kw) {
  scenario::StructureSpec s;
  s.kind = kind;
  std::map<std::string, std::string*> text{{"conformal", &s.conformal}, {"m11", &s.m11},
                                           {"m12", &s.m12},             {"m22", &s.m22},
                                           {"b1", &s.b1},               {"b2", &s.b2},
                                           {"b_profile", &s.b_profile}, {"perturb_profile", &s.perturb_profile},
                                           {"diffeo", &s.diffeo}};
  for (const auto& [k, v] : kw) {
    auto key = py::cast<std::string>(k);
    if (key == "perturb_epsilon") {
      s.perturb_epsilon = py::cast<double>(v);
    } else if (auto it = text.find(key); it != text.end()) {
      *it->second = py::isinstance<py::str>(v) ? py::cast<std::string>(v) : py::str(v).cast<std::string>();
    } else {
      throw ConfigError("unknown structure parameter '" + key + "'");
    }
  }
  return {s.build()};
}

flow::FlowConfig flow_config(const std::string& gauge, const std::string& scheme, double duration, double dt,
                             int cadence) {
  flow::FlowConfig c;
  if (gauge != "direct" && gauge != "deturck") throw ConfigError("gauge must be direct or deturck");
  if (scheme != "rk4" && scheme != "euler") throw ConfigError("scheme must be rk4 or euler");
  c.gauge = gauge == "direct" ? flow::Gauge::Direct : flow::Gauge::DeTurck;
  c.scheme = scheme == "rk4" ? flow::Scheme::RK4 : flow::Scheme::Euler;
  c.duration = duration;
  c.dt = dt;
  c.cadence = cadence;
  return c;
}

py::dict result_dict(const flow::FlowResult& r) {
  py::list rows;
  for (const auto& d : r.diagnostics) {
    py::dict row;
    row["step"] = d.step;
    row["t"] = d.t;
    row["sup_ric"] = d.sup_ric;
    row["min_eig_g"] = d.min_eig_g;
    row["parabolicity_margin"] = d.parabolicity_margin;
    row["max_dphi"] = d.max_dphi;
    row["xi_sup"] = d.xi_sup;
    row["closure"] = d.closure;
    rows.append(row);
  }
  py::dict out;
  out["dt"] = r.dt;
  out["steps"] = r.steps;
  out["diagnostics"] = rows;
  out["final_phi"] = r.final_phi ? py::object(to_array(*r.final_phi)) : py::none();
  out["wall_seconds"] = r.wall_seconds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_finsler_flow, m) {
  m.doc() = "Finsler-Ricci flow on the unit-circle bundle of the 2-torus";

  auto base = py::register_exception<Error>(m, "FinslerError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<BlowUp>(m, "BlowUp", base.ptr());
  py::register_exception<BadResolution>(m, "BadResolution", base.ptr());
  py::register_exception<ConvexityViolated>(m, "ConvexityViolated", base.ptr());
  py::register_exception<NonPositiveF>(m, "NonPositiveF", base.ptr());

  py::class_<Structure>(m, "Structure")
      .def("f_squared",
           [](const Structure& S, std::vector<double> x, std::vector<double> y) { return S.ptr->f_squared(x, y); })
      .def("__repr__", [](const Structure& S) { return "<Structure " + S.ptr->describe() + ">"; });

  m.def("structure", &structure, py::arg("kind") = "euclidean",
        "Build an analytic structure; keyword values use the scenario file syntax.");
  m.def(
      "fundamental_tensor",
      [](const Structure& st, std::vector<double> x, std::vector<double> y) {
        return to_array(fundamental_tensor(*st.ptr, make_point(*st.ptr, x, y)));
      },
      py::arg("structure"), py::arg("x"), py::arg("y"));
  m.def(
      "ricci_scalar",
      [](const Structure& st, std::vector<double> x, std::vector<double> y) {
        return ricci_scalar(*st.ptr, make_point(*st.ptr, x, y));
      },
      py::arg("structure"), py::arg("x"), py::arg("y"));
  m.def(
      "sample",
      [](const Structure& st, int n1, int n2, int ntheta) {
        return to_array(bundle::sample_structure(*st.ptr, bundle::build_grid(n1, n2, ntheta)));
      },
      py::arg("structure"), py::arg("n1"), py::arg("n2"), py::arg("ntheta"), "F^2 at (x_i, x_j, theta_k).");
  m.def(
      "run_flow",
      [](const Structure& st, int n1, int n2, int ntheta, const std::string& gauge, const std::string& scheme,
         double duration, double dt, int cadence) {
        auto grid = bundle::build_grid(n1, n2, ntheta);
        auto cfg = flow_config(gauge, scheme, duration, dt, cadence);
        std::optional<flow::BackgroundMetric> bg;
        if (cfg.gauge == flow::Gauge::DeTurck) bg.emplace(*make_euclidean(2), grid);
        flow::FlowResult r;
        {
          py::gil_scoped_release release;
          r = flow::run_flow(*st.ptr, grid, cfg, bg ? &*bg : nullptr);
        }
        return result_dict(r);
      },
      py::arg("structure"), py::arg("n1") = 32, py::arg("n2") = 32, py::arg("ntheta") = 32,
      py::arg("gauge") = "direct", py::arg("scheme") = "rk4", py::arg("duration") = 0.05, py::arg("dt") = 0.0,
      py::arg("cadence") = 1, "DeTurck runs use the Euclidean background.");
  m.def(
      "conformal_reference",
      [](const std::string& u0, double T, int n1, int n2, double cfl, double dt) {
        auto s = oracles::conformal_reference(TorusFunction::parse(u0, 2), T, n1, n2, cfl, dt);
        py::array_t<double> u({s.n1, s.n2});
        std::copy(s.u.begin(), s.u.end(), u.mutable_data());
        return u;
      },
      py::arg("u0"), py::arg("T"), py::arg("n1") = 64, py::arg("n2") = 8, py::arg("cfl") = 0.1, py::arg("dt") = 0.0);
  m.def(
      "run_scenario",
      [](const std::filesystem::path& path, const std::vector<std::string>& overrides,
         const std::filesystem::path& out_dir) {
        auto sc = scenario::load_scenario(path, overrides);
        scenario::RunOptions opt;
        opt.out_dir = out_dir;
        report::ScenarioReport rep;
        {
          py::gil_scoped_release release;
          rep = scenario::run_scenario(sc, opt);
        }
        auto json = py::module_::import("json");
        return json.attr("loads")(report::to_json({rep}, report::fingerprint()));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{}, py::arg("out_dir") = "finsler_out",
      "Run one scenario file and return the parsed JSON report.");
}
