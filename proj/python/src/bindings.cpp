#include "rough_llg/experiments.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rllg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridField to_field(const Array& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw std::invalid_argument("expected an (n, 3) array");
    const Grid g(static_cast<int>(a.shape(0)));
    GridField f(g);
    auto r = a.unchecked<2>();
    for (int i = 0; i < g.size(); ++i) f[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
    return f;
}

Array from_field(const GridField& f) {
    Array out({f.size(), 3});
    auto w = out.mutable_unchecked<2>();
    for (int i = 0; i < f.size(); ++i)
        for (int c = 0; c < 3; ++c) w(i, c) = f[i](c);
    return out;
}

Array from_trajectory(const Trajectory& traj) {
    const int n = traj.states.front().size();
    Array out({traj.nodes(), n, 3});
    auto w = out.mutable_unchecked<3>();
    for (int t = 0; t < traj.nodes(); ++t)
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) w(t, i, c) = traj[t][i](c);
    return out;
}

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

SolverOptions options(bool project, bool drift) {
    SolverOptions o;
    o.project = project;
    o.drift_enabled = drift;
    return o;
}

nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

PYBIND11_MODULE(_rough_llg, m) {
    m.doc() = "Rough Landau-Lifshitz-Gilbert solver core";
    m.attr("__version__") = kVersion;

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<NumericalAbort> numerical_abort(m, "NumericalAbort", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::object err = py::handle(config_error.ptr())(e.what());
            err.attr("field") = e.field();
            PyErr_SetObject(config_error.ptr(), err.ptr());
        } catch (const NumericalAbort& e) {
            py::object err = py::handle(numerical_abort.ptr())(e.what());
            err.attr("node") = e.node();
            err.attr("point") = e.point();
            PyErr_SetObject(numerical_abort.ptr(), err.ptr());
        }
    });

    m.def("energy", [](const Array& u) { return energy(to_field(u)); }, py::arg("u"),
          "Dirichlet energy sum h |D^+ u|^2.");
    m.def("tension", [](const Array& u) { return from_field(tension(to_field(u))); }, py::arg("u"));
    m.def("project_sphere", [](const Array& u) { return from_field(project_sphere(to_field(u))); }, py::arg("u"));

    m.def(
        "sample_bm",
        [](std::uint64_t seed, double T, int steps, int q) {
            const BMSample s = sample_bm(seed, TimeGrid(T, steps), q);
            Array out({steps, q});
            auto w = out.mutable_unchecked<2>();
            for (int i = 0; i < steps; ++i)
                for (int j = 0; j < q; ++j) w(i, j) = s.increments[i](j);
            return out;
        },
        py::arg("seed"), py::arg("T"), py::arg("steps"), py::arg("q") = 3,
        "Brownian increments, one row per interval; prefix-stable in q.");

    m.def(
        "p_variation",
        [](const Array& x, double p) {
            if (x.ndim() != 1 && x.ndim() != 2) throw std::invalid_argument("expected a 1-d or 2-d path");
            const int nodes = static_cast<int>(x.shape(0));
            const int d = x.ndim() == 1 ? 1 : static_cast<int>(x.shape(1));
            if (nodes < 2) return 0.0;
            const double* data = x.data();
            return p_variation(nodes, p,
                               [&](int i, int j) {
                                   double s = 0.0;
                                   for (int c = 0; c < d; ++c) s += std::pow(data[j * d + c] - data[i * d + c], 2);
                                   return std::sqrt(s);
                               },
                               0, nodes - 1);
        },
        py::arg("x"), py::arg("p"), "Exact p-variation of a sampled path over its full horizon.");

    m.def(
        "cm_rate",
        [](const Array& h, double T) {
            if (h.ndim() != 2 || h.shape(0) < 2) throw std::invalid_argument("expected an (N + 1, q) array");
            const int steps = static_cast<int>(h.shape(0)) - 1;
            CameronMartinPath path{TimeGrid(T, steps), {}};
            auto r = h.unchecked<2>();
            for (int i = 0; i <= steps; ++i) {
                Eigen::VectorXd v(h.shape(1));
                for (int j = 0; j < h.shape(1); ++j) v(j) = r(i, j);
                path.values.push_back(v);
            }
            if (path.values.front().norm() != 0.0) throw std::invalid_argument("h must start at 0");
            return cm_rate(path);
        },
        py::arg("h"), py::arg("T"), "Discrete rate function sum |dh|^2 / dt.");

    py::class_<SpaceRoughDriver>(m, "Driver")
        .def_property_readonly("steps", &SpaceRoughDriver::steps)
        .def_property_readonly("n_space", [](const SpaceRoughDriver& d) { return d.grid().size(); })
        .def_property_readonly("T", [](const SpaceRoughDriver& d) { return d.time_grid().horizon(); })
        .def("coarsen", [](const SpaceRoughDriver& d, int f) { return coarsen(d, f); }, py::arg("factor"))
        .def("dilate", [](const SpaceRoughDriver& d, double l) { return dilate(d, l); }, py::arg("scale"))
        .def("omega", [](const SpaceRoughDriver& d, double p, int k) { return driver_omega(d, p, k); },
             py::arg("p") = 2.5, py::arg("k") = 2)
        .def(
            "distance",
            [](const SpaceRoughDriver& a, const SpaceRoughDriver& b, double p, int k) {
                return driver_distance(a, b, p, k);
            },
            py::arg("other"), py::arg("p") = 2.5, py::arg("k") = 2)
        .def("structure_defects", [](const SpaceRoughDriver& d) {
            const StructureDefects s = structure_defects(d);
            py::dict out;
            out["chen"] = s.chen;
            out["levy"] = s.levy;
            out["antisymmetry"] = s.antisymmetry;
            return out;
        });

    m.def(
        "noise_driver",
        [](const Array& g, std::uint64_t seed, double T, int steps, int q, double scale) {
            const std::vector<double> profile = to_vector(g);
            const Grid grid(static_cast<int>(profile.size()));
            const BMSample bm = sample_bm(seed, TimeGrid(T, steps), q);
            return dilate(build_driver(profile, grid, piecewise_linear_lift(bm)), scale);
        },
        py::arg("g"), py::arg("seed"), py::arg("T"), py::arg("steps"), py::arg("q") = 3, py::arg("scale") = 1.0,
        "Driver of the piecewise-linear lift of a Brownian sample through the profile g.");

    m.def(
        "solve",
        [](const Array& u0, const SpaceRoughDriver& d, bool project, bool drift) {
            return from_trajectory(solve(to_field(u0), d, options(project, drift)));
        },
        py::arg("u0"), py::arg("driver"), py::arg("project") = true, py::arg("drift") = true,
        "Rough IMEX solve; returns states of shape (N + 1, n, 3).");

    m.def(
        "solve_deterministic",
        [](const Array& u0, double T, int steps, bool project) {
            return from_trajectory(solve_deterministic(to_field(u0), TimeGrid(T, steps), options(project, true)));
        },
        py::arg("u0"), py::arg("T"), py::arg("steps"), py::arg("project") = true);

    m.def(
        "parse_config", [](const std::string& text) { return parse_config(parse_json(text)).raw.dump(); },
        py::arg("config_json"), "Validated and normalized config, as JSON text.");

    m.def(
        "run_experiment",
        [](const std::string& text, const std::string& out) {
            const RunConfig cfg = parse_config(parse_json(text));
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg, out);
            }
            return r.summary.dump();
        },
        py::arg("config_json"), py::arg("out"), "Runs one experiment; returns summary.json as text.");
}
