// pybind11 surface: model and mesh construction, the flow integrator, the
// spectral checks, and the scalar-curvature functionals.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgeflow/flow.hpp"
#include "edgeflow/geometry.hpp"
#include "edgeflow/mesh.hpp"
#include "edgeflow/spectral.hpp"

namespace py = pybind11;
using namespace edgeflow;

namespace {

WarpSpec warp_from(const std::string& kind, double eps, const std::string& shape) {
    if (kind == "linear") return linear_warp();
    if (kind == "sinh") return sinh_warp();
    if (kind == "perturbed_sinh") return perturbed_sinh_warp(eps, shape);
    throw std::invalid_argument("warp kind must be linear|sinh|perturbed_sinh");
}

Scheme scheme_from(const std::string& name) {
    if (name == "semi_implicit") return Scheme::SemiImplicit;
    if (name == "explicit_rk2") return Scheme::ExplicitRK2;
    throw std::invalid_argument("scheme must be semi_implicit|explicit_rk2");
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "normalized Yamabe flow laboratory on model cone manifolds";

    py::class_<EdgeModel>(mod, "Model")
        .def_readonly("m", &EdgeModel::m)
        .def_readonly("n", &EdgeModel::n)
        .def_readonly("x_max", &EdgeModel::x_max)
        .def_readonly("fiber_scal", &EdgeModel::fiber_scal)
        .def_readonly("fiber_lambda0", &EdgeModel::fiber_lambda0);

    mod.def(
        "make_model",
        [](int m, const std::string& warp, double x_max, double eps,
           const std::string& shape, std::optional<double> fiber_scal,
           std::optional<double> fiber_lambda0) {
            const double n = m - 1;
            return make_model(m, warp_from(warp, eps, shape), x_max,
                              fiber_scal.value_or(n * (n - 1.0)),
                              fiber_lambda0.value_or(n + 1.0));
        },
        py::arg("m"), py::arg("warp"), py::arg("x_max"), py::arg("eps") = 0.0,
        py::arg("shape") = "x3gauss", py::arg("fiber_scal") = std::nullopt,
        py::arg("fiber_lambda0") = std::nullopt);

    py::class_<Mesh>(mod, "Mesh")
        .def_readonly("x", &Mesh::x)
        .def_readonly("w", &Mesh::w)
        .def_readonly("gamma", &Mesh::gamma)
        .def_property_readonly("K", &Mesh::K);

    mod.def(
        "build_mesh",
        [](const EdgeModel& model, int K, double gamma) {
            return build_mesh(K, gamma, model.x_max, model);
        },
        py::arg("model"), py::arg("K") = 256, py::arg("gamma") = 2.0);

    mod.def("scalar_curvature", &warped_scalar_curvature, py::arg("model"), py::arg("x"),
            "scal of the initial warped metric at radius x");

    mod.def(
        "initial_curvature",
        [](const EdgeModel& model, const Mesh& mesh) {
            const CurvatureField c = initial_curvature(model, mesh);
            py::dict d;
            d["values"] = c.values;
            d["a_bound"] = c.a_bound;
            d["b_bound"] = c.b_bound;
            d["negative"] = c.scalar_negative;
            return d;
        },
        py::arg("model"), py::arg("mesh"));

    mod.def("conformal_volume", &conformal_volume, py::arg("u"), py::arg("model"),
            py::arg("mesh"));
    mod.def("average_scalar_rho", &average_scalar_rho, py::arg("u"), py::arg("model"),
            py::arg("mesh"));
    mod.def("total_scalar_functional", &total_scalar_functional, py::arg("u"),
            py::arg("model"), py::arg("mesh"));
    mod.def("total_scalar_functional_direct", &total_scalar_functional_direct,
            py::arg("u"), py::arg("model"), py::arg("mesh"));

    mod.def(
        "run_flow",
        [](const EdgeModel& model, const Mesh& mesh, double tau, double t_end,
           double stop_tol, const std::string& scheme,
           std::optional<std::vector<double>> u0) {
            FlowParams params;
            params.tau = tau;
            params.t_end = t_end;
            params.stop_tol = stop_tol;
            params.scheme = scheme_from(scheme);
            const std::vector<double> start =
                u0 ? *u0 : std::vector<double>(mesh.x.size(), 1.0);
            const FlowResult res =
                run_flow(make_initial_state(start, model, mesh), params, model, mesh);

            py::dict d;
            std::vector<double> t, rho, vol, scal_min, scal_max, gap, dudt;
            for (const FlowRecordRow& r : res.record.rows) {
                t.push_back(r.t);
                rho.push_back(r.rho);
                vol.push_back(r.vol);
                scal_min.push_back(r.scal_min);
                scal_max.push_back(r.scal_max);
                gap.push_back(r.scal_minus_rho_sup);
                dudt.push_back(r.dudt_sup);
            }
            d["t"] = t;
            d["rho"] = rho;
            d["vol"] = vol;
            d["scal_min"] = scal_min;
            d["scal_max"] = scal_max;
            d["gap"] = gap;
            d["dudt_sup"] = dudt;
            d["u"] = res.final_state.u;
            d["termination"] = res.record.termination;
            d["rho0"] = res.record.rho0;
            d["b_rate"] = res.record.b_rate;
            d["identity_dev"] = res.record.max_identity_dev;
            return d;
        },
        py::arg("model"), py::arg("mesh"), py::arg("tau") = 1e-3, py::arg("t_end") = 1.0,
        py::arg("stop_tol") = 1e-6, py::arg("scheme") = "semi_implicit",
        py::arg("u0") = std::nullopt);

    mod.def(
        "first_eigenpair",
        [](const EdgeModel& model, const Mesh& mesh) {
            const ConformalOp op = assemble_conformal_laplacian(model, mesh);
            return first_eigenpair(op, mesh);
        },
        py::arg("model"), py::arg("mesh"),
        "(lambda1, phi1) of the conformal Laplacian, phi1 positive and normalized");

    mod.def("minimize_yamabe_functional", &minimize_yamabe_functional, py::arg("model"),
            py::arg("mesh"), py::arg("iters") = 2000, py::arg("step") = 0.02);

    mod.def(
        "trichotomy",
        [](const EdgeModel& model, const Mesh& mesh, int iters, double step) {
            const TrichotomyReport rep = trichotomy_check(model, mesh, iters, step);
            py::dict d;
            d["lambda1"] = rep.result.lambda1;
            d["nu"] = rep.result.nu_estimate;
            d["signs"] = rep.result.trichotomy_signs;
            d["identity_dev"] = rep.identity_dev;
            d["pass"] = rep.pass;
            return d;
        },
        py::arg("model"), py::arg("mesh"), py::arg("iters") = 2000, py::arg("step") = 0.02);
}
