#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <string>
#include <vector>

#include "mmphase/analysis.hpp"
#include "mmphase/error.hpp"
#include "mmphase/integrate.hpp"
#include "mmphase/isoclines.hpp"
#include "mmphase/kinetics.hpp"
#include "mmphase/series.hpp"
#include "mmphase/slow_manifold.hpp"

namespace py = pybind11;
using namespace mmphase;

namespace {

py::dict spectrum_dict(const Parameters& p) {
    const Spectrum s = spectrum(p);
    py::dict d;
    d["lambda_plus"] = s.lambda_plus;
    d["lambda_minus"] = s.lambda_minus;
    d["kappa"] = s.kappa;
    d["sigma"] = s.sigma;
    d["v_plus"] = py::make_tuple(s.v_plus.x, s.v_plus.y);
    d["v_minus"] = py::make_tuple(s.v_minus.x, s.v_minus.y);
    d["resonant"] = s.resonance.resonant;
    d["near_resonant"] = s.resonance.near_resonant;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Phase-plane analysis of the reduced Michaelis-Menten system";

    static py::exception<Error> error(m, "MmphaseError");
    py::register_exception_translator([](std::exception_ptr e) {
        try {
            if (e) std::rethrow_exception(e);
        } catch (const Error& ex) {
            const std::string kind(to_string(ex.kind()));
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(kind + ": " + ex.what());
            exc.attr("kind") = kind;
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<Parameters>(m, "Parameters")
        .def(py::init<double, double>(), py::arg("eps"), py::arg("eta"))
        .def_property_readonly("eps", &Parameters::eps)
        .def_property_readonly("eta", &Parameters::eta)
        .def("__repr__", [](const Parameters& p) {
            return "Parameters(eps=" + std::to_string(p.eps()) + ", eta=" + std::to_string(p.eta()) + ")";
        });

    m.def(
        "nondimensionalize",
        [](double k1, double k_minus1, double k2, double e0, double s0) {
            const auto nd = nondimensionalize(RateConstants{k1, k_minus1, k2, e0, s0});
            py::dict scaling;
            scaling["x_per_s"] = nd.scaling.x_per_s;
            scaling["y_per_c"] = nd.scaling.y_per_c;
            scaling["t_per_tau"] = nd.scaling.t_per_tau;
            return py::make_tuple(nd.params, scaling);
        },
        py::arg("k1"), py::arg("k_minus1"), py::arg("k2"), py::arg("e0"), py::arg("s0") = 0.0);

    m.def("spectrum", &spectrum_dict, py::arg("p"));
    m.def("eta_from_kappa", &eta_from_kappa, py::arg("eps"), py::arg("kappa"));
    m.def("slope", [](const Parameters& p, double x, double y) { return slope_field(p, {x, y}); });
    m.def("K", &K, py::arg("p"), py::arg("c"));
    m.def("F", &F, py::arg("p"), py::arg("x"), py::arg("c"));
    m.def("horizontal_isocline", &horizontal_isocline, py::arg("x"));
    m.def("vertical_isocline", &vertical_isocline, py::arg("p"), py::arg("x"));
    m.def("alpha_isocline", [](const Parameters& p, double x) { return alpha_isocline(spectrum(p).sigma, x); });

    m.def(
        "origin_coefficients", [](const Parameters& p, std::size_t n) { return origin_coefficients(p, n).coeffs; },
        py::arg("p"), py::arg("n"));
    m.def(
        "infinity_coefficients", [](const Parameters& p, std::size_t n) { return infinity_coefficients(p, n).coeffs; },
        py::arg("p"), py::arg("n"));

    m.def(
        "integrate_time",
        [](const Parameters& p, double x0, double y0, double t_end, double rtol, double atol) {
            const Trajectory tr = integrate_time(p, {x0, y0}, t_end, {rtol, atol});
            std::vector<double> t, x, y;
            for (const auto& s : tr.samples) {
                t.push_back(s.t);
                x.push_back(s.point.x);
                y.push_back(s.point.y);
            }
            py::list events;
            for (const auto& e : tr.events) {
                events.append(py::make_tuple(std::string(to_string(e.kind)), e.t, e.point.x, e.point.y));
            }
            py::dict d;
            d["t"] = t;
            d["x"] = x;
            d["y"] = y;
            d["events"] = events;
            return d;
        },
        py::arg("p"), py::arg("x0"), py::arg("y0"), py::arg("t_end"), py::arg("rtol") = 1e-10,
        py::arg("atol") = 1e-12);

    m.def(
        "slow_manifold",
        [](const Parameters& p, double x_min, double x_max, std::size_t grid) {
            ManifoldOptions o;
            o.x_min = x_min;
            o.x_max = x_max;
            o.grid_points = grid;
            const SlowManifold sm = compute_manifold(p, o);
            py::dict d;
            const auto as_vector = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };
            d["x"] = as_vector(sm.curve.grid());
            d["M"] = as_vector(sm.curve.values());
            d["dM"] = as_vector(sm.curve.slopes());
            d["fence_margin"] = sm.fence_margin;
            return d;
        },
        py::arg("p"), py::arg("x_min") = 1e-3, py::arg("x_max") = 1e3, py::arg("grid") = 600);

    m.def("h_aux", [](const Parameters& p, double x, double y) { return h_aux(p, {x, y}); });

    m.def(
        "gamma1_entry",
        [](const Parameters& p, double x0, double y0, double horizon) {
            const EntryReport r = gamma1_entry(p, {x0, y0}, horizon);
            py::dict d;
            d["outcome"] = std::string(to_string(r.outcome));
            d["t_enter"] = r.t_enter;
            d["x_star"] = r.x_star;
            d["entry_guaranteed"] = r.entry_guaranteed;
            return d;
        },
        py::arg("p"), py::arg("x0"), py::arg("y0"), py::arg("horizon") = 100.0);
}
