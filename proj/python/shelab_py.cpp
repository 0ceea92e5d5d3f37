#include "shelab/errors.hpp"
#include "shelab/experiments.hpp"
#include "shelab/heat_kernel.hpp"
#include "shelab/oracles.hpp"
#include "shelab/report.hpp"
#include "shelab/she_sim.hpp"
#include "shelab/volterra.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace shelab;

namespace {

py::tuple quad(const QuadratureResult& q)
{
    return py::make_tuple(q.value, q.abs_error_estimate);
}

// Normalized field Z(t, x) / p_t(x) for one replicate, with the grid positions.
py::tuple simulate_normalized(double dx, double half_width, double dt, std::uint64_t seed, std::uint64_t replicate,
                              double t)
{
    const GridSpec g{dx, half_width, dt};
    const double cp[] = {t};
    std::vector<Field> out;
    {
        py::gil_scoped_release release;
        out = evolve(g, NoiseStream{seed, replicate}, cp);
    }
    const Field& f = out.front();
    std::vector<double> x(g.cell_count()), u(g.cell_count());
    for (std::size_t j = 0; j < g.cell_count(); ++j) {
        x[j] = g.position(j);
        u[j] = f.normalized(j);
    }
    const auto n = static_cast<py::ssize_t>(x.size());
    return py::make_tuple(py::array_t<double>(n, x.data()), py::array_t<double>(n, u.data()));
}

std::string run_json(const std::string& config_json)
{
    const ExperimentConfig c = config_from_json(config_json);
    RunReport r;
    {
        py::gil_scoped_release release;
        r = run(c);
    }
    return report_to_json(r);
}

} // namespace

PYBIND11_MODULE(_shelab, m)
{
    m.doc() = "Monte Carlo lab for the stochastic heat equation with Dirac initial data";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.attr("__version__") = kSoftwareVersion;

    m.def("heat_kernel", &heat_kernel, py::arg("t"), py::arg("x"));
    m.def("log_heat_kernel", &log_heat_kernel, py::arg("t"), py::arg("x"));
    m.def(
        "kernel_shift_identity",
        [](double t, double s, double a, double b) {
            const auto p = kernel_shift_identity(t, s, a, b);
            return py::make_tuple(p.lhs, p.rhs);
        },
        py::arg("t"), py::arg("s"), py::arg("a"), py::arg("b"));
    m.def(
        "kernel_product_identity",
        [](double t, double x, double y) {
            const auto p = kernel_product_identity(t, x, y);
            return py::make_tuple(p.lhs, p.rhs);
        },
        py::arg("t"), py::arg("x"), py::arg("y"));

    m.def("limiting_constant", [](double t) { return quad(limiting_constant(t)); }, py::arg("t"));
    m.def("reduced_cov_integral", [](double t, double x) { return quad(reduced_cov_integral(t, x)); }, py::arg("t"),
          py::arg("x"));
    m.def("lemma_twotime", [](double a, double b, double N) { return quad(lemma_twotime(a, b, N)); }, py::arg("t1"),
          py::arg("t2"), py::arg("N"));
    m.def("lemma_s0", [](double a, double b, double N) { return quad(lemma_s0(a, b, N)); }, py::arg("t1"),
          py::arg("t2"), py::arg("N"));
    m.def("lemma_2", [](double a, double b, double N) { return quad(lemma_2(a, b, N)); }, py::arg("t1"),
          py::arg("t2"), py::arg("N"));
    m.def("lemma_y", [](double a, double b, double N) { return quad(lemma_y(a, b, N)); }, py::arg("t1"),
          py::arg("t2"), py::arg("N"));

    m.def(
        "second_moment_normalized",
        [](double t, double x, double y) { return SecondMomentVolterra(t).normalized(x, y); }, py::arg("t"),
        py::arg("x"), py::arg("y"),
        "E[Z(t,x) Z(t,y)] / (p_t(x) p_t(y)) from the Volterra oracle (0 < t <= 1).");

    m.def("simulate_normalized", &simulate_normalized, py::arg("dx"), py::arg("half_width"), py::arg("dt"),
          py::arg("seed"), py::arg("replicate"), py::arg("t"),
          "One replicate of Z(t, x) / p_t(x) on a uniform grid; returns (x, values).");

    m.def("validation_errors",
          [](const std::string& config_json) { return validation_errors(config_from_json(config_json)); },
          py::arg("config_json"));
    m.def("run_json", &run_json, py::arg("config_json"), "Runs an experiment; returns report.json text.");
}
