#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pss/cli.hpp"
#include "pss/conservation.hpp"
#include "pss/hierarchy.hpp"
#include "pss/models.hpp"
#include "pss/rotation_solver.hpp"

namespace py = pybind11;
using namespace pss;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_array(const ScalarField& f) {
    std::vector<py::ssize_t> shape(f.chart.counts().begin(), f.chart.counts().end());
    py::array_t<double> a(shape);
    std::copy(f.values.begin(), f.values.end(), a.mutable_data());
    return a;
}

py::list to_list(const OneFormField& f) {
    py::list out;
    for (const auto& c : f.coeffs) out.append(to_array(c));
    return out;
}

py::array_t<double> rotation_array(const FrameRotationField& r) {
    std::vector<py::ssize_t> shape(r.chart.counts().begin(), r.chart.counts().end());
    shape.push_back(py::ssize_t(r.n));
    shape.push_back(py::ssize_t(r.n));
    py::array_t<double> a(shape);
    std::copy(r.entries.begin(), r.entries.end(), a.mutable_data());
    return a;
}

GridChart chart_of(const std::vector<double>& origin, const std::vector<double>& spacing,
                   const std::vector<std::size_t>& counts) {
    return GridChart(origin, spacing, counts);
}

ScalarField field_of(const GridChart& c, const Array& a) {
    if (std::size_t(a.size()) != c.size()) throw std::invalid_argument("array size does not match the chart");
    return ScalarField(c, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["rotation"] = rotation_array(r.rotation);
    if (r.rotation.phi) d["phi"] = to_array(*r.rotation.phi);
    d["theta1"] = to_list(r.theta1);
    d["base"] = r.base;
    d["closed_residual"] = r.closed_residual;
    d["compat_residual"] = r.compat_residual;
    d["orth_residual"] = r.orth_residual;
    d["res1"] = r.structure.res1;
    d["res2"] = r.structure.res2;
    return d;
}

py::dict solve_frame(const FrameData& fd, const std::optional<Matrix>& l0, double phi0,
                     const std::optional<NodeIndex>& base, double gate_factor) {
    SolverOptions opts;
    opts.gate_factor = gate_factor;
    const NodeIndex b = base ? *base : fd.chart.center();
    if (!l0 && fd.n() == 2) return report_dict(solve_phi_2d(fd, phi0, b, opts));
    return report_dict(solve_L_nd(fd, l0 ? *l0 : Matrix::Identity(fd.n(), fd.n()), b, opts));
}

py::dict conservation_dict(const ConservationReport& r) {
    py::dict d;
    d["time_axis"] = r.time_axis;
    py::list qs;
    for (const auto& q : r.quantities) {
        py::dict e;
        e["axis"] = q.axis;
        e["t"] = q.t;
        e["Q"] = q.Q;
        e["drift"] = q.drift;
        e["relative_drift"] = q.relative_drift;
        e["flux_residual"] = q.flux_residual;
        e["boundary_flux"] = q.boundary_flux;
        qs.append(e);
    }
    d["quantities"] = qs;
    d["max_relative_drift"] = r.max_relative_drift();
    d["max_flux_residual"] = r.max_flux_residual();
    d["max_cross_residual"] = r.max_cross_residual;
    return d;
}

py::dict state_dict(const CamassaHolmState& s) {
    py::dict d;
    std::vector<double> x, t;
    for (std::size_t i = 0; i < s.chart.count(0); ++i) x.push_back(s.chart.coord(0, i));
    for (std::size_t i = 0; i < s.chart.count(1); ++i) t.push_back(s.chart.coord(1, i));
    d["x"] = x;
    d["t"] = t;
    d["m"] = s.m;
    d["u"] = to_array(s.u);
    d["u_x"] = to_array(s.u_x);
    d["h"] = to_array(s.h);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Special frames, closed one-forms and conservation laws on sampled charts";

    py::register_exception<GateError>(m, "GateError", PyExc_RuntimeError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<EvolveError>(m, "EvolveError", PyExc_RuntimeError);
    py::register_exception<DegenerateFrameError>(m, "DegenerateFrameError", PyExc_RuntimeError);

    m.def(
        "sine_gordon",
        [](std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> counts,
           const std::string& kink, double velocity, double phi0, std::optional<Matrix> L0,
           std::optional<NodeIndex> base, double gate_factor) {
            if (kink != "static" && kink != "moving") throw std::invalid_argument("kink must be static or moving");
            const auto s = sg_solution(chart_of(origin, spacing, counts),
                                       kink == "static" ? KinkKind::static_kink : KinkKind::moving_kink, velocity);
            auto d = solve_frame(sg_forms(s), L0, phi0, base, gate_factor);
            d["u"] = to_array(s.u);
            d["pde_residual"] = sg_pde_residual(s.u);
            return d;
        },
        py::arg("origin"), py::arg("spacing"), py::arg("counts"), py::arg("kink") = "static",
        py::arg("velocity") = 0.0, py::arg("phi0") = 0.0, py::arg("L0") = py::none(), py::arg("base") = py::none(),
        py::arg("gate_factor") = defaults::gate_factor,
        "Kink solution of u_x1x1 - u_x2x2 = sin u and its special frame. Uses the angle solver unless L0 is given.");

    m.def(
        "igsge",
        [](std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> counts,
           std::vector<double> c, std::optional<Matrix> L0, std::optional<NodeIndex> base, double gate_factor,
           std::size_t time_axis) {
            const auto st = igsge_explicit_solution(chart_of(origin, spacing, counts), c);
            const auto fd = igsge_forms(st);
            SolverOptions opts;
            opts.gate_factor = gate_factor;
            const auto rep = solve_L_nd(fd, L0 ? *L0 : Matrix::Identity(fd.n(), fd.n()),
                                        base ? *base : fd.chart.center(), opts);
            auto d = report_dict(rep);
            const auto r = igsge_residual(st);
            d["model_residual"] = r.max();
            d["conservation"] = conservation_dict(analyze(rep.theta1, time_axis));
            return d;
        },
        py::arg("origin"), py::arg("spacing"), py::arg("counts"), py::arg("c"), py::arg("L0") = py::none(),
        py::arg("base") = py::none(), py::arg("gate_factor") = defaults::gate_factor, py::arg("time_axis") = 0,
        "Explicit IGSGE solution with V_1 = tanh x1, V_j = c_j sech x1, solved for L.");

    m.def(
        "ch_evolve",
        [](const Array& u0, double period, double m, double T, std::size_t steps) {
            std::span<const double> s(u0.data(), std::size_t(u0.size()));
            return state_dict(ch_evolve(s, period, m, T, steps));
        },
        py::arg("u0"), py::arg("period"), py::arg("m"), py::arg("T"), py::arg("steps"),
        "Periodic Camassa-Holm evolution. Arrays have axes (x, t) with the x end point repeated.");

    m.def(
        "ch_hierarchy",
        [](const Array& u0, double period, double m, double T, std::size_t steps, std::size_t order,
           std::optional<std::vector<double>> phi_init, double gate_factor) {
            std::span<const double> s(u0.data(), std::size_t(u0.size()));
            const auto st = ch_evolve(s, period, m, T, steps);
            const auto fs = ch_forms_series(st, 2);
            const NodeIndex base{0, 0};
            HierarchyOptions opts;
            opts.solver.gate_factor = gate_factor;
            const auto init = phi_init ? *phi_init : periodic_seed(fs, order, base, 0);
            const auto h = solve_hierarchy(fs, order, init, base, opts);
            py::dict d = state_dict(st);
            py::list phi, theta, cons;
            for (const auto& c : h.phi.coeffs) phi.append(to_array(c));
            for (const auto& t : h.theta) theta.append(to_list(t));
            for (const auto& r : hierarchy_report(h.theta, 1)) cons.append(conservation_dict(r));
            d["phi"] = phi;
            d["theta"] = theta;
            d["phi_init"] = h.phi_init;
            d["closed_residual"] = h.closed_residual;
            d["compat_residual"] = h.compat_residual;
            d["conservation"] = cons;
            return d;
        },
        py::arg("u0"), py::arg("period"), py::arg("m"), py::arg("T"), py::arg("steps"), py::arg("order") = 1,
        py::arg("phi_init") = py::none(), py::arg("gate_factor") = defaults::gate_factor,
        "Camassa-Holm evolution followed by the order-by-order angle hierarchy and its conservation report.");

    m.def(
        "ch_residual",
        [](const Array& u, std::vector<double> origin, std::vector<double> spacing, double m) {
            if (u.ndim() != 2) throw std::invalid_argument("u must have axes (x, t)");
            const GridChart c(origin, spacing, {std::size_t(u.shape(0)), std::size_t(u.shape(1))});
            return ch_pde_residual(ch_state(field_of(c, u), m));
        },
        py::arg("u"), py::arg("origin"), py::arg("spacing"), py::arg("m"),
        "Finite-difference Camassa-Holm residual of sampled u(x, t).");

    m.def(
        "ch_frame",
        [](const Array& u, std::vector<double> origin, std::vector<double> spacing, double m, double eta, double phi0,
           std::optional<NodeIndex> base, double gate_factor) {
            if (u.ndim() != 2) throw std::invalid_argument("u must have axes (x, t)");
            const GridChart c(origin, spacing, {std::size_t(u.shape(0)), std::size_t(u.shape(1))});
            SolverOptions opts;
            opts.gate_factor = gate_factor;
            const auto fd = ch_forms(ch_state(field_of(c, u), m), eta);
            return report_dict(solve_phi_2d(fd, phi0, base ? *base : NodeIndex{0, 0}, opts));
        },
        py::arg("u"), py::arg("origin"), py::arg("spacing"), py::arg("m"), py::arg("eta") = 0.0,
        py::arg("phi0") = 0.0, py::arg("base") = py::none(), py::arg("gate_factor") = defaults::gate_factor,
        "Angle solve on the Camassa-Holm frame of sampled u(x, t) at a fixed eta; the gate rejects non-solutions.");

    m.def(
        "conservation",
        [](const std::vector<Array>& theta, std::vector<double> origin, std::vector<double> spacing,
           std::size_t time_axis) {
            if (theta.empty()) throw std::invalid_argument("theta has no coefficients");
            std::vector<std::size_t> counts(theta[0].shape(), theta[0].shape() + theta[0].ndim());
            const GridChart c(origin, spacing, counts);
            std::vector<ScalarField> cs;
            for (const auto& a : theta) cs.push_back(field_of(c, a));
            return conservation_dict(analyze(OneFormField(std::move(cs)), time_axis));
        },
        py::arg("theta"), py::arg("origin"), py::arg("spacing"), py::arg("time_axis"),
        "Conserved quantities and flux residuals of a closed one-form given by its coefficient arrays.");

    m.def(
        "run",
        [](const std::string& command, const std::filesystem::path& config,
           std::optional<std::filesystem::path> out, std::size_t grid_scale) {
            std::ostringstream o, e;
            const int code = cli::run(command, config, out, grid_scale, o, e);
            return py::make_tuple(code, o.str(), e.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("grid_scale") = 1,
        "Runs a pssframe command; returns (exit_code, stdout, stderr).");

    m.attr("gate_factor") = defaults::gate_factor;
}
