#include "pss/rotation_solver.hpp"

#include <array>
#include <cmath>
#include <string>

#include "pss/detail/phi_stepper.hpp"
#include "pss/forms.hpp"

namespace pss {

namespace {

void require_base(const GridChart& c, const NodeIndex& base) {
    if (base.size() != c.dim() || !c.contains(base))
        throw std::invalid_argument("rotation solver: base node outside the chart");
}

std::vector<std::size_t> axis_order(std::size_t n, bool reversed) {
    std::vector<std::size_t> order(n);
    for (std::size_t a = 0; a < n; ++a) order[a] = reversed ? n - 1 - a : a;
    return order;
}

[[noreturn]] void non_finite(std::size_t node) {
    throw std::runtime_error("rotation solver: non-finite value at node " + std::to_string(node));
}

struct AxisCoeffs {
    Eigen::VectorXd w;  // omega_i(d/dx_axis)
    Matrix W;           // omega_ij(d/dx_axis)
};

AxisCoeffs axis_coeffs(const FrameData& fd, std::size_t node, std::size_t axis, int half_dir) {
    const std::size_t n = fd.n();
    AxisCoeffs c{Eigen::VectorXd(n), Matrix::Zero(n, n)};
    for (std::size_t i = 0; i < n; ++i) c.w(i) = detail::sample(fd.omega[i].coeffs[axis], node, axis, half_dir);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            c.W(i, j) = detail::sample(fd.W.upper(i, j).coeffs[axis], node, axis, half_dir);
            c.W(j, i) = -c.W(i, j);
        }
    return c;
}

// A = dL L^t along one axis, reconstructed from the special-frame equations.
Matrix generator(const AxisCoeffs& c, const Matrix& l) {
    const Eigen::Index n = l.rows();
    const Matrix m = l * c.W * l.transpose();
    const Eigen::VectorXd lw = l * c.w;
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) {
        a(0, i) = -m(0, i) - lw(i);
        a(i, 0) = -a(0, i);
    }
    for (Eigen::Index i = 1; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            a(i, j) = -m(i, j);
            a(j, i) = -a(i, j);
        }
    return a;
}

ScalarField sweep_phi(const FrameData& fd, double phi0, const NodeIndex& base, bool reversed) {
    const GridChart& c = fd.chart;
    ScalarField phi(c, 0.0);
    phi[c.flat(base)] = phi0;
    const auto order = axis_order(2, reversed);
    staircase_sweep(c, base, order, [&](std::size_t from, std::size_t to, std::size_t axis, int dir) {
        const double h = dir * c.spacing(axis);
        phi[to] = detail::rk4_phi_step(phi[from], h, detail::phi_coeffs(fd, from, axis, 0),
                                       detail::phi_coeffs(fd, from, axis, dir),
                                       detail::phi_coeffs(fd, to, axis, 0));
        if (!std::isfinite(phi[to])) non_finite(to);
    });
    return phi;
}

FrameRotationField sweep_L(const FrameData& fd, const Matrix& l0, const NodeIndex& base, bool reversed) {
    const GridChart& c = fd.chart;
    FrameRotationField rot(c, fd.n());
    rot.set(c.flat(base), l0);
    const auto order = axis_order(fd.n(), reversed);
    staircase_sweep(c, base, order, [&](std::size_t from, std::size_t to, std::size_t axis, int dir) {
        const std::array<AxisCoeffs, 3> stage{axis_coeffs(fd, from, axis, 0), axis_coeffs(fd, from, axis, dir),
                                              axis_coeffs(fd, to, axis, 0)};
        const double h = dir * c.spacing(axis);
        const Matrix next =
            rkmk4_step(rot.at(from), h, [&](int s, const Matrix& l) { return generator(stage[s], l); });
        if (!next.allFinite()) non_finite(to);
        rot.set(to, next);
    });
    return rot;
}

} // namespace

double structure_gate_tolerance(const FrameData& fd, double gate_factor) {
    const double h = fd.chart.max_spacing();
    const double scale = std::max(1.0, fd.max_coefficient());
    return gate_factor * h * h * scale * scale;
}

StructureResiduals check_structure_gate(const FrameData& fd, const SolverOptions& opts) {
    StructureResiduals res = structure_residuals(fd, -1.0, opts.nondegeneracy);
    if (opts.gate_factor <= 0.0) return res;
    const double tol = structure_gate_tolerance(fd, opts.gate_factor);
    if (!(res.res1 <= tol && res.res2 <= tol))
        throw GateError("structure gate failed: res1=" + format_real(res.res1) + " res2=" + format_real(res.res2) +
                            " tolerance=" + format_real(tol),
                        res, tol);
    return res;
}

OneFormField closed_form_from_L(const FrameData& fd, const FrameRotationField& rotation) {
    require_same_chart(fd.chart, rotation.chart, "closed_form_from_L");
    const std::size_t n = fd.n();
    OneFormField theta(fd.chart);
    for (std::size_t p = 0; p < fd.chart.size(); ++p) {
        const double* l = &rotation.entries[p * n * n];
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += l[j] * fd.omega[j].coeffs[k].values[p];
            theta.coeffs[k].values[p] = acc;
        }
    }
    return theta;
}

SolveReport solve_phi_2d(const FrameData& fd, double phi0, const NodeIndex& base, const SolverOptions& opts) {
    if (fd.n() != 2) throw std::invalid_argument("solve_phi_2d: frame data must be two-dimensional");
    require_base(fd.chart, base);
    if (!std::isfinite(phi0)) throw std::invalid_argument("solve_phi_2d: phi0 must be finite");

    SolveReport rep;
    rep.structure = check_structure_gate(fd, opts);
    rep.base = base;
    const ScalarField phi = sweep_phi(fd, phi0, base, false);
    const ScalarField phi_rev = sweep_phi(fd, phi0, base, true);
    for (std::size_t p = 0; p < phi.size(); ++p)
        rep.compat_residual = std::max(rep.compat_residual, std::abs(phi[p] - phi_rev[p]));
    rep.rotation = FrameRotationField::from_angle(phi);
    rep.theta1 = closed_form_from_L(fd, rep.rotation);
    rep.closed_residual = closedness_residual(rep.theta1);
    rep.orth_residual = rep.rotation.orthogonality_residual();
    return rep;
}

SolveReport solve_L_nd(const FrameData& fd, const Matrix& l0, const NodeIndex& base, const SolverOptions& opts) {
    const std::size_t n = fd.n();
    if (n < 2) throw std::invalid_argument("solve_L_nd: n must be at least 2");
    require_base(fd.chart, base);
    if (static_cast<std::size_t>(l0.rows()) != n || static_cast<std::size_t>(l0.cols()) != n)
        throw std::invalid_argument("solve_L_nd: L0 has the wrong size");
    if (!(orthogonality_defect(l0) <= 1e-12))
        throw std::invalid_argument("solve_L_nd: L0 is not orthogonal (defect " +
                                    format_real(orthogonality_defect(l0)) + ")");

    SolveReport rep;
    rep.structure = check_structure_gate(fd, opts);
    rep.base = base;
    rep.rotation = sweep_L(fd, l0, base, false);
    const FrameRotationField rev = sweep_L(fd, l0, base, true);
    for (std::size_t q = 0; q < rev.entries.size(); ++q)
        rep.compat_residual = std::max(rep.compat_residual, std::abs(rep.rotation.entries[q] - rev.entries[q]));
    rep.theta1 = closed_form_from_L(fd, rep.rotation);
    rep.closed_residual = closedness_residual(rep.theta1);
    rep.orth_residual = rep.rotation.orthogonality_residual();
    return rep;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
    require_same_chart(x.chart, y.chart, "lie_bracket");
    const GridChart& c = x.chart;
    const std::size_t n = c.dim();
    VectorField out{c, std::vector<ScalarField>(n, ScalarField(c))};
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const auto dy = partial(y.comps[k], l);
            const auto dx = partial(x.comps[k], l);
            auto& o = out.comps[k].values;
            for (std::size_t p = 0; p < c.size(); ++p)
                o[p] += x.comps[l].values[p] * dy[p] - y.comps[l].values[p] * dx[p];
        }
    }
    return out;
}

SpecialCoordinatesReport special_coordinates_check(const FrameData& fd, const SolveReport& report,
                                                   std::span<const double> c, double rel_threshold) {
    const std::size_t n = fd.n();
    if (c.size() != n - 1)
        throw std::invalid_argument("special_coordinates_check: expected " + std::to_string(n - 1) + " constants");
    for (double ci : c)
        if (!(ci > 0.0)) throw std::invalid_argument("special_coordinates_check: constants must be positive");
    require_same_chart(fd.chart, report.rotation.chart, "special_coordinates_check");

    const GridChart& chart = fd.chart;
    const auto e = frame_vector_fields(fd, rel_threshold);

    // v_i = sum_j L_ij e_j
    std::vector<VectorField> v(n, VectorField{chart, std::vector<ScalarField>(n, ScalarField(chart))});
    for (std::size_t p = 0; p < chart.size(); ++p) {
        const double* l = &report.rotation.entries[p * n * n];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += l[i * n + j] * e[j].comps[k].values[p];
                v[i].comps[k].values[p] = acc;
            }
    }

    SpecialCoordinatesReport out;
    PotentialResult pot = potential(report.theta1, report.base);
    out.G = pot.G;
    out.path_residual = pot.path_residual;

    std::vector<VectorField> rv;
    for (std::size_t i = 1; i < n; ++i) {
        ScalarField r(chart);
        for (std::size_t p = 0; p < chart.size(); ++p) r[p] = c[i - 1] * std::exp(-out.G[p]);
        VectorField s = v[i];
        for (auto& comp : s.comps) comp = r * comp;
        out.r.push_back(std::move(r));
        rv.push_back(std::move(s));
    }

    auto bracket_max = [](const VectorField& a, const VectorField& b) {
        const VectorField br = lie_bracket(a, b);
        double m = 0.0;
        for (const auto& comp : br.comps) m = std::max(m, interior_norms(comp).max);
        return m;
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out.bracket_1i.push_back(bracket_max(v[0], rv[i]));
        out.max_bracket_1i = std::max(out.max_bracket_1i, out.bracket_1i.back());
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
            out.bracket_ij.push_back(bracket_max(rv[i], rv[j]));
            out.max_bracket_ij = std::max(out.max_bracket_ij, out.bracket_ij.back());
        }
    return out;
}

} // namespace pss
