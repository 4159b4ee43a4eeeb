#include "pss/hierarchy.hpp"

#include <cmath>
#include <numbers>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "pss/detail/phi_stepper.hpp"
#include "pss/forms.hpp"

namespace pss {

EtaSeriesField::EtaSeriesField(const GridChart& c, std::size_t order) : chart(c), coeffs(order + 1, ScalarField(c)) {}

EtaSeries EtaSeriesField::at(std::size_t node) const {
    EtaSeries s(order());
    for (std::size_t j = 0; j <= order(); ++j) s[j] = coeffs[j][node];
    return s;
}

void EtaSeriesField::set(std::size_t node, const EtaSeries& s) {
    for (std::size_t j = 0; j <= order(); ++j) coeffs[j][node] = s[j];
}

ScalarField EtaSeriesField::evaluate(double eta) const {
    ScalarField out(chart);
    for (std::size_t p = 0; p < chart.size(); ++p) out[p] = at(p).evaluate(eta);
    return out;
}

namespace {

void require_series(const FrameSeries& fs, const char* where) {
    if (fs.empty()) throw std::invalid_argument(std::string(where) + ": empty frame series");
    for (const auto& f : fs) {
        if (f.n() != 2) throw std::invalid_argument(std::string(where) + ": frame series must be two-dimensional");
        require_same_chart(fs.front().chart, f.chart, where);
    }
}

FrameSeries padded(const FrameSeries& fs, std::size_t order) {
    FrameSeries out(fs.begin(), fs.begin() + static_cast<std::ptrdiff_t>(std::min(fs.size(), order + 1)));
    while (out.size() < order + 1) out.emplace_back(fs.front().chart, 2);
    return out;
}

void step_series(const FrameSeries& fs, std::size_t order, EtaSeriesField& phi, std::size_t from, std::size_t to,
                 std::size_t axis, int dir) {
    const double h = dir * phi.chart.spacing(axis);
    const EtaSeries next = detail::rk4_phi_step(phi.at(from), h, detail::phi_coeffs(fs, order, from, axis, 0),
                                                detail::phi_coeffs(fs, order, from, axis, dir),
                                                detail::phi_coeffs(fs, order, to, axis, 0));
    for (double v : next.coeffs())
        if (!std::isfinite(v))
            throw std::runtime_error("solve_hierarchy: non-finite value at node " + std::to_string(to));
    phi.set(to, next);
}

EtaSeriesField sweep(const FrameSeries& fs, std::size_t order, const std::vector<double>& init,
                     const NodeIndex& base, bool reversed) {
    const GridChart& c = fs.front().chart;
    EtaSeriesField phi(c, order);
    phi.set(c.flat(base), EtaSeries(init));
    const std::vector<std::size_t> axes = reversed ? std::vector<std::size_t>{1, 0} : std::vector<std::size_t>{0, 1};
    staircase_sweep(c, base, axes, [&](std::size_t from, std::size_t to, std::size_t axis, int dir) {
        step_series(fs, order, phi, from, to, axis, dir);
    });
    return phi;
}

// Value at the last node of the line through base along axis.
EtaSeries line_end(const FrameSeries& fs, std::size_t order, const NodeIndex& base, std::size_t axis,
                   const std::vector<double>& init) {
    const GridChart& c = fs.front().chart;
    // Only the line itself is filled; a one-axis sweep does exactly that.
    EtaSeriesField phi(c, order);
    std::size_t node = c.flat(base);
    phi.set(node, EtaSeries(init));
    const std::size_t stride = c.stride(axis);
    for (std::size_t i = base[axis]; i + 1 < c.count(axis); ++i, node += stride)
        step_series(fs, order, phi, node, node + stride, axis, +1);
    return phi.at(node);
}

} // namespace

FrameData evaluate(const FrameSeries& fs, double eta) {
    require_series(fs, "evaluate");
    FrameData out(fs.front().chart, 2);
    double w = 1.0;
    for (const auto& f : fs) {
        for (std::size_t i = 0; i < 2; ++i) out.omega[i] += f.omega[i] * w;
        out.W.upper(0, 1) += f.W.upper(0, 1) * w;
        w *= eta;
    }
    return out;
}

FormTable form_table(const FrameSeries& fs, std::size_t order, std::size_t node) {
    FormTable t;
    for (std::size_t k = 0; k < 2; ++k) {
        const auto c = detail::phi_coeffs(fs, order, node, k, 0);
        t[0][k] = c.w1;
        t[1][k] = c.w2;
        t[2][k] = c.w12;
    }
    return t;
}

std::array<EtaSeries, 2> phi_system_rhs(const FormTable& f, const EtaSeries& phi) {
    const auto [s, c] = sin_cos(phi);
    return {f[2][0] + f[0][0] * s + f[1][0] * c, f[2][1] + f[0][1] * s + f[1][1] * c};
}

std::array<EtaSeries, 2> closed_form_coeffs(const FormTable& f, const EtaSeries& phi) {
    const auto [s, c] = sin_cos(phi);
    return {f[0][0] * c - f[1][0] * s, f[0][1] * c - f[1][1] * s};
}

std::vector<std::array<ScalarField, 2>> expand_phi_system(const FrameSeries& fs, const EtaSeriesField& phi) {
    require_series(fs, "expand_phi_system");
    require_same_chart(fs.front().chart, phi.chart, "expand_phi_system");
    const std::size_t order = phi.order();
    if (fs.size() > order + 1 || fs.size() < 1)
        throw std::invalid_argument("expand_phi_system: frame series order exceeds phi order");
    std::vector<std::array<ScalarField, 2>> out(order + 1, {ScalarField(phi.chart), ScalarField(phi.chart)});
    for (std::size_t p = 0; p < phi.chart.size(); ++p) {
        const auto rhs = phi_system_rhs(form_table(fs, order, p), phi.at(p));
        for (std::size_t j = 0; j <= order; ++j) {
            out[j][0][p] = rhs[0][j];
            out[j][1][p] = rhs[1][j];
        }
    }
    return out;
}

std::vector<StructureResiduals> series_structure_residuals(const FrameSeries& fs_in, std::size_t order,
                                                           double curvature) {
    require_series(fs_in, "series_structure_residuals");
    const FrameSeries fs = padded(fs_in, order);
    const GridChart& c = fs.front().chart;
    std::vector<char> include(c.size(), 0);
    for (std::size_t p = 0; p < c.size(); ++p) include[p] = c.is_interior(p);

    std::vector<StructureResiduals> out(order + 1);
    for (std::size_t j = 0; j <= order; ++j) {
        const OneFormField& w12 = fs[j].W.upper(0, 1);
        // d omega_1 - omega_2 ^ omega_21, d omega_2 - omega_1 ^ omega_12
        TwoFormField r1a = d_oneform(fs[j].omega[0]);
        TwoFormField r1b = d_oneform(fs[j].omega[1]);
        TwoFormField r2 = d_oneform(w12);
        for (std::size_t a = 0; a <= j; ++a) {
            const FrameData& fa = fs[a];
            const FrameData& fb = fs[j - a];
            r1a += wedge(fa.omega[1], fb.W.upper(0, 1));
            r1b -= wedge(fa.omega[0], fb.W.upper(0, 1));
            r2 += wedge(fa.omega[0], fb.omega[1]) * curvature;
        }
        for (const TwoFormField* r : {&r1a, &r1b})
            for (const auto& comp : r->coeffs) out[j].norms1.merge(masked_norms(comp, include));
        for (const auto& comp : r2.coeffs) out[j].norms2.merge(masked_norms(comp, include));
        out[j].res1 = out[j].norms1.max;
        out[j].res2 = out[j].norms2.max;
    }
    return out;
}

HierarchyResult solve_hierarchy(const FrameSeries& fs_in, std::size_t order, std::vector<double> phi_init,
                                const NodeIndex& base, const HierarchyOptions& opts) {
    require_series(fs_in, "solve_hierarchy");
    if (order > opts.order_cap)
        throw std::invalid_argument("solve_hierarchy: order " + std::to_string(order) + " exceeds the cap " +
                                    std::to_string(opts.order_cap));
    const GridChart& c = fs_in.front().chart;
    if (base.size() != 2 || !c.contains(base)) throw std::invalid_argument("solve_hierarchy: base outside the chart");
    if (phi_init.size() > order + 1) throw std::invalid_argument("solve_hierarchy: too many initial values");
    phi_init.resize(order + 1, 0.0);
    const FrameSeries fs = padded(fs_in, order);

    HierarchyResult res;
    res.phi_init = phi_init;
    res.structure = series_structure_residuals(fs, order, -1.0);
    if (opts.solver.gate_factor > 0.0) {
        double m = 1.0;
        for (const auto& f : fs) m = std::max(m, f.max_coefficient());
        const double h = c.max_spacing();
        const double tol = opts.solver.gate_factor * h * h * m * m;
        for (std::size_t j = 0; j <= order; ++j) {
            const auto& s = res.structure[j];
            if (!(s.res1 <= tol && s.res2 <= tol))
                throw GateError("structure gate failed at order " + std::to_string(j) + ": res1=" +
                                    format_real(s.res1) + " res2=" + format_real(s.res2) +
                                    " tolerance=" + format_real(tol),
                                s, tol);
        }
    }

    res.phi = sweep(fs, order, phi_init, base, false);
    const EtaSeriesField rev = sweep(fs, order, phi_init, base, true);
    res.compat_residual.assign(order + 1, 0.0);
    for (std::size_t j = 0; j <= order; ++j)
        for (std::size_t p = 0; p < c.size(); ++p)
            res.compat_residual[j] =
                std::max(res.compat_residual[j], std::abs(res.phi.coeffs[j][p] - rev.coeffs[j][p]));

    res.theta.assign(order + 1, OneFormField(c));
    for (std::size_t p = 0; p < c.size(); ++p) {
        const auto th = closed_form_coeffs(form_table(fs, order, p), res.phi.at(p));
        for (std::size_t j = 0; j <= order; ++j) {
            res.theta[j].coeffs[0][p] = th[0][j];
            res.theta[j].coeffs[1][p] = th[1][j];
        }
    }
    for (const auto& t : res.theta) res.closed_residual.push_back(closedness_residual(t));
    return res;
}

std::vector<double> periodic_seed(const FrameSeries& fs_in, std::size_t order, const NodeIndex& base,
                                  std::size_t axis, double guess0) {
    require_series(fs_in, "periodic_seed");
    const GridChart& c = fs_in.front().chart;
    if (axis >= 2 || base.size() != 2 || !c.contains(base) || base[axis] != 0)
        throw std::invalid_argument("periodic_seed: base must be the first node of the periodic axis");
    const FrameSeries fs = padded(fs_in, order);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    // Order 0: the return map P is a circle map; solve P(phi) = phi + 2 pi k.
    auto ret0 = [&](double x) { return line_end(fs, 0, base, axis, {x})[0]; };
    const double k = std::round((ret0(guess0) - guess0) / two_pi);
    auto g = [&](double x) { return ret0(x) - x - two_pi * k; };

    constexpr int samples = 96;
    std::vector<double> xs(samples + 1), gs(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        xs[i] = guess0 - std::numbers::pi + two_pi * i / samples;
        gs[i] = g(xs[i]);
    }
    double best = std::numeric_limits<double>::quiet_NaN();
    bool best_stable = false;
    for (int i = 0; i < samples; ++i) {
        if (gs[i] == 0.0 || gs[i] * gs[i + 1] < 0.0) {
            double root = xs[i];
            if (gs[i] != 0.0) {
                std::uintmax_t iters = 200;
                const auto r = boost::math::tools::toms748_solve(
                    g, xs[i], xs[i + 1], gs[i], gs[i + 1], boost::math::tools::eps_tolerance<double>(52), iters);
                root = 0.5 * (r.first + r.second);
            }
            // Stable fixed points (g decreasing) damp integration error along the line.
            const bool stable = gs[i + 1] < gs[i];
            const bool better = std::isnan(best) || (stable && !best_stable) ||
                                (stable == best_stable && std::abs(root - guess0) < std::abs(best - guess0));
            if (better) {
                best = root;
                best_stable = stable;
            }
        }
    }
    if (std::isnan(best)) throw std::runtime_error("periodic_seed: no periodic solution for order 0");

    std::vector<double> seed(order + 1, 0.0);
    seed[0] = best;
    // Orders j >= 1 enter linearly: phi_j(end) = A phi_j(start) + B.
    for (std::size_t j = 1; j <= order; ++j) {
        std::vector<double> init(seed.begin(), seed.begin() + static_cast<std::ptrdiff_t>(j + 1));
        init[j] = 0.0;
        const double b = line_end(fs, j, base, axis, init)[j];
        init[j] = 1.0;
        const double a = line_end(fs, j, base, axis, init)[j] - b;
        if (std::abs(1.0 - a) < 1e-12)
            throw std::runtime_error("periodic_seed: order " + std::to_string(j) + " return map is singular");
        seed[j] = b / (1.0 - a);
    }
    return seed;
}

} // namespace pss
