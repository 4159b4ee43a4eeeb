#include "pss/forms.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace pss {

std::vector<double> partial(const ScalarField& f, std::size_t axis) {
    const GridChart& c = f.chart;
    const std::size_t stride = c.stride(axis);
    const std::size_t count = c.count(axis);
    const double inv2h = 0.5 / c.spacing(axis);
    std::vector<double> out(f.values.size());
    const auto& v = f.values;
    for (std::size_t p = 0; p < v.size(); ++p) {
        const std::size_t i = c.axis_index(p, axis);
        if (i == 0)
            out[p] = (-3.0 * v[p] + 4.0 * v[p + stride] - v[p + 2 * stride]) * inv2h;
        else if (i + 1 == count)
            out[p] = (3.0 * v[p] - 4.0 * v[p - stride] + v[p - 2 * stride]) * inv2h;
        else
            out[p] = (v[p + stride] - v[p - stride]) * inv2h;
    }
    return out;
}

std::vector<double> partial2(const ScalarField& f, std::size_t axis) {
    const GridChart& c = f.chart;
    const std::size_t stride = c.stride(axis);
    const std::size_t count = c.count(axis);
    const double invh2 = 1.0 / (c.spacing(axis) * c.spacing(axis));
    std::vector<double> out(f.values.size());
    const auto& v = f.values;
    for (std::size_t p = 0; p < v.size(); ++p) {
        const std::size_t i = c.axis_index(p, axis);
        if (count >= 4 && i == 0)
            out[p] = (2.0 * v[p] - 5.0 * v[p + stride] + 4.0 * v[p + 2 * stride] - v[p + 3 * stride]) * invh2;
        else if (count >= 4 && i + 1 == count)
            out[p] = (2.0 * v[p] - 5.0 * v[p - stride] + 4.0 * v[p - 2 * stride] - v[p - 3 * stride]) * invh2;
        else if (i == 0)
            out[p] = (v[p] - 2.0 * v[p + stride] + v[p + 2 * stride]) * invh2;
        else if (i + 1 == count)
            out[p] = (v[p] - 2.0 * v[p - stride] + v[p - 2 * stride]) * invh2;
        else
            out[p] = (v[p + stride] - 2.0 * v[p] + v[p - stride]) * invh2;
    }
    return out;
}

OneFormField d_scalar(const ScalarField& f) {
    OneFormField df(f.chart);
    for (std::size_t k = 0; k < f.chart.dim(); ++k) df.coeffs[k].values = partial(f, k);
    return df;
}

TwoFormField d_oneform(const OneFormField& theta) {
    const std::size_t n = theta.chart.dim();
    TwoFormField out(theta.chart);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k + 1; l < n; ++l) {
            const auto a = partial(theta.coeffs[l], k);
            const auto b = partial(theta.coeffs[k], l);
            auto& dst = out.at(k, l).values;
            for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = a[p] - b[p];
        }
    }
    return out;
}

TwoFormField wedge(const OneFormField& alpha, const OneFormField& beta) {
    require_same_chart(alpha.chart, beta.chart, "wedge");
    const std::size_t n = alpha.chart.dim();
    TwoFormField out(alpha.chart);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k + 1; l < n; ++l) {
            const auto& ak = alpha.coeffs[k].values;
            const auto& al = alpha.coeffs[l].values;
            const auto& bk = beta.coeffs[k].values;
            const auto& bl = beta.coeffs[l].values;
            auto& dst = out.at(k, l).values;
            for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = ak[p] * bl[p] - al[p] * bk[p];
        }
    }
    return out;
}

Norms closedness_norms(const OneFormField& theta) { return interior_norms(d_oneform(theta)); }

double closedness_residual(const OneFormField& theta) { return closedness_norms(theta).max; }

namespace {

ScalarField integrate_staircase(const OneFormField& theta, const NodeIndex& base,
                                const std::vector<std::size_t>& order) {
    const GridChart& c = theta.chart;
    ScalarField G(c, 0.0);
    staircase_sweep(c, base, order, [&](std::size_t from, std::size_t to, std::size_t axis, int dir) {
        const auto& f = theta.coeffs[axis].values;
        G.values[to] = G.values[from] + dir * 0.5 * c.spacing(axis) * (f[from] + f[to]);
    });
    return G;
}

} // namespace

PotentialResult potential(const OneFormField& theta, const NodeIndex& base, double c,
                          std::optional<double> tolerance) {
    const GridChart& chart = theta.chart;
    if (!chart.contains(base)) throw std::invalid_argument("potential: base node outside the grid");
    if (!(c > 0.0)) throw std::invalid_argument("potential: scaling constant must be positive");

    std::vector<std::size_t> order(chart.dim());
    std::iota(order.begin(), order.end(), 0);
    PotentialResult res;
    res.G = integrate_staircase(theta, base, order);
    std::vector<std::size_t> reversed(order.rbegin(), order.rend());
    const ScalarField G2 = integrate_staircase(theta, base, reversed);
    for (std::size_t p = 0; p < G2.size(); ++p)
        res.path_residual = std::max(res.path_residual, std::abs(res.G[p] - G2[p]));

    res.r = ScalarField(chart);
    for (std::size_t p = 0; p < chart.size(); ++p) res.r[p] = c * std::exp(-res.G[p]);

    if (tolerance && !(res.path_residual <= *tolerance))
        throw NotClosedError("potential: path residual " + std::to_string(res.path_residual) +
                                 " exceeds tolerance; the form is not closed enough",
                             res.path_residual);
    return res;
}

} // namespace pss
