#include "pss/conservation.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "pss/field_io.hpp"
#include "pss/forms.hpp"

namespace pss {

double ConservationReport::max_drift() const {
    double m = 0.0;
    for (const auto& q : quantities) m = std::max(m, q.drift);
    return m;
}

double ConservationReport::max_relative_drift() const {
    double m = 0.0;
    for (const auto& q : quantities) m = std::max(m, q.relative_drift);
    return m;
}

double ConservationReport::max_flux_residual() const {
    double m = 0.0;
    for (const auto& q : quantities) m = std::max(m, q.flux_residual);
    return m;
}

namespace {

struct LineIntegral {
    double trapezoid = 0.0;
    double coarse = 0.0;  // step 2h, only when the interval count is even
    double absolute = 0.0;
};

LineIntegral integrate_line(const std::vector<double>& f, std::size_t start, std::size_t stride, std::size_t count,
                            double h) {
    LineIntegral out;
    for (std::size_t i = 0; i < count; ++i) {
        const double w = (i == 0 || i + 1 == count) ? 0.5 : 1.0;
        const double v = f[start + i * stride];
        out.trapezoid += w * v;
        out.absolute += w * std::abs(v);
        if ((count - 1) % 2 == 0 && i % 2 == 0) out.coarse += w * v;
    }
    out.trapezoid *= h;
    out.absolute *= h;
    out.coarse *= 2.0 * h;
    return out;
}

ConservedQuantity analyze_axis(const OneFormField& theta, std::size_t time_axis, std::size_t j) {
    const GridChart& c = theta.chart;
    const auto& fj = theta.coeffs[j].values;
    const auto& ft = theta.coeffs[time_axis].values;
    const std::size_t nt = c.count(time_axis), nj = c.count(j);
    const std::size_t st = c.stride(time_axis), sj = c.stride(j);
    const double hj = c.spacing(j);

    ConservedQuantity q;
    q.axis = j;
    q.richardson_available = (nj - 1) % 2 == 0;
    for (std::size_t i = 0; i < nt; ++i) q.t.push_back(c.coord(time_axis, i));

    // Transverse slices are keyed by their node at t index 0 and j index 0.
    NodeIndex centre = c.center();
    centre[time_axis] = 0;
    centre[j] = 0;
    const std::size_t centre_key = c.flat(centre);

    struct Slice {
        double q0 = 0.0, r0 = 0.0, drift = 0.0, drift_r = 0.0, scale = 0.0;
    };
    std::vector<Slice> slices(c.size());
    std::vector<char> seen(c.size(), 0);

    for (std::size_t ti = 0; ti < nt; ++ti) {
        for (std::size_t p = 0; p < c.size(); ++p) {
            if (c.axis_index(p, j) != 0 || c.axis_index(p, time_axis) != ti) continue;
            const std::size_t key = p - ti * st;
            const LineIntegral li = integrate_line(fj, p, sj, nj, hj);
            const double rich = q.richardson_available ? (4.0 * li.trapezoid - li.coarse) / 3.0 : li.trapezoid;
            Slice& s = slices[key];
            if (!seen[key]) {
                seen[key] = 1;
                s.q0 = li.trapezoid;
                s.r0 = rich;
            }
            s.drift = std::max(s.drift, std::abs(li.trapezoid - s.q0));
            s.drift_r = std::max(s.drift_r, std::abs(rich - s.r0));
            s.scale = std::max(s.scale, li.absolute);
            q.boundary_flux = std::max(q.boundary_flux, std::abs(ft[p + (nj - 1) * sj] - ft[p]));
            if (key == centre_key) {
                q.Q.push_back(li.trapezoid);
                q.Q_richardson.push_back(rich);
            }
        }
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (!seen[k]) continue;
        const Slice& s = slices[k];
        q.drift = std::max(q.drift, s.drift);
        q.drift_richardson = std::max(q.drift_richardson, s.drift_r);
        if (s.scale > 0.0) q.relative_drift = std::max(q.relative_drift, s.drift / s.scale);
    }

    const auto dft = partial(theta.coeffs[time_axis], j);
    const auto dfj = partial(theta.coeffs[j], time_axis);
    ScalarField r(c);
    for (std::size_t p = 0; p < c.size(); ++p) r[p] = dft[p] - dfj[p];
    q.flux_residual = interior_norms(r).max;
    return q;
}

} // namespace

ConservationReport analyze(const OneFormField& theta, std::size_t time_axis) {
    const GridChart& c = theta.chart;
    const std::size_t n = c.dim();
    if (n < 2) throw std::invalid_argument("analyze: need at least two axes");
    if (time_axis >= n) throw std::invalid_argument("analyze: time axis outside the chart");
    if (theta.coeffs.size() != n) throw std::invalid_argument("analyze: form has the wrong number of coefficients");

    ConservationReport rep;
    rep.time_axis = time_axis;
    for (std::size_t j = 0; j < n; ++j)
        if (j != time_axis) rep.quantities.push_back(analyze_axis(theta, time_axis, j));

    for (std::size_t i = 0; i < n; ++i) {
        if (i == time_axis) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == time_axis) continue;
            const auto a = partial(theta.coeffs[j], i);
            const auto b = partial(theta.coeffs[i], j);
            ScalarField r(c);
            for (std::size_t p = 0; p < c.size(); ++p) r[p] = a[p] - b[p];
            rep.cross_residuals.push_back(interior_norms(r).max);
            rep.max_cross_residual = std::max(rep.max_cross_residual, rep.cross_residuals.back());
        }
    }
    return rep;
}

std::vector<ConservationReport> hierarchy_report(const std::vector<OneFormField>& forms, std::size_t time_axis) {
    std::vector<ConservationReport> out;
    for (const auto& f : forms) {
        if (!out.empty()) require_same_chart(forms.front().chart, f.chart, "hierarchy_report");
        out.push_back(analyze(f, time_axis));
    }
    return out;
}

void write_conservation_csv(std::ostream& os, const std::vector<ConservationReport>& reports) {
    os << "order,axis,t,Q,drift,flux_residual\n";
    for (std::size_t order = 0; order < reports.size(); ++order) {
        for (const auto& q : reports[order].quantities) {
            for (std::size_t i = 0; i < q.t.size(); ++i) {
                os << order << ',' << q.axis + 1 << ',' << format_real(q.t[i]) << ',' << format_real(q.Q[i]) << ','
                   << format_real(std::abs(q.Q[i] - q.Q[0])) << ',' << format_real(q.flux_residual) << '\n';
            }
        }
    }
}

std::string conservation_summary_json(const std::vector<ConservationReport>& reports) {
    nlohmann::ordered_json j;
    j["quadrature"] = "trapezoid";
    j["orders"] = nlohmann::ordered_json::array();
    double drift = 0.0, rel = 0.0, flux = 0.0, cross = 0.0;
    for (std::size_t order = 0; order < reports.size(); ++order) {
        const auto& r = reports[order];
        nlohmann::ordered_json o;
        o["order"] = order;
        o["time_axis"] = r.time_axis + 1;
        o["quantities"] = nlohmann::ordered_json::array();
        for (const auto& q : r.quantities) {
            nlohmann::ordered_json e;
            e["axis"] = q.axis + 1;
            e["drift"] = q.drift;
            e["relative_drift"] = q.relative_drift;
            e["drift_richardson"] = q.drift_richardson;
            e["flux_residual"] = q.flux_residual;
            e["boundary_flux"] = q.boundary_flux;
            o["quantities"].push_back(e);
        }
        o["max_cross_residual"] = r.max_cross_residual;
        j["orders"].push_back(o);
        drift = std::max(drift, r.max_drift());
        rel = std::max(rel, r.max_relative_drift());
        flux = std::max(flux, r.max_flux_residual());
        cross = std::max(cross, r.max_cross_residual);
    }
    j["max_drift"] = drift;
    j["max_relative_drift"] = rel;
    j["max_flux_residual"] = flux;
    j["max_cross_residual"] = cross;
    return j.dump(2);
}

} // namespace pss
