#include "pss/models.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include <unsupported/Eigen/FFT>

#include "pss/forms.hpp"

namespace pss {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

double interior_max(const ScalarField& f) { return interior_norms(f).max; }

ScalarField field_of(const GridChart& c, std::vector<double> v) { return ScalarField(c, std::move(v)); }

} // namespace

// ---------------------------------------------------------------- Camassa-Holm

CamassaHolmState ch_state(const ScalarField& u, double m) {
    if (u.chart.dim() != 2) throw std::invalid_argument("ch_state: chart must be (x, t)");
    CamassaHolmState s;
    s.m = m;
    s.chart = u.chart;
    s.u = u;
    s.u_x = field_of(u.chart, partial(u, 0));
    s.u_xx = field_of(u.chart, partial2(u, 0));
    s.h = u - s.u_xx;
    for (auto& v : s.h.values) v += 0.5 * m;
    return s;
}

FormTable ch_table(double u, double u_x, double h, double m, std::size_t order) {
    auto poly = [order](double a0, double a1, double a2) {
        EtaSeries s(order);
        s[0] = a0;
        if (order >= 1) s[1] = a1;
        if (order >= 2) s[2] = a2;
        return s;
    };
    FormTable f;
    f[0][0] = poly(h - 1.0, 0.0, 0.5);
    f[0][1] = poly(-u * h - 0.5 * m + 1.0, u_x, -0.5 * (u + 1.0));
    f[1][0] = poly(0.0, 1.0, 0.0);
    f[1][1] = poly(u_x, -(u + 1.0), 0.0);
    f[2][0] = poly(h, 0.0, 0.5);
    f[2][1] = poly(-u * h - u - 0.5 * m, u_x, -0.5 * (u + 1.0));
    return f;
}

namespace {

void fill_frame(FrameData& fd, std::size_t p, const FormTable& f, std::size_t j, double eta, bool evaluate) {
    auto pick = [&](const EtaSeries& s) { return evaluate ? s.evaluate(eta) : s[j]; };
    for (std::size_t k = 0; k < 2; ++k) {
        fd.omega[0].coeffs[k][p] = pick(f[0][k]);
        fd.omega[1].coeffs[k][p] = pick(f[1][k]);
        fd.W.upper(0, 1).coeffs[k][p] = pick(f[2][k]);
    }
}

} // namespace

FrameData ch_forms(const CamassaHolmState& s, double eta) {
    FrameData fd(s.chart, 2);
    for (std::size_t p = 0; p < s.chart.size(); ++p)
        fill_frame(fd, p, ch_table(s.u[p], s.u_x[p], s.h[p], s.m), 0, eta, true);
    return fd;
}

FrameSeries ch_forms_series(const CamassaHolmState& s, std::size_t order) {
    const std::size_t k = std::min<std::size_t>(order, 2);
    FrameSeries fs(k + 1, FrameData(s.chart, 2));
    for (std::size_t p = 0; p < s.chart.size(); ++p) {
        const FormTable f = ch_table(s.u[p], s.u_x[p], s.h[p], s.m);
        for (std::size_t j = 0; j <= k; ++j) fill_frame(fs[j], p, f, j, 0.0, false);
    }
    return fs;
}

double ch_pde_residual(const CamassaHolmState& s) {
    const auto u_xxx = partial(s.u_xx, 0);
    const auto u_t = partial(s.u, 1);
    const auto u_xxt = partial(s.u_xx, 1);
    ScalarField r(s.chart);
    for (std::size_t p = 0; p < s.chart.size(); ++p) {
        const double u = s.u[p], ux = s.u_x[p], uxx = s.u_xx[p];
        r[p] = u_t[p] - u_xxt[p] - (u * u_xxx[p] + 2.0 * ux * uxx - 3.0 * u * ux - s.m * ux);
    }
    return interior_max(r);
}

namespace {

class PeriodicSpectrum {
public:
    PeriodicSpectrum(std::size_t n, double period) : n_(n), k_(n) {
        for (std::size_t i = 0; i < n; ++i) {
            const double idx = i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
            k_[i] = 2.0 * std::numbers::pi / period * idx;
        }
        // The Nyquist mode of an even grid has no real derivative; it is filtered.
        if (n % 2 == 0) nyquist_ = n / 2;
    }

    std::vector<std::complex<double>> fwd(const std::vector<double>& x) {
        std::vector<std::complex<double>> out;
        fft_.fwd(out, x);
        if (nyquist_) out[*nyquist_] = 0.0;
        return out;
    }
    std::vector<double> inv(const std::vector<std::complex<double>>& x) {
        std::vector<double> out;
        fft_.inv(out, x);
        return out;
    }
    // Multiplies mode i by (i k_i)^order.
    std::vector<double> derivative(const std::vector<std::complex<double>>& x, int order) {
        std::vector<std::complex<double>> y(x);
        for (std::size_t i = 0; i < n_; ++i) y[i] *= std::pow(std::complex<double>(0.0, k_[i]), order);
        return inv(y);
    }
    // (1 - d_xx)^{-1} (h - m/2)
    std::vector<std::complex<double>> helmholtz(std::vector<std::complex<double>> hh, double m) const {
        hh[0] -= 0.5 * m * static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) hh[i] /= 1.0 + k_[i] * k_[i];
        return hh;
    }
    double wavenumber(std::size_t i) const { return k_[i]; }
    double k_max() const {
        double m = 0.0;
        for (double k : k_) m = std::max(m, std::abs(k));
        return m;
    }

private:
    std::size_t n_;
    std::vector<double> k_;
    std::optional<std::size_t> nyquist_;
    Eigen::FFT<double> fft_;
};

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

CamassaHolmState ch_evolve(std::span<const double> u0, double period, double m, double T, std::size_t steps,
                           const EvolveOptions& opts) {
    const std::size_t n = u0.size();
    if (n < 4) throw std::invalid_argument("ch_evolve: need at least 4 samples");
    if (!(period > 0.0) || !(T > 0.0) || steps == 0)
        throw std::invalid_argument("ch_evolve: period, T and steps must be positive");
    for (double v : u0)
        if (!std::isfinite(v)) throw std::invalid_argument("ch_evolve: u0 must be finite");

    PeriodicSpectrum sp(n, period);
    const double dt = T / static_cast<double>(steps);
    const double kmax = sp.k_max();

    // h0 = u0 - u0_xx + m/2, with u0 projected onto the resolved modes.
    const auto u0_hat = sp.fwd(std::vector<double>(u0.begin(), u0.end()));
    std::vector<std::complex<double>> h0_hat(u0_hat);
    for (std::size_t i = 0; i < n; ++i) h0_hat[i] *= 1.0 + sp.wavenumber(i) * sp.wavenumber(i);
    h0_hat[0] += 0.5 * m * static_cast<double>(n);
    std::vector<double> h = sp.inv(h0_hat);

    const double growth_limit = opts.blowup_factor * max_abs(std::vector<double>(u0.begin(), u0.end()));

    auto rhs = [&](const std::vector<double>& hv) {
        const auto hh = sp.fwd(hv);
        const auto uh = sp.helmholtz(hh, m);
        const auto u = sp.inv(uh);
        const auto ux = sp.derivative(uh, 1);
        const auto hx = sp.derivative(hh, 1);
        if (dt * (max_abs(u) * kmax + 2.0 * max_abs(ux)) > opts.step_bound)
            throw EvolveError("ch_evolve: time step exceeds the stability bound; increase steps");
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = -(u[i] * hx[i] + 2.0 * ux[i] * hv[i]);
        return out;
    };

    GridChart chart({0.0, 0.0}, {period / static_cast<double>(n), dt}, {n + 1, steps + 1}, {"x", "t"});
    CamassaHolmState s;
    s.m = m;
    s.chart = chart;
    s.u = ScalarField(chart);
    s.u_x = ScalarField(chart);
    s.u_xx = ScalarField(chart);
    s.h = ScalarField(chart);

    auto record = [&](std::size_t step) {
        const auto hh = sp.fwd(h);
        const auto uh = sp.helmholtz(hh, m);
        const auto u = sp.inv(uh);
        const auto ux = sp.derivative(uh, 1);
        const auto uxx = sp.derivative(uh, 2);
        const auto hf = sp.inv(hh);
        for (std::size_t i = 0; i <= n; ++i) {
            const std::size_t src = i % n;
            const std::size_t p = i * chart.stride(0) + step * chart.stride(1);
            s.u[p] = u[src];
            s.u_x[p] = ux[src];
            s.u_xx[p] = uxx[src];
            s.h[p] = hf[src];
        }
        const double umax = max_abs(u);
        if (!std::isfinite(umax)) throw EvolveError("ch_evolve: non-finite solution at step " + std::to_string(step));
        if (umax > growth_limit && growth_limit > 0.0)
            throw EvolveError("ch_evolve: blow-up detected at step " + std::to_string(step));
    };

    record(0);
    std::vector<double> tmp(n);
    for (std::size_t step = 1; step <= steps; ++step) {
        const auto k1 = rhs(h);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = h[i] + 0.5 * dt * k1[i];
        const auto k2 = rhs(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = h[i] + 0.5 * dt * k2[i];
        const auto k3 = rhs(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = h[i] + dt * k3[i];
        const auto k4 = rhs(tmp);
        for (std::size_t i = 0; i < n; ++i) h[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        record(step);
    }
    return s;
}

// ------------------------------------------------------------------ sine-Gordon

SineGordonSolution sg_solution(const GridChart& chart, KinkKind kind, double velocity) {
    if (chart.dim() != 2) throw std::invalid_argument("sg_solution: chart must be two-dimensional");
    double v = 0.0;
    if (kind == KinkKind::moving_kink) {
        if (!(std::abs(velocity) < 1.0)) throw std::invalid_argument("sg_solution: |v| must be below 1");
        v = velocity;
    }
    const double gamma = 1.0 / std::sqrt(1.0 - v * v);
    SineGordonSolution s{ScalarField(chart), ScalarField(chart), ScalarField(chart)};
    for (std::size_t p = 0; p < chart.size(); ++p) {
        const double xi = gamma * (chart.node_coord(p, 0) - v * chart.node_coord(p, 1));
        s.u[p] = 4.0 * std::atan(std::exp(xi));
        const double du = 2.0 * sech(xi);
        s.u_x1[p] = gamma * du;
        s.u_x2[p] = -gamma * v * du;
    }
    return s;
}

double sg_pde_residual(const ScalarField& u) {
    const auto a = partial2(u, 0);
    const auto b = partial2(u, 1);
    ScalarField r(u.chart);
    for (std::size_t p = 0; p < u.size(); ++p) r[p] = a[p] - b[p] - std::sin(u[p]);
    return interior_max(r);
}

namespace {

FrameData sg_frame(const ScalarField& u, const std::vector<double>& u1, const std::vector<double>& u2) {
    if (u.chart.dim() != 2) throw std::invalid_argument("sg_forms: chart must be two-dimensional");
    FrameData fd(u.chart, 2);
    for (std::size_t p = 0; p < u.size(); ++p) {
        fd.omega[0].coeffs[0][p] = std::cos(0.5 * u[p]);
        fd.omega[1].coeffs[1][p] = std::sin(0.5 * u[p]);
        fd.W.upper(0, 1).coeffs[0][p] = 0.5 * u2[p];
        fd.W.upper(0, 1).coeffs[1][p] = 0.5 * u1[p];
    }
    return fd;
}

} // namespace

FrameData sg_forms(const ScalarField& u) { return sg_frame(u, partial(u, 0), partial(u, 1)); }

FrameData sg_forms(const SineGordonSolution& s) { return sg_frame(s.u, s.u_x1.values, s.u_x2.values); }

SgPhiCheck sg_phi_system_check(const SineGordonSolution& s, const ScalarField& phi) {
    require_same_chart(s.u.chart, phi.chart, "sg_phi_system_check");
    const auto p1 = partial(phi, 0);
    const auto p2 = partial(phi, 1);
    const GridChart& c = phi.chart;
    ScalarField r1(c), r2(c);
    SgPhiCheck out;
    out.theta = OneFormField(c);
    for (std::size_t p = 0; p < c.size(); ++p) {
        const double cu = std::cos(0.5 * s.u[p]), su = std::sin(0.5 * s.u[p]);
        const double sp = std::sin(phi[p]), cp = std::cos(phi[p]);
        r1[p] = p1[p] - (0.5 * s.u_x2[p] + sp * cu);
        r2[p] = p2[p] - (0.5 * s.u_x1[p] + cp * su);
        out.theta.coeffs[0][p] = cp * cu;
        out.theta.coeffs[1][p] = -sp * su;
    }
    out.residual_x1 = interior_max(r1);
    out.residual_x2 = interior_max(r2);
    out.closed_residual = closedness_residual(out.theta);
    return out;
}

// ------------------------------------------------------------------------ IGSGE

double IGSGEResiduals::max() const { return std::max({unit, dV, mixed, triple}); }

IGSGEResiduals igsge_residual(const IGSGEState& s) {
    const std::size_t n = s.n;
    const GridChart& c = s.chart;
    if (s.V.size() != n || s.h.size() != n * n || c.dim() != n)
        throw std::invalid_argument("igsge_residual: inconsistent state");

    std::vector<char> include(c.size(), 0);
    IGSGEResiduals res;
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (!c.is_interior(p)) continue;
        include[p] = s.mask.empty() || s.mask[p];
        if (!include[p]) ++res.masked_nodes;
    }
    auto worst = [&](double& slot, const ScalarField& r) { slot = std::max(slot, masked_norms(r, include).max); };

    ScalarField r(c);
    for (std::size_t p = 0; p < c.size(); ++p) {
        double acc = -1.0;
        for (const auto& v : s.V) acc += v[p] * v[p];
        r[p] = acc;
    }
    worst(res.unit, r);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto dv = partial(s.V[i], j);
            for (std::size_t p = 0; p < c.size(); ++p) r[p] = dv[p] - s.V[j][p] * s.h_at(j, i)[p];
            worst(res.dV, r);
        }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto a = partial(s.h_at(i, j), i);
            const auto b = partial(s.h_at(j, i), j);
            for (std::size_t p = 0; p < c.size(); ++p) {
                double acc = a[p] + b[p] - s.V[i][p] * s.V[j][p];
                for (std::size_t q = 0; q < n; ++q)
                    if (q != i && q != j) acc += s.h_at(q, i)[p] * s.h_at(q, j)[p];
                r[p] = acc;
            }
            worst(res.mixed, r);
        }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t q = 0; q < n; ++q) {
                if (i == j || i == q || j == q) continue;
                const auto a = partial(s.h_at(i, j), q);
                for (std::size_t p = 0; p < c.size(); ++p) r[p] = a[p] - s.h_at(i, q)[p] * s.h_at(q, j)[p];
                worst(res.triple, r);
            }
    return res;
}

IGSGEState igsge_h_from_V(const GridChart& chart, std::vector<ScalarField> V, double threshold) {
    const std::size_t n = V.size();
    if (n < 2 || chart.dim() != n) throw std::invalid_argument("igsge_h_from_V: need n = chart dimension >= 2");
    for (const auto& v : V) require_same_chart(chart, v.chart, "igsge_h_from_V");

    IGSGEState s;
    s.chart = chart;
    s.n = n;
    s.V = std::move(V);
    s.h.assign(n * n, ScalarField(chart));
    s.mask.assign(chart.size(), 1);

    double vmax = 0.0;
    for (const auto& v : s.V)
        for (double x : v.values) vmax = std::max(vmax, std::abs(x));
    std::size_t valid = 0;
    for (std::size_t p = 0; p < chart.size(); ++p) {
        for (const auto& v : s.V)
            if (!(std::abs(v[p]) > threshold * vmax)) s.mask[p] = 0;
        valid += s.mask[p];
    }
    if (valid == 0) throw std::invalid_argument("igsge_h_from_V: every node is masked");

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto dv = partial(s.V[i], j);
            auto& hji = s.h_at(j, i);
            for (std::size_t p = 0; p < chart.size(); ++p) hji[p] = s.mask[p] ? dv[p] / s.V[j][p] : 0.0;
        }
    return s;
}

FrameData igsge_forms(const IGSGEState& s) {
    const std::size_t n = s.n;
    FrameData fd(s.chart, n);
    for (std::size_t i = 0; i < n; ++i) fd.omega[i].coeffs[i] = s.V[i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            auto& w = fd.W.upper(i, j);
            w.coeffs[j] = s.h_at(i, j);
            w.coeffs[i] = s.h_at(j, i) * -1.0;
        }
    return fd;
}

IGSGEState igsge_explicit_solution(const GridChart& chart, std::span<const double> c) {
    const std::size_t n = chart.dim();
    if (c.size() != n - 1)
        throw std::invalid_argument("igsge_explicit_solution: expected " + std::to_string(n - 1) + " constants");
    double norm = 0.0;
    for (double x : c) norm += x * x;
    if (!(std::abs(norm - 1.0) <= 1e-12))
        throw std::invalid_argument("igsge_explicit_solution: constants must satisfy sum c^2 = 1");
    if (!(chart.origin()[0] > 0.0)) throw std::invalid_argument("igsge_explicit_solution: chart must have x1 > 0");

    IGSGEState s;
    s.chart = chart;
    s.n = n;
    s.V.assign(n, ScalarField(chart));
    s.h.assign(n * n, ScalarField(chart));
    for (std::size_t p = 0; p < chart.size(); ++p) {
        const double x1 = chart.node_coord(p, 0);
        s.V[0][p] = std::tanh(x1);
        for (std::size_t j = 1; j < n; ++j) {
            s.V[j][p] = c[j - 1] * sech(x1);
            s.h_at(0, j)[p] = -c[j - 1] * sech(x1);
        }
    }
    return s;
}

} // namespace pss
