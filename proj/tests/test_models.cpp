#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "pss/forms.hpp"
#include "pss/models.hpp"
#include "pss/rotation_solver.hpp"

using namespace pss;
using testing::square;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> u0_profile(std::size_t n, double period) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 0.2 + 0.1 * std::cos(2.0 * pi * double(i) / double(n));
    (void)period;
    return u;
}

// Trigonometric polynomial on [0, 2 pi) with exact derivatives.
struct Trig {
    std::vector<double> a, b;  // a_k cos kx + b_k sin kx, k = 1..K
    double c0 = 0.0;
    double d(double x, int order) const {
        double v = order == 0 ? c0 : 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double k = double(i + 1);
            const std::complex<double> z = std::pow(std::complex<double>(0.0, k), order) *
                                           std::complex<double>(a[i], -b[i]) * std::exp(std::complex<double>(0.0, k * x));
            v += z.real();
        }
        return v;
    }
};

Trig random_trig(std::mt19937& rng, int modes) {
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    Trig t;
    t.c0 = 0.3;
    for (int k = 0; k < modes; ++k) {
        t.a.push_back(u(rng));
        t.b.push_back(u(rng));
    }
    return t;
}

// u_t - u_xxt = u u_xxx + 2 u_x u_xx - 3 u u_x - m u_x solved for (1 - d_xx) u_t.
double ch_rhs(double u, double ux, double uxx, double uxxx, double m) {
    return u * uxxx + 2.0 * ux * uxx - 3.0 * u * ux - m * ux;
}

} // namespace

TEST_SUITE("models") {

TEST_CASE("transport form is equivalent to the CH equation") {
    std::mt19937 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = random_trig(rng, 4);
        const double m = 0.5 * rep / 20.0;
        for (double x : {0.1, 1.3, 2.9, 4.4, 6.0}) {
            const double u = t.d(x, 0), ux = t.d(x, 1), uxx = t.d(x, 2), uxxx = t.d(x, 3);
            const double h = u - uxx + m / 2.0, hx = ux - uxxx;
            CHECK(-(u * hx + 2.0 * ux * h) == doctest::Approx(ch_rhs(u, ux, uxx, uxxx, m)).epsilon(1e-13));
        }
    }
}

TEST_CASE("ch_evolve follows the CH equation over one short step") {
    // (1 - d_xx)^{-1} of the right-hand side by an exact DFT of the trig polynomial
    std::mt19937 rng(9);
    const auto t = random_trig(rng, 3);
    const std::size_t n = 32;
    const double m = 0.5, dt = 1e-6;
    std::vector<double> u0(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * pi * double(i) / double(n);
        u0[i] = t.d(x, 0);
        rhs[i] = ch_rhs(t.d(x, 0), t.d(x, 1), t.d(x, 2), t.d(x, 3), m);
    }
    std::vector<double> ut(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += rhs[i] * std::exp(std::complex<double>(0.0, -2.0 * pi * double(k * i) / double(n)));
        const double kk = double(k <= n / 2 ? k : n - k);
        if (k == n / 2) c = 0.0;
        c /= (1.0 + kk * kk) * double(n);
        for (std::size_t i = 0; i < n; ++i)
            ut[i] += (c * std::exp(std::complex<double>(0.0, 2.0 * pi * double(k * i) / double(n)))).real();
    }
    const auto st = ch_evolve(u0, 2.0 * pi, m, 2.0 * dt, 2);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u1 = st.u[st.chart.flat(NodeIndex{i, 1})];
        e = std::max(e, std::abs((u1 - u0[i]) / dt - ut[i]));
    }
    CHECK(e < 1e-5);
}

TEST_CASE("ch_evolve basics") {
    SUBCASE("constants are steady") {
        const auto st = ch_evolve(std::vector<double>(16, 0.35), 10.0, 0.5, 1.0, 20);
        for (double v : st.u.values) CHECK(v == doctest::Approx(0.35).epsilon(1e-14));
        CHECK(ch_pde_residual(st) <= 1e-12);
    }
    SUBCASE("chart layout and mass conservation") {
        const auto st = ch_evolve(u0_profile(128, 20.0), 20.0, 0.5, 2.0, 200);
        CHECK(st.chart.count(0) == 129);
        CHECK(st.chart.count(1) == 201);
        double q0 = 0.0, drift = 0.0;
        for (std::size_t t = 0; t < st.chart.count(1); ++t) {
            double q = 0.0;
            for (std::size_t i = 0; i < 128; ++i) q += st.u[st.chart.flat(NodeIndex{i, t})];
            q *= 20.0 / 128.0;
            if (t == 0) q0 = q;
            drift = std::max(drift, std::abs(q - q0));
        }
        CHECK(drift / std::abs(q0) <= 1e-8);
        CHECK(ch_pde_residual(st) < 1e-4);
    }
    SUBCASE("time stepping self-converges at fourth order") {
        auto final_u = [](std::size_t steps) {
            const auto st = ch_evolve(u0_profile(64, 20.0), 20.0, 0.5, 2.0, steps);
            std::vector<double> out;
            for (std::size_t i = 0; i < 64; ++i) out.push_back(st.u[st.chart.flat(NodeIndex{i, steps})]);
            return out;
        };
        const auto a = final_u(25), b = final_u(50), c = final_u(100);
        const double order = std::log2(testing::max_abs_diff(a, b) / testing::max_abs_diff(b, c));
        CHECK(order > 2.0);
    }
    SUBCASE("step bound") {
        std::vector<double> u(64);
        for (std::size_t i = 0; i < 64; ++i) u[i] = 3.0 * std::sin(2.0 * pi * double(i) / 64.0);
        CHECK_THROWS_AS(ch_evolve(u, 2.0 * pi, 0.5, 10.0, 2), EvolveError);
    }
}

TEST_CASE("CH residual detects non-solutions") {
    const auto c = testing::box(0.0, 2.0 * pi, 0.0, 1.0, 257, 11);
    const auto st = ch_state(ScalarField::sample(c, [](auto x) { return std::sin(x[0]); }), 1.0);
    // u = sin x, m = 1: residual |3 sin 2x + cos x|
    double expect = 0.0;
    for (std::size_t i = 1; i + 1 < c.count(0); ++i) {
        const double x = c.coord(0, i);
        expect = std::max(expect, std::abs(3.0 * std::sin(2.0 * x) + std::cos(x)));
    }
    CHECK(ch_pde_residual(st) == doctest::Approx(expect).epsilon(1e-3));
    CHECK(ch_pde_residual(st) >= 0.5);
    CHECK(ch_pde_residual(ch_state(ScalarField(c, 0.7), 1.0)) <= 1e-10);
}

TEST_CASE("CH forms satisfy the structure equations along a solution") {
    const auto st = ch_evolve(u0_profile(128, 20.0), 20.0, 0.5, 2.0, 200);
    for (double eta : {0.0, 0.5, -1.3}) {
        const auto r = structure_residuals(ch_forms(st, eta), -1.0);
        CHECK(std::max(r.res1, r.res2) < 1e-3);
    }
    const auto fd = ch_forms(st, 2.0);
    for (double v : fd.omega[1][0].values) CHECK(v == 2.0);
}

TEST_CASE("sine-Gordon kinks") {
    auto res = [](std::size_t n) {
        return sg_pde_residual(sg_solution(square(-8.0, 8.0, n), KinkKind::static_kink).u);
    };
    CHECK(std::log2(res(81) / res(161)) > 1.8);
    const auto c = square(-8.0, 8.0, 33);
    const auto s = sg_solution(c, KinkKind::static_kink);
    CHECK(s.u[c.flat(NodeIndex{0, 5})] == doctest::Approx(0.0).epsilon(1e-2));
    CHECK(s.u[c.flat(NodeIndex{32, 5})] == doctest::Approx(2.0 * pi).epsilon(1e-3));
    CHECK(sg_solution(c, KinkKind::moving_kink, 0.0).u.values == s.u.values);
    const double m1 = sg_pde_residual(sg_solution(square(-8.0, 8.0, 81), KinkKind::moving_kink, 0.6).u);
    const double m2 = sg_pde_residual(sg_solution(square(-8.0, 8.0, 161), KinkKind::moving_kink, 0.6).u);
    CHECK(std::log2(m1 / m2) > 1.8);
    CHECK_THROWS_AS(sg_solution(c, KinkKind::moving_kink, 1.0), std::invalid_argument);

    const auto fd = sg_forms(s);
    for (std::size_t p = 0; p < c.size(); ++p) {
        const double v1 = fd.omega[0][0][p], v2 = fd.omega[1][1][p];
        CHECK(v1 * v1 + v2 * v2 == doctest::Approx(1.0).epsilon(1e-15));
    }
    const auto fda = sg_forms(sg_solution(square(-8.0, 8.0, 81), KinkKind::static_kink));
    const auto fdb = sg_forms(sg_solution(square(-8.0, 8.0, 161), KinkKind::static_kink));
    const auto ra = structure_residuals(fda, -1.0), rb = structure_residuals(fdb, -1.0);
    CHECK(std::log2(std::max(ra.res1, ra.res2) / std::max(rb.res1, rb.res2)) > 1.7);

    // finite-difference forms of the sampled u agree with the analytic ones
    const auto fd_fd = sg_forms(s.u);
    CHECK(testing::interior_max_abs_diff(c, fd_fd.W.upper(0, 1)[1].values, fd.W.upper(0, 1)[1].values) < 0.05);
}

TEST_CASE("angle system of the kink") {
    auto check = [](std::size_t n) {
        const auto c = square(-8.0, 8.0, n);
        const auto s = sg_solution(c, KinkKind::static_kink);
        const auto r = solve_phi_2d(sg_forms(s), 0.0, c.center());
        return sg_phi_system_check(s, *r.rotation.phi);
    };
    const auto a = check(81), b = check(161);
    CHECK(std::log2(std::max(a.residual_x1, a.residual_x2) / std::max(b.residual_x1, b.residual_x2)) > 1.7);
    CHECK(std::log2(a.closed_residual / b.closed_residual) > 1.7);
    const auto c = square(-8.0, 8.0, 9);

    SineGordonSolution zero{ScalarField(c), ScalarField(c), ScalarField(c)};
    const auto z = sg_phi_system_check(zero, ScalarField(c));
    CHECK(z.residual_x1 == 0.0);
    CHECK(z.residual_x2 == 0.0);
}

TEST_CASE("IGSGE explicit solution") {
    const std::vector<double> cc{0.6, 0.8};
    const GridChart c({0.5, -4.0, -4.0}, {0.5, 0.5, 0.5}, {12, 17, 17});
    const auto st = igsge_explicit_solution(c, cc);
    for (std::size_t p = 0; p < c.size(); ++p) {
        double s = 0.0;
        for (const auto& v : st.V) s += v[p] * v[p];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
        const double x1 = c.node_coord(p, 0);
        CHECK(st.h_at(0, 1)[p] == doctest::Approx(-0.6 / std::cosh(x1)).epsilon(1e-14));
        CHECK(st.h_at(0, 2)[p] == doctest::Approx(-0.8 / std::cosh(x1)).epsilon(1e-14));
        CHECK(st.h_at(1, 0)[p] == 0.0);
        CHECK(st.h_at(1, 2)[p] == 0.0);
    }
    const auto ra = igsge_residual(igsge_explicit_solution(c.refined(2), cc)), rb = igsge_residual(igsge_explicit_solution(c.refined(4), cc));
    CHECK(ra.unit <= 1e-14);
    CHECK(std::log2(ra.max() / rb.max()) > 1.7);

    // finite-difference h from V agrees with the analytic h
    const auto fdh = igsge_h_from_V(c.refined(2), igsge_explicit_solution(c.refined(2), cc).V);
    const auto an = igsge_explicit_solution(c.refined(2), cc);
    CHECK(testing::interior_max_abs_diff(an.chart, fdh.h_at(0, 1).values, an.h_at(0, 1).values) < 5e-2);
    CHECK(testing::interior_max_abs_diff(an.chart, fdh.h_at(2, 1).values, an.h_at(2, 1).values) < 1e-12);

    const std::vector<double> bad{0.6, 0.7};
    CHECK_THROWS_AS(igsge_explicit_solution(c, bad), std::invalid_argument);
    const GridChart left({-0.5, -4.0, -4.0}, {0.5, 0.5, 0.5}, {5, 5, 5});
    CHECK_THROWS_AS(igsge_explicit_solution(left, cc), std::invalid_argument);
}

TEST_CASE("IGSGE non-solutions and trivial data") {
    const auto c = square(-1.0, 1.0, 11);
    std::vector<ScalarField> V{ScalarField(c, 0.6), ScalarField(c, 0.8)};
    const auto st = igsge_h_from_V(c, V);
    for (const auto& h : st.h)
        for (double v : h.values) CHECK(std::abs(v) <= 1e-14);
    CHECK(igsge_residual(st).mixed == doctest::Approx(0.48).epsilon(1e-14));
    const auto fd = igsge_forms(st);
    for (std::size_t k = 0; k < 2; ++k)
        for (double v : fd.W.upper(0, 1)[k].values) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("n = 2 IGSGE reduces to sine-Gordon") {
    const auto c = square(-4.0, 4.0, 81);
    const auto s = sg_solution(c, KinkKind::moving_kink, 0.3);
    IGSGEState st;
    st.chart = c;
    st.n = 2;
    st.V = {ScalarField(c), ScalarField(c)};
    st.h = {ScalarField(c), ScalarField(c), ScalarField(c), ScalarField(c)};
    for (std::size_t p = 0; p < c.size(); ++p) {
        st.V[0][p] = std::cos(s.u[p] / 2.0);
        st.V[1][p] = std::sin(s.u[p] / 2.0);
        st.h_at(0, 1)[p] = s.u_x1[p] / 2.0;
        st.h_at(1, 0)[p] = -s.u_x2[p] / 2.0;
    }
    CHECK(igsge_residual(st).max() < 1e-2);
    const auto a = igsge_forms(st), b = sg_forms(s);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.W.upper(0, 1)[k].values == b.W.upper(0, 1)[k].values);
        for (std::size_t i = 0; i < 2; ++i) CHECK(a.omega[i][k].values == b.omega[i][k].values);
    }

    // h_12 recovered from V by differences; cos(u/2) vanishes at the kink centre,
    // so only h_12 = (d V_2/dx_1) / V_1 where V_1 is away from zero is compared
    const auto fh = igsge_h_from_V(c, st.V, 1e-3);
    double e = 0.0;
    for (std::size_t p = 0; p < c.size(); ++p)
        if (c.is_interior(p) && std::abs(st.V[0][p]) > 0.2) e = std::max(e, std::abs(fh.h_at(0, 1)[p] - st.h_at(0, 1)[p]));
    CHECK(e < 5e-2);
}

TEST_CASE("n = 2, c = (1): cos(u/2) = tanh x_1 is a kink") {
    const auto c = testing::box(0.5, 6.0, -2.0, 2.0, 111, 41);
    const auto u = ScalarField::sample(c, [](auto x) { return 2.0 * std::acos(std::tanh(x[0])); });
    CHECK(sg_pde_residual(u) < 1e-2);
}

}
