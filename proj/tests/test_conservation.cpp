#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "pss/conservation.hpp"
#include "pss/hierarchy.hpp"
#include "pss/models.hpp"
#include "pss/rotation_solver.hpp"

using namespace pss;
using testing::square;

namespace {

std::vector<double> u0_profile(std::size_t n) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 0.2 + 0.1 * std::cos(2.0 * std::numbers::pi * double(i) / double(n));
    return u;
}

} // namespace

TEST_SUITE("conservation") {

TEST_CASE("constant coefficients give zero drift and flux") {
    const GridChart c({0.0, 0.0, 0.0}, {0.1, 0.2, 0.25}, {6, 5, 9});
    OneFormField t(c);
    t[0] = ScalarField(c, 1.5);
    t[1] = ScalarField(c, -2.0);
    t[2] = ScalarField(c, 0.25);
    const auto r = analyze(t, 0);
    REQUIRE(r.quantities.size() == 2);
    for (const auto& q : r.quantities) {
        CHECK(q.drift <= 1e-15);
        CHECK(q.flux_residual == 0.0);
        CHECK(q.boundary_flux == 0.0);
        CHECK(q.t.size() == 6);
    }
    CHECK(r.quantities[0].Q[0] == doctest::Approx(-2.0 * 0.8));
    CHECK(r.max_cross_residual == 0.0);
}

TEST_CASE("boundary flux accounts for the drift") {
    // theta = x dt + t dx = d(x t): Q(t) = t over x in [0, 1]
    const auto c = square(0.0, 1.0, 11);
    OneFormField t(c);
    t[0] = ScalarField::sample(c, [](auto x) { return x[1]; });
    t[1] = ScalarField::sample(c, [](auto x) { return x[0]; });
    const auto r = analyze(t, 0);
    const auto& q = r.quantities[0];
    CHECK(q.axis == 1);
    CHECK(q.Q.back() == doctest::Approx(1.0));
    CHECK(q.drift == doctest::Approx(1.0));
    CHECK(q.boundary_flux == doctest::Approx(1.0));
    CHECK(q.flux_residual <= 1e-13);
}

TEST_CASE("Richardson estimate improves the trapezoid rule") {
    const auto c = testing::box(0.0, 1.0, 0.0, 2.0, 3, 17);
    OneFormField t(c);
    t[1] = ScalarField::sample(c, [](auto x) { return std::exp(x[1]); });
    const auto q = analyze(t, 0).quantities[0];
    REQUIRE(q.richardson_available);
    const double exact = std::exp(2.0) - 1.0;
    CHECK(std::abs(q.Q_richardson[0] - exact) < 0.05 * std::abs(q.Q[0] - exact));
}

TEST_CASE("sine-Gordon kink: slice integrals along x_2 are constant in x_1") {
    const auto fd = sg_forms(sg_solution(square(-8.0, 8.0, 81), KinkKind::static_kink));
    const auto s = solve_phi_2d(fd, 0.0, fd.chart.center());
    const auto r = analyze(s.theta1, 0);
    REQUIRE(r.quantities.size() == 1);
    CHECK(r.quantities[0].relative_drift < 1e-8);
    CHECK(r.quantities[0].flux_residual <= s.closed_residual);
}

TEST_CASE("IGSGE n = 3 reports two quantities with second-order flux") {
    auto run = [](std::size_t k) {
        const GridChart c({0.5, -4.0, -4.0}, {0.5, 0.5, 0.5}, {12, 17, 17});
        const std::vector<double> cc{0.6, 0.8};
        const auto fd = igsge_forms(igsge_explicit_solution(c.refined(k), cc));
        // the explicit frame is already special, so start from a generic rotation
        const Matrix l0 = expm_skew((Matrix(3, 3) << 0.0, -0.4, 0.2, 0.4, 0.0, -0.3, -0.2, 0.3, 0.0).finished());
        return analyze(solve_L_nd(fd, l0, fd.chart.center()).theta1, 0);
    };
    const auto a = run(1), b = run(2);
    REQUIRE(a.quantities.size() == 2);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::log2(a.quantities[j].flux_residual / b.quantities[j].flux_residual) > 1.7);
    CHECK(a.cross_residuals.size() == 1);
}

TEST_CASE("CH hierarchy: per-order reports") {
    const auto st = ch_evolve(u0_profile(128), 20.0, 0.5, 2.0, 200);
    const auto fs = ch_forms_series(st, 2);
    const auto h = solve_hierarchy(fs, 2, periodic_seed(fs, 2, {0, 0}, 0), {0, 0});
    const auto reps = hierarchy_report(h.theta, 1);
    REQUIRE(reps.size() == 3);
    for (const auto& r : reps) CHECK(r.max_relative_drift() <= 1e-4);

    const auto single = analyze(h.theta[0], 1);
    CHECK(single.quantities[0].Q == reps[0].quantities[0].Q);

    // stored dx coefficient of the order-0 form is cos(phi_0)(h - 1)
    double e = 0.0;
    for (std::size_t p = 0; p < st.chart.size(); ++p)
        e = std::max(e, std::abs(h.theta[0][0][p] - std::cos(h.phi.coeffs[0][p]) * (st.h[p] - 1.0)));
    CHECK(e <= 1e-12);
}

TEST_CASE("CSV and JSON exports") {
    const auto c = square(0.0, 1.0, 3);
    OneFormField t(c);
    t[1] = ScalarField(c, 2.0);
    const std::vector<ConservationReport> reps{analyze(t, 0), analyze(t, 0)};
    std::ostringstream os;
    write_conservation_csv(os, reps);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "order,axis,t,Q,drift,flux_residual");
    std::getline(is, line);
    CHECK(line == "0,2,0,2,0,0");
    std::size_t rows = 1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 6);

    const auto j = nlohmann::json::parse(conservation_summary_json(reps));
    CHECK(j["orders"].size() == 2);
    CHECK(j["orders"][0]["quantities"][0]["axis"] == 2);
    CHECK(j["max_drift"] == 0.0);
    CHECK(j["quadrature"] == "trapezoid");
}

}
