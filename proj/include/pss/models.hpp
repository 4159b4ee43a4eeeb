#ifndef PSS_MODELS_HPP
#define PSS_MODELS_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "pss/defaults.hpp"
#include "pss/frames.hpp"
#include "pss/hierarchy.hpp"
#include "pss/series.hpp"

namespace pss {

// ---------------------------------------------------------------- Camassa-Holm
// Chart axes are (x, t). h = u - u_xx + m/2.

struct CamassaHolmState {
    double m = 0.0;
    GridChart chart;
    ScalarField u, u_x, u_xx, h;
};

// x-derivatives by finite differences along axis 0.
CamassaHolmState ch_state(const ScalarField& u, double m);

// Entries f_ij as polynomials in eta (degree <= 2), truncated to `order`.
FormTable ch_table(double u, double u_x, double h, double m, std::size_t order = 2);

FrameData ch_forms(const CamassaHolmState& s, double eta);
// Element j holds the eta^j coefficient; length min(order, 2) + 1.
FrameSeries ch_forms_series(const CamassaHolmState& s, std::size_t order = 2);

// Max over interior nodes of u_t - u_xxt - (u u_xxx + 2 u_x u_xx - 3 u u_x - m u_x).
double ch_pde_residual(const CamassaHolmState& s);

struct EvolveOptions {
    double blowup_factor = defaults::blowup_factor;
    // RK4 stability bound on dt * (max|u| k_max + 2 max|u_x|).
    double step_bound = 2.5;
};

class EvolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Pseudospectral method of lines for h_t = -(u h_x + 2 u_x h) with
// u = (1 - d_xx)^{-1}(h - m/2) on [0, period), classic RK4 in time. u0 holds
// samples at x_i = i * period / N. The returned chart has N + 1 nodes in x
// (the end point repeats the first) and steps + 1 nodes in t; derivatives
// are spectral.
CamassaHolmState ch_evolve(std::span<const double> u0, double period, double m, double T, std::size_t steps,
                           const EvolveOptions& opts = {});

// ------------------------------------------------------------------ sine-Gordon
// u_{x1 x1} - u_{x2 x2} = sin u on a chart with axes (x1, x2).

enum class KinkKind { static_kink, moving_kink };

struct SineGordonSolution {
    ScalarField u, u_x1, u_x2;
};

SineGordonSolution sg_solution(const GridChart& chart, KinkKind kind, double velocity = 0.0);

// Max over interior nodes of the finite-difference residual.
double sg_pde_residual(const ScalarField& u);

// omega_1 = cos(u/2) dx1, omega_2 = sin(u/2) dx2, omega_12 = u_x1/2 dx2 + u_x2/2 dx1.
FrameData sg_forms(const ScalarField& u);
FrameData sg_forms(const SineGordonSolution& s);

struct SgPhiCheck {
    double residual_x1 = 0.0;
    double residual_x2 = 0.0;
    OneFormField theta;  // cos(phi) cos(u/2) dx1 - sin(phi) sin(u/2) dx2
    double closed_residual = 0.0;
};

SgPhiCheck sg_phi_system_check(const SineGordonSolution& s, const ScalarField& phi);

// ------------------------------------------------------------------------ IGSGE

struct IGSGEState {
    GridChart chart;
    std::size_t n = 0;
    std::vector<ScalarField> V;
    std::vector<ScalarField> h;  // n*n row-major; diagonal unused
    std::vector<char> mask;      // nodes where h is defined (empty: all)

    ScalarField& h_at(std::size_t i, std::size_t j) { return h[i * n + j]; }
    const ScalarField& h_at(std::size_t i, std::size_t j) const { return h[i * n + j]; }
};

struct IGSGEResiduals {
    double unit = 0.0;    // sum V_i^2 - 1
    double dV = 0.0;      // dV_i/dx_j - V_j h_ji
    double mixed = 0.0;   // dh_ij/dx_i + dh_ji/dx_j + sum_s h_si h_sj - V_i V_j
    double triple = 0.0;  // dh_ij/dx_s - h_is h_sj
    std::size_t masked_nodes = 0;

    double max() const;
};

IGSGEResiduals igsge_residual(const IGSGEState& s);

// h_ji = (dV_i/dx_j) / V_j by finite differences; nodes with
// |V_j| <= threshold * max|V| for some j are masked. Throws when every node
// is masked.
IGSGEState igsge_h_from_V(const GridChart& chart, std::vector<ScalarField> V,
                          double threshold = defaults::nondegeneracy);

// omega_i = V_i dx_i, omega_ij = h_ij dx_j - h_ji dx_i.
FrameData igsge_forms(const IGSGEState& s);

// V_1 = tanh x1, V_j = c_j sech x1 with analytic h. Requires sum c^2 = 1 and x1 > 0.
IGSGEState igsge_explicit_solution(const GridChart& chart, std::span<const double> c);

} // namespace pss

#endif // PSS_MODELS_HPP
