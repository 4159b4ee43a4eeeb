#ifndef PSS_HIERARCHY_HPP
#define PSS_HIERARCHY_HPP

#include <array>
#include <vector>

#include "pss/defaults.hpp"
#include "pss/frames.hpp"
#include "pss/rotation_solver.hpp"
#include "pss/series.hpp"

namespace pss {

struct EtaSeriesField {
    GridChart chart;
    std::vector<ScalarField> coeffs;  // coefficient of eta^j

    EtaSeriesField() = default;
    EtaSeriesField(const GridChart& c, std::size_t order);

    std::size_t order() const { return coeffs.size() - 1; }
    EtaSeries at(std::size_t node) const;
    void set(std::size_t node, const EtaSeries& s);
    ScalarField evaluate(double eta) const;
};

// 2D frame data polynomial in eta: element j holds the eta^j coefficient of
// omega_1, omega_2 and omega_12.
using FrameSeries = std::vector<FrameData>;

FrameData evaluate(const FrameSeries& fs, double eta);

// f[r][k]: r = 0, 1, 2 for omega_1, omega_2, omega_12; k = 0, 1 for the two axes.
using FormTable = std::array<std::array<EtaSeries, 2>, 3>;

FormTable form_table(const FrameSeries& fs, std::size_t order, std::size_t node);

// Right-hand sides of d(phi)/dx_k = f_3k + f_1k sin(phi) + f_2k cos(phi).
std::array<EtaSeries, 2> phi_system_rhs(const FormTable& f, const EtaSeries& phi);

// Coefficients of theta = (f_11 cos(phi) - f_21 sin(phi)) dx_1 + (f_12 cos(phi) - f_22 sin(phi)) dx_2.
std::array<EtaSeries, 2> closed_form_coeffs(const FormTable& f, const EtaSeries& phi);

// Per order j <= K, the eta^j coefficient of both right-hand sides at the
// given phi. result[j][k] is the dx_k equation.
std::vector<std::array<ScalarField, 2>> expand_phi_system(const FrameSeries& fs, const EtaSeriesField& phi);

// Order-by-order structure residuals with curvature K.
std::vector<StructureResiduals> series_structure_residuals(const FrameSeries& fs, std::size_t order,
                                                           double curvature);

struct HierarchyOptions {
    SolverOptions solver;
    std::size_t order_cap = defaults::hierarchy_order_cap;
};

struct HierarchyResult {
    EtaSeriesField phi;
    std::vector<OneFormField> theta;  // order-j closed form
    std::vector<double> closed_residual;
    std::vector<double> compat_residual;
    std::vector<StructureResiduals> structure;
    std::vector<double> phi_init;
};

// Integrates the series phi system on the staircase sweeps of solve_phi_2d.
// Throws GateError naming the first order whose structure residual fails.
HierarchyResult solve_hierarchy(const FrameSeries& fs, std::size_t order, std::vector<double> phi_init,
                                const NodeIndex& base, const HierarchyOptions& opts = {});

// Initial values phi_j(base) making phi periodic along `axis` when the chart
// samples one period with the end point duplicated. base must sit on the
// first node of that axis. Order 0 is a root of the return map nearest to
// guess0; higher orders follow from the affine return map.
std::vector<double> periodic_seed(const FrameSeries& fs, std::size_t order, const NodeIndex& base,
                                  std::size_t axis, double guess0 = 0.0);

} // namespace pss

#endif // PSS_HIERARCHY_HPP
