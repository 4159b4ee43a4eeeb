#ifndef PSS_CONSERVATION_HPP
#define PSS_CONSERVATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "pss/grid.hpp"

namespace pss {

// Q_j(t) = integral of f_j dx_j for theta = sum_k f_k dx_k, one per spatial axis j.
struct ConservedQuantity {
    std::size_t axis = 0;
    std::vector<double> t;
    // Trapezoid value and Richardson estimate on the central transverse slice.
    std::vector<double> Q;
    std::vector<double> Q_richardson;
    bool richardson_available = false;
    // max over transverse slices of max_t |Q(t) - Q(t_0)|
    double drift = 0.0;
    double drift_richardson = 0.0;
    // max over slices of drift / max_t integral |f_j| dx_j
    double relative_drift = 0.0;
    // max |d f_time/dx_j - d f_j/dt| over interior nodes
    double flux_residual = 0.0;
    // max |f_time(end) - f_time(start)| along axis j; dQ/dt equals this difference
    double boundary_flux = 0.0;
};

struct ConservationReport {
    std::size_t time_axis = 0;
    std::string quadrature = "trapezoid";
    std::vector<ConservedQuantity> quantities;
    // d f_j/dx_i - d f_i/dx_j over spatial pairs i < j
    std::vector<double> cross_residuals;
    double max_cross_residual = 0.0;

    double max_drift() const;
    double max_relative_drift() const;
    double max_flux_residual() const;
};

ConservationReport analyze(const OneFormField& theta, std::size_t time_axis);

// One report per order.
std::vector<ConservationReport> hierarchy_report(const std::vector<OneFormField>& forms, std::size_t time_axis);

// Columns order,axis,t,Q,drift,flux_residual. Axes are 1-based; drift is
// |Q(t) - Q(t_0)| on the central slice.
void write_conservation_csv(std::ostream& os, const std::vector<ConservationReport>& reports);

// Single JSON object with per-order maxima.
std::string conservation_summary_json(const std::vector<ConservationReport>& reports);

} // namespace pss

#endif // PSS_CONSERVATION_HPP
