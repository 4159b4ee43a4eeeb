#ifndef PSS_FORMS_HPP
#define PSS_FORMS_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "pss/grid.hpp"

namespace pss {

// Second-order finite difference along one axis: central inside, one-sided
// three-point on the two faces.
std::vector<double> partial(const ScalarField& f, std::size_t axis);

// Second derivative along one axis, second order everywhere.
std::vector<double> partial2(const ScalarField& f, std::size_t axis);

OneFormField d_scalar(const ScalarField& f);

// Coefficient of dx_k ^ dx_l is d(theta_l)/dx_k - d(theta_k)/dx_l.
TwoFormField d_oneform(const OneFormField& theta);

TwoFormField wedge(const OneFormField& alpha, const OneFormField& beta);

// Max norm of d(theta) over interior nodes.
double closedness_residual(const OneFormField& theta);
Norms closedness_norms(const OneFormField& theta);

class NotClosedError : public std::runtime_error {
public:
    NotClosedError(const std::string& what, double residual)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

struct PotentialResult {
    ScalarField G;           // G(base) = 0, dG = theta
    ScalarField r;           // c * exp(-G)
    double path_residual = 0.0;
};

// Integrates theta by the trapezoid rule along axis-ordered staircase paths
// from base (axis 1 first) and again with the reversed axis order; the
// discrepancy between the two is the path residual. Throws NotClosedError
// when a tolerance is given and the path residual exceeds it.
PotentialResult potential(const OneFormField& theta, const NodeIndex& base, double c = 1.0,
                          std::optional<double> tolerance = std::nullopt);

} // namespace pss

#endif // PSS_FORMS_HPP
