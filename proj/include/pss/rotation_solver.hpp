#ifndef PSS_ROTATION_SOLVER_HPP
#define PSS_ROTATION_SOLVER_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "pss/defaults.hpp"
#include "pss/frames.hpp"

namespace pss {

struct SolverOptions {
    // Structure gate: res1, res2 <= gate_factor * h^2 * max(1, max|coeff|)^2.
    // A non-positive factor disables the gate.
    double gate_factor = defaults::gate_factor;
    double nondegeneracy = defaults::nondegeneracy;
};

class GateError : public std::runtime_error {
public:
    GateError(const std::string& what, StructureResiduals res, double tolerance)
        : std::runtime_error(what), residuals(res), tolerance(tolerance) {}
    StructureResiduals residuals;
    double tolerance;
};

double structure_gate_tolerance(const FrameData& fd, double gate_factor);

// Curvature -1 certificate required before integrating; throws GateError.
StructureResiduals check_structure_gate(const FrameData& fd, const SolverOptions& opts);

struct SolveReport {
    FrameRotationField rotation;
    OneFormField theta1;          // sum_k L_1k omega_k
    NodeIndex base;
    double compat_residual = 0.0; // sweep-order discrepancy
    double closed_residual = 0.0;
    double orth_residual = 0.0;
    StructureResiduals structure;
};

// 2D angle phi with d(phi) = omega_12 + sin(phi) omega_1 + cos(phi) omega_2,
// integrated with RK4 along axis 1 through base and then along axis 2.
SolveReport solve_phi_2d(const FrameData& fd, double phi0, const NodeIndex& base,
                         const SolverOptions& opts = {});

// Orthogonal field L solving (dL L^t)_1i + (L W L^t)_1i + sum_k L_ik omega_k = 0
// and (dL L^t)_ij + (L W L^t)_ij = 0, stepped with RKMK4 on O(n).
SolveReport solve_L_nd(const FrameData& fd, const Matrix& l0, const NodeIndex& base,
                       const SolverOptions& opts = {});

// sum_k L_1k omega_k
OneFormField closed_form_from_L(const FrameData& fd, const FrameRotationField& rotation);

// [X, Y]^k = X^l d_l Y^k - Y^l d_l X^k by finite differences.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

struct SpecialCoordinatesReport {
    ScalarField G;                  // dG = theta_1, G(base) = 0
    std::vector<ScalarField> r;     // r_i = c_i exp(-G), i = 2..n
    double path_residual = 0.0;
    std::vector<double> bracket_1i; // max |[v_1, r_i v_i]|
    std::vector<double> bracket_ij; // max |[r_i v_i, r_j v_j]|, i < j
    double max_bracket_1i = 0.0;
    double max_bracket_ij = 0.0;
};

// Brackets over interior nodes; throws DegenerateFrameError on degenerate frames.
SpecialCoordinatesReport special_coordinates_check(const FrameData& fd, const SolveReport& report,
                                                   std::span<const double> c,
                                                   double rel_threshold = defaults::nondegeneracy);

} // namespace pss

#endif // PSS_ROTATION_SOLVER_HPP
