#ifndef PSS_LIE_HPP
#define PSS_LIE_HPP

#include <Eigen/Dense>

namespace pss {

using Matrix = Eigen::MatrixXd;

// exp of a skew-symmetric matrix: closed form for n <= 3, Pade
// scaling-and-squaring otherwise. The result is orthogonal to round-off.
Matrix expm_skew(const Matrix& a);

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// max |L L^t - I|
double orthogonality_defect(const Matrix& l);

// One Runge-Kutta-Munthe-Kaas step of order four for dL/ds = A(s, L) L with
// A skew. `field(stage, L)` returns A at stage 0 (start), 1 (midpoint) or 2
// (end) of the step; h is the signed step length.
template <class Field>
Matrix rkmk4_step(const Matrix& l, double h, Field&& field) {
    const Matrix k1 = h * field(0, l);
    const Matrix k2 = h * field(1, Matrix(expm_skew(0.5 * k1) * l));
    const Matrix k3 = h * field(1, Matrix(expm_skew(0.5 * k2 - 0.125 * commutator(k1, k2)) * l));
    const Matrix k4 = h * field(2, Matrix(expm_skew(k3) * l));
    const Matrix incr = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0 - commutator(k1, k4) / 12.0;
    return expm_skew(incr) * l;
}

} // namespace pss

#endif // PSS_LIE_HPP
