#include "pss/lie.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace pss {

Matrix expm_skew(const Matrix& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("expm_skew: square matrix required");
    if (n == 2) {
        const double t = a(1, 0);
        Matrix r(2, 2);
        r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        return r;
    }
    if (n == 3) {
        // a = [w]_x with w = (a21, a02, a10)
        const double wx = a(2, 1), wy = a(0, 2), wz = a(1, 0);
        const double t2 = wx * wx + wy * wy + wz * wz;
        const double t = std::sqrt(t2);
        double s, c;  // sin(t)/t and (1-cos t)/t^2
        if (t < 1e-4) {
            s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
            c = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
        } else {
            s = std::sin(t) / t;
            c = (1.0 - std::cos(t)) / t2;
        }
        Matrix k(3, 3);
        k << 0.0, -wz, wy, wz, 0.0, -wx, -wy, wx, 0.0;
        return Matrix::Identity(3, 3) + s * k + c * (k * k);
    }
    return a.exp();
}

double orthogonality_defect(const Matrix& l) {
    return (l * l.transpose() - Matrix::Identity(l.rows(), l.rows())).cwiseAbs().maxCoeff();
}

} // namespace pss
