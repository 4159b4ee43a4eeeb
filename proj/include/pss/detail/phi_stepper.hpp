#ifndef PSS_DETAIL_PHI_STEPPER_HPP
#define PSS_DETAIL_PHI_STEPPER_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "pss/frames.hpp"
#include "pss/series.hpp"

namespace pss::detail {

inline std::pair<double, double> sin_cos(double x) { return {std::sin(x), std::cos(x)}; }
using pss::sin_cos;

// dx_k coefficients of omega_1, omega_2 and omega_12 at one point.
template <class T>
struct PhiCoeffs {
    T w1, w2, w12;
};

// d(phi)/dx_k = omega_12 + sin(phi) omega_1 + cos(phi) omega_2
template <class T>
T phi_rhs(const PhiCoeffs<T>& c, const T& phi) {
    const auto [s, co] = sin_cos(phi);
    return c.w12 + c.w1 * s + c.w2 * co;
}

template <class T>
T rk4_phi_step(const T& phi, double h, const PhiCoeffs<T>& a, const PhiCoeffs<T>& mid,
               const PhiCoeffs<T>& b) {
    const T k1 = phi_rhs(a, phi);
    const T k2 = phi_rhs(mid, phi + k1 * (0.5 * h));
    const T k3 = phi_rhs(mid, phi + k2 * (0.5 * h));
    const T k4 = phi_rhs(b, phi + k3 * h);
    return phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

inline double sample(const ScalarField& f, std::size_t node, std::size_t axis, int half_dir) {
    return half_dir == 0 ? f.values[node] : half_node_value(f.values, f.chart, node, axis, half_dir);
}

// half_dir = 0 samples at the node, +-1 halfway to the neighbour.
inline PhiCoeffs<double> phi_coeffs(const FrameData& fd, std::size_t node, std::size_t axis, int half_dir) {
    return {sample(fd.omega[0].coeffs[axis], node, axis, half_dir),
            sample(fd.omega[1].coeffs[axis], node, axis, half_dir),
            sample(fd.W.upper(0, 1).coeffs[axis], node, axis, half_dir)};
}

// Series frame data: element j holds the eta^j coefficient of every form.
inline PhiCoeffs<EtaSeries> phi_coeffs(const std::vector<FrameData>& series, std::size_t order,
                                       std::size_t node, std::size_t axis, int half_dir) {
    PhiCoeffs<EtaSeries> c{EtaSeries(order), EtaSeries(order), EtaSeries(order)};
    for (std::size_t j = 0; j <= order && j < series.size(); ++j) {
        const auto pc = phi_coeffs(series[j], node, axis, half_dir);
        c.w1[j] = pc.w1;
        c.w2[j] = pc.w2;
        c.w12[j] = pc.w12;
    }
    return c;
}

} // namespace pss::detail

#endif // PSS_DETAIL_PHI_STEPPER_HPP
