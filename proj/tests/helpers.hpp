#ifndef PSS_TEST_HELPERS_HPP
#define PSS_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include "pss/frames.hpp"
#include "pss/grid.hpp"

namespace testing {

inline pss::GridChart box(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny) {
    return pss::GridChart({x0, y0}, {(x1 - x0) / double(nx - 1), (y1 - y0) / double(ny - 1)}, {nx, ny});
}

inline pss::GridChart square(double lo, double hi, std::size_t n) { return box(lo, hi, lo, hi, n, n); }

// ds^2 = dx^2 + exp(-2x) dy^2: omega_1 = dx, omega_2 = e^{-x} dy, omega_12 = -e^{-x} dy.
inline pss::FrameData horocyclic_frame(const pss::GridChart& c) {
    pss::FrameData fd(c, 2);
    for (std::size_t p = 0; p < c.size(); ++p) {
        const double e = std::exp(-c.node_coord(p, 0));
        fd.omega[0][0][p] = 1.0;
        fd.omega[1][1][p] = e;
        fd.W.upper(0, 1)[1][p] = -e;
    }
    return fd;
}

inline pss::FrameData flat_frame(const pss::GridChart& c) {
    pss::FrameData fd(c, 2);
    for (std::size_t p = 0; p < c.size(); ++p) {
        fd.omega[0][0][p] = 1.0;
        fd.omega[1][1][p] = 1.0;
    }
    return fd;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double interior_max_abs_diff(const pss::GridChart& c, const std::vector<double>& a,
                                    const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t p = 0; p < c.size(); ++p)
        if (c.is_interior(p)) m = std::max(m, std::abs(a[p] - b[p]));
    return m;
}

} // namespace testing

#endif
