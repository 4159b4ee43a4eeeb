#include "pss/series.hpp"

#include <cmath>
#include <stdexcept>

namespace pss {

EtaSeries::EtaSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw std::invalid_argument("EtaSeries: at least one coefficient required");
}

EtaSeries EtaSeries::constant(double v, std::size_t order) {
    EtaSeries s(order);
    s.c_[0] = v;
    return s;
}

EtaSeries EtaSeries::variable(std::size_t order) {
    EtaSeries s(order);
    if (order >= 1) s.c_[1] = 1.0;
    return s;
}

double EtaSeries::evaluate(double eta) const {
    double acc = 0.0;
    for (std::size_t j = c_.size(); j-- > 0;) acc = acc * eta + c_[j];
    return acc;
}

EtaSeries EtaSeries::truncated(std::size_t order) const {
    EtaSeries s(order);
    for (std::size_t j = 0; j <= order && j < c_.size(); ++j) s.c_[j] = c_[j];
    return s;
}

void EtaSeries::require_same_order(const EtaSeries& o) const {
    if (o.c_.size() != c_.size()) throw std::invalid_argument("EtaSeries: order mismatch");
}

EtaSeries& EtaSeries::operator+=(const EtaSeries& o) {
    require_same_order(o);
    for (std::size_t j = 0; j < c_.size(); ++j) c_[j] += o.c_[j];
    return *this;
}

EtaSeries& EtaSeries::operator-=(const EtaSeries& o) {
    require_same_order(o);
    for (std::size_t j = 0; j < c_.size(); ++j) c_[j] -= o.c_[j];
    return *this;
}

EtaSeries& EtaSeries::operator*=(const EtaSeries& o) {
    require_same_order(o);
    std::vector<double> r(c_.size(), 0.0);
    for (std::size_t a = 0; a < c_.size(); ++a) {
        if (c_[a] == 0.0) continue;
        for (std::size_t b = 0; a + b < c_.size(); ++b) r[a + b] += c_[a] * o.c_[b];
    }
    c_ = std::move(r);
    return *this;
}

EtaSeries& EtaSeries::operator+=(double v) {
    c_[0] += v;
    return *this;
}

EtaSeries& EtaSeries::operator*=(double v) {
    for (auto& x : c_) x *= v;
    return *this;
}

EtaSeries operator+(EtaSeries a, const EtaSeries& b) { return a += b; }
EtaSeries operator-(EtaSeries a, const EtaSeries& b) { return a -= b; }
EtaSeries operator*(const EtaSeries& a, const EtaSeries& b) {
    EtaSeries r(a);
    return r *= b;
}
EtaSeries operator+(EtaSeries a, double v) { return a += v; }
EtaSeries operator+(double v, EtaSeries a) { return a += v; }
EtaSeries operator-(EtaSeries a, double v) { return a += -v; }
EtaSeries operator-(double v, const EtaSeries& a) { return (a * -1.0) + v; }
EtaSeries operator-(const EtaSeries& a) { return a * -1.0; }
EtaSeries operator*(EtaSeries a, double v) { return a *= v; }
EtaSeries operator*(double v, EtaSeries a) { return a *= v; }

std::pair<EtaSeries, EtaSeries> sin_cos(const EtaSeries& phi) {
    const std::size_t k = phi.order();
    EtaSeries psi(phi);
    psi[0] = 0.0;

    // sin(psi) and cos(psi) from psi^m / m!, m = 0..K
    EtaSeries sin_psi(k), cos_psi = EtaSeries::constant(1.0, k);
    EtaSeries term = EtaSeries::constant(1.0, k);
    for (std::size_t m = 1; m <= k; ++m) {
        term *= psi;
        term *= 1.0 / static_cast<double>(m);
        switch (m % 4) {
        case 1: sin_psi += term; break;
        case 2: cos_psi -= term; break;
        case 3: sin_psi -= term; break;
        default: cos_psi += term; break;
        }
    }
    const double s0 = std::sin(phi[0]), c0 = std::cos(phi[0]);
    EtaSeries s = sin_psi * c0 + cos_psi * s0;
    EtaSeries c = cos_psi * c0 - sin_psi * s0;
    return {std::move(s), std::move(c)};
}

EtaSeries sin(const EtaSeries& phi) { return sin_cos(phi).first; }
EtaSeries cos(const EtaSeries& phi) { return sin_cos(phi).second; }

} // namespace pss
