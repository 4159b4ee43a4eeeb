#ifndef PSS_SERIES_HPP
#define PSS_SERIES_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace pss {

// Truncated power series sum_{j<=K} c_j eta^j. Products drop every term of
// degree above K; binary operations require equal orders.
class EtaSeries {
public:
    EtaSeries() : c_(1, 0.0) {}
    explicit EtaSeries(std::size_t order) : c_(order + 1, 0.0) {}
    explicit EtaSeries(std::vector<double> coeffs);

    static EtaSeries constant(double v, std::size_t order);
    // The series eta itself (zero when order == 0).
    static EtaSeries variable(std::size_t order);

    std::size_t order() const { return c_.size() - 1; }
    double operator[](std::size_t j) const { return c_[j]; }
    double& operator[](std::size_t j) { return c_[j]; }
    const std::vector<double>& coeffs() const { return c_; }

    double evaluate(double eta) const;
    EtaSeries truncated(std::size_t order) const;

    EtaSeries& operator+=(const EtaSeries& o);
    EtaSeries& operator-=(const EtaSeries& o);
    EtaSeries& operator*=(const EtaSeries& o);
    EtaSeries& operator+=(double v);
    EtaSeries& operator*=(double v);

    friend bool operator==(const EtaSeries&, const EtaSeries&) = default;

private:
    void require_same_order(const EtaSeries& o) const;
    std::vector<double> c_;
};

EtaSeries operator+(EtaSeries a, const EtaSeries& b);
EtaSeries operator-(EtaSeries a, const EtaSeries& b);
EtaSeries operator*(const EtaSeries& a, const EtaSeries& b);
EtaSeries operator+(EtaSeries a, double v);
EtaSeries operator+(double v, EtaSeries a);
EtaSeries operator-(EtaSeries a, double v);
EtaSeries operator-(double v, const EtaSeries& a);
EtaSeries operator-(const EtaSeries& a);
EtaSeries operator*(EtaSeries a, double v);
EtaSeries operator*(double v, EtaSeries a);

// sin and cos of phi = phi_0 + psi (psi without constant term) by
// sin(phi_0 + psi) = sin(phi_0) cos(psi) + cos(phi_0) sin(psi); the Taylor
// series in psi terminates at degree K.
std::pair<EtaSeries, EtaSeries> sin_cos(const EtaSeries& phi);
EtaSeries sin(const EtaSeries& phi);
EtaSeries cos(const EtaSeries& phi);

} // namespace pss

#endif // PSS_SERIES_HPP
