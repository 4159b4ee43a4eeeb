#include "pss/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pss {

GridChart::GridChart(std::vector<double> origin, std::vector<double> spacing,
                     std::vector<std::size_t> counts, std::vector<std::string> axis_names)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), counts_(std::move(counts)),
      names_(std::move(axis_names)) {
    const std::size_t n = counts_.size();
    if (n < 2) throw std::invalid_argument("GridChart: dimension must be at least 2");
    if (origin_.size() != n || spacing_.size() != n)
        throw std::invalid_argument("GridChart: origin/spacing/counts length mismatch");
    for (std::size_t a = 0; a < n; ++a) {
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
            throw std::invalid_argument("GridChart: spacing must be positive on axis " + std::to_string(a));
        if (counts_[a] < 3)
            throw std::invalid_argument("GridChart: at least 3 samples required on axis " + std::to_string(a));
        if (!std::isfinite(origin_[a]))
            throw std::invalid_argument("GridChart: non-finite origin");
    }
    if (names_.empty()) {
        for (std::size_t a = 0; a < n; ++a) names_.push_back("x" + std::to_string(a + 1));
    } else if (names_.size() != n) {
        throw std::invalid_argument("GridChart: axis_names length mismatch");
    }
    strides_.assign(n, 1);
    for (std::size_t a = n - 1; a > 0; --a) strides_[a - 1] = strides_[a] * counts_[a];
    size_ = strides_[0] * counts_[0];
}

double GridChart::max_spacing() const {
    return *std::max_element(spacing_.begin(), spacing_.end());
}

std::size_t GridChart::flat(std::span<const std::size_t> multi) const {
    std::size_t p = 0;
    for (std::size_t a = 0; a < dim(); ++a) p += multi[a] * strides_[a];
    return p;
}

NodeIndex GridChart::multi(std::size_t flat) const {
    NodeIndex m(dim());
    for (std::size_t a = 0; a < dim(); ++a) m[a] = axis_index(flat, a);
    return m;
}

bool GridChart::contains(std::span<const std::size_t> multi) const {
    if (multi.size() != dim()) return false;
    for (std::size_t a = 0; a < dim(); ++a)
        if (multi[a] >= counts_[a]) return false;
    return true;
}

bool GridChart::is_interior(std::size_t flat) const {
    for (std::size_t a = 0; a < dim(); ++a) {
        const std::size_t i = axis_index(flat, a);
        if (i == 0 || i + 1 == counts_[a]) return false;
    }
    return true;
}

NodeIndex GridChart::center() const {
    NodeIndex m(dim());
    for (std::size_t a = 0; a < dim(); ++a) m[a] = (counts_[a] - 1) / 2;
    return m;
}

GridChart GridChart::refined(std::size_t factor) const {
    if (factor == 0) throw std::invalid_argument("GridChart::refined: factor must be positive");
    std::vector<double> h(spacing_);
    std::vector<std::size_t> c(counts_);
    for (std::size_t a = 0; a < dim(); ++a) {
        h[a] /= static_cast<double>(factor);
        c[a] = (c[a] - 1) * factor + 1;
    }
    return GridChart(origin_, h, c, names_);
}

bool operator==(const GridChart& a, const GridChart& b) {
    return a.counts_ == b.counts_ && a.origin_ == b.origin_ && a.spacing_ == b.spacing_;
}

void require_same_chart(const GridChart& a, const GridChart& b, const char* where) {
    if (!(a == b)) throw std::invalid_argument(std::string(where) + ": charts differ");
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GridChart c, double fill) : chart(std::move(c)), values(chart.size(), fill) {}

ScalarField::ScalarField(GridChart c, std::vector<double> v) : chart(std::move(c)), values(std::move(v)) {
    if (values.size() != chart.size())
        throw std::invalid_argument("ScalarField: value count does not match chart");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}
ScalarField& ScalarField::operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    ScalarField r(a);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] *= b.values[i];
    return r;
}

// ---------------------------------------------------------------------------

OneFormField::OneFormField(const GridChart& c) : chart(c), coeffs(c.dim(), ScalarField(c)) {}

OneFormField::OneFormField(std::vector<ScalarField> cs) : coeffs(std::move(cs)) {
    if (coeffs.empty()) throw std::invalid_argument("OneFormField: no coefficients");
    chart = coeffs.front().chart;
    if (coeffs.size() != chart.dim()) throw std::invalid_argument("OneFormField: need one coefficient per axis");
    for (const auto& c : coeffs) require_same_chart(chart, c.chart, "OneFormField");
}

OneFormField& OneFormField::operator+=(const OneFormField& o) {
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] += o.coeffs[k];
    return *this;
}
OneFormField& OneFormField::operator-=(const OneFormField& o) {
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] -= o.coeffs[k];
    return *this;
}
OneFormField& OneFormField::operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
}

OneFormField operator+(OneFormField a, const OneFormField& b) { return a += b; }
OneFormField operator-(OneFormField a, const OneFormField& b) { return a -= b; }
OneFormField operator*(OneFormField a, double s) { return a *= s; }
OneFormField operator*(const ScalarField& f, const OneFormField& a) {
    OneFormField r(a);
    for (auto& c : r.coeffs)
        for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] *= f.values[i];
    return r;
}

// ---------------------------------------------------------------------------

TwoFormField::TwoFormField(const GridChart& c) : chart(c), coeffs(pair_count(c.dim()), ScalarField(c)) {}

std::size_t TwoFormField::pair_index(std::size_t k, std::size_t l, std::size_t n) {
    if (!(k < l && l < n)) throw std::out_of_range("TwoFormField: pair index requires k < l < n");
    // rows k = 0..n-2 hold n-1-k entries each
    return k * (2 * n - k - 1) / 2 + (l - k - 1);
}

TwoFormField& TwoFormField::operator+=(const TwoFormField& o) {
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] += o.coeffs[k];
    return *this;
}
TwoFormField& TwoFormField::operator-=(const TwoFormField& o) {
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] -= o.coeffs[k];
    return *this;
}
TwoFormField& TwoFormField::operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
}

TwoFormField operator+(TwoFormField a, const TwoFormField& b) { return a += b; }
TwoFormField operator-(TwoFormField a, const TwoFormField& b) { return a -= b; }
TwoFormField operator*(TwoFormField a, double s) { return a *= s; }

// ---------------------------------------------------------------------------

ConnectionField::ConnectionField(const GridChart& c, std::size_t n)
    : chart_(c), n_(n), upper_(TwoFormField::pair_count(n), OneFormField(c)) {
    if (n < 2) throw std::invalid_argument("ConnectionField: n must be at least 2");
}

OneFormField ConnectionField::entry(std::size_t i, std::size_t j) const {
    if (i == j) return OneFormField(chart_);
    if (i < j) return upper_[pair(i, j)];
    return upper_[pair(j, i)] * -1.0;
}

void ConnectionField::set(std::size_t i, std::size_t j, const OneFormField& form) {
    if (i == j) throw std::invalid_argument("ConnectionField: diagonal entries are zero");
    require_same_chart(chart_, form.chart, "ConnectionField::set");
    if (i < j) upper_[pair(i, j)] = form;
    else upper_[pair(j, i)] = form * -1.0;
}

// ---------------------------------------------------------------------------

void Norms::add(double v) {
    const double a = std::abs(v);
    if (std::isnan(a) || a > max) max = a;
    sum_sq += v * v;
    ++count;
}

void Norms::merge(const Norms& o) {
    if (std::isnan(o.max) || o.max > max) max = o.max;
    sum_sq += o.sum_sq;
    count += o.count;
}

double Norms::rms() const { return count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0; }

Norms interior_norms(const ScalarField& f) {
    Norms n;
    for (std::size_t p = 0; p < f.values.size(); ++p)
        if (f.chart.is_interior(p)) n.add(f.values[p]);
    return n;
}

Norms interior_norms(const TwoFormField& f) {
    Norms n;
    for (const auto& c : f.coeffs) n.merge(interior_norms(c));
    return n;
}

Norms masked_norms(const ScalarField& f, const std::vector<char>& include) {
    Norms n;
    for (std::size_t p = 0; p < f.values.size(); ++p)
        if (include[p]) n.add(f.values[p]);
    return n;
}

double half_node_value(const std::vector<double>& f, const GridChart& chart, std::size_t node,
                       std::size_t axis, int dir) {
    const std::size_t stride = chart.stride(axis);
    const std::size_t count = chart.count(axis);
    const std::size_t i = chart.axis_index(node, axis);
    // lower end of the interval and the flat index of line position 0
    const std::size_t j = dir > 0 ? i : i - 1;
    const std::size_t line0 = node - i * stride;
    auto at = [&](std::size_t q) { return f[line0 + q * stride]; };
    if (count == 3) {
        return j == 0 ? (3.0 * at(0) + 6.0 * at(1) - at(2)) / 8.0
                      : (-at(0) + 6.0 * at(1) + 3.0 * at(2)) / 8.0;
    }
    if (j == 0) return (5.0 * at(0) + 15.0 * at(1) - 5.0 * at(2) + at(3)) / 16.0;
    if (j + 2 == count)
        return (at(j - 2) - 5.0 * at(j - 1) + 15.0 * at(j) + 5.0 * at(j + 1)) / 16.0;
    return (-at(j - 1) + 9.0 * at(j) + 9.0 * at(j + 1) - at(j + 2)) / 16.0;
}

} // namespace pss
