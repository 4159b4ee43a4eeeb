#ifndef PSS_GRID_HPP
#define PSS_GRID_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pss {

using NodeIndex = std::vector<std::size_t>;

// Rectangular sample grid in n coordinates, row-major with the last axis
// fastest. All fields in the library live on one of these.
class GridChart {
public:
    GridChart() = default;
    GridChart(std::vector<double> origin, std::vector<double> spacing,
              std::vector<std::size_t> counts,
              std::vector<std::string> axis_names = {});

    std::size_t dim() const { return counts_.size(); }
    std::size_t size() const { return size_; }

    const std::vector<double>& origin() const { return origin_; }
    const std::vector<double>& spacing() const { return spacing_; }
    const std::vector<std::size_t>& counts() const { return counts_; }
    const std::vector<std::string>& axis_names() const { return names_; }

    double spacing(std::size_t axis) const { return spacing_[axis]; }
    std::size_t count(std::size_t axis) const { return counts_[axis]; }
    std::size_t stride(std::size_t axis) const { return strides_[axis]; }
    double max_spacing() const;

    double coord(std::size_t axis, std::size_t i) const {
        return origin_[axis] + static_cast<double>(i) * spacing_[axis];
    }
    // Index of a flat node along one axis.
    std::size_t axis_index(std::size_t flat, std::size_t axis) const {
        return (flat / strides_[axis]) % counts_[axis];
    }
    double node_coord(std::size_t flat, std::size_t axis) const {
        return coord(axis, axis_index(flat, axis));
    }

    std::size_t flat(std::span<const std::size_t> multi) const;
    NodeIndex multi(std::size_t flat) const;
    bool contains(std::span<const std::size_t> multi) const;
    bool is_interior(std::size_t flat) const;
    NodeIndex center() const;

    // Refines every axis by an integer factor keeping the covered box fixed.
    GridChart refined(std::size_t factor) const;

    friend bool operator==(const GridChart& a, const GridChart& b);

private:
    std::vector<double> origin_;
    std::vector<double> spacing_;
    std::vector<std::size_t> counts_;
    std::vector<std::string> names_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

void require_same_chart(const GridChart& a, const GridChart& b, const char* where);

struct ScalarField {
    GridChart chart;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(GridChart c, double fill = 0.0);
    ScalarField(GridChart c, std::vector<double> v);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    template <class F>
    static ScalarField sample(const GridChart& c, F&& f) {
        ScalarField s(c);
        std::vector<double> x(c.dim());
        for (std::size_t p = 0; p < c.size(); ++p) {
            for (std::size_t a = 0; a < c.dim(); ++a) x[a] = c.node_coord(p, a);
            s.values[p] = f(std::span<const double>(x));
        }
        return s;
    }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(const ScalarField& a, const ScalarField& b);

// Coefficient k is the dx_k component.
struct OneFormField {
    GridChart chart;
    std::vector<ScalarField> coeffs;

    OneFormField() = default;
    explicit OneFormField(const GridChart& c);
    explicit OneFormField(std::vector<ScalarField> cs);

    ScalarField& operator[](std::size_t k) { return coeffs[k]; }
    const ScalarField& operator[](std::size_t k) const { return coeffs[k]; }

    OneFormField& operator+=(const OneFormField& o);
    OneFormField& operator-=(const OneFormField& o);
    OneFormField& operator*=(double s);
};

OneFormField operator+(OneFormField a, const OneFormField& b);
OneFormField operator-(OneFormField a, const OneFormField& b);
OneFormField operator*(OneFormField a, double s);
OneFormField operator*(const ScalarField& f, const OneFormField& a);

// Coefficient of dx_k ^ dx_l stored for k < l only.
struct TwoFormField {
    GridChart chart;
    std::vector<ScalarField> coeffs;

    TwoFormField() = default;
    explicit TwoFormField(const GridChart& c);

    static std::size_t pair_index(std::size_t k, std::size_t l, std::size_t n);
    static std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

    ScalarField& at(std::size_t k, std::size_t l) { return coeffs[pair_index(k, l, chart.dim())]; }
    const ScalarField& at(std::size_t k, std::size_t l) const {
        return coeffs[pair_index(k, l, chart.dim())];
    }

    TwoFormField& operator+=(const TwoFormField& o);
    TwoFormField& operator-=(const TwoFormField& o);
    TwoFormField& operator*=(double s);
};

TwoFormField operator+(TwoFormField a, const TwoFormField& b);
TwoFormField operator-(TwoFormField a, const TwoFormField& b);
TwoFormField operator*(TwoFormField a, double s);

// Skew-symmetric matrix of 1-forms. Only i < j is stored, so the diagonal is
// identically zero and entry(j,i) = -entry(i,j) holds exactly.
class ConnectionField {
public:
    ConnectionField() = default;
    ConnectionField(const GridChart& c, std::size_t n);

    std::size_t size() const { return n_; }
    const GridChart& chart() const { return chart_; }

    // Coefficient of dx_k in omega_ij at a node.
    double coeff(std::size_t i, std::size_t j, std::size_t k, std::size_t node) const {
        if (i == j) return 0.0;
        return i < j ? upper_[pair(i, j)].coeffs[k].values[node]
                     : -upper_[pair(j, i)].coeffs[k].values[node];
    }
    OneFormField entry(std::size_t i, std::size_t j) const;
    // Stores omega_ij (i != j) and implicitly omega_ji = -omega_ij.
    void set(std::size_t i, std::size_t j, const OneFormField& form);
    OneFormField& upper(std::size_t i, std::size_t j) { return upper_[pair(i, j)]; }
    const OneFormField& upper(std::size_t i, std::size_t j) const { return upper_[pair(i, j)]; }

private:
    std::size_t pair(std::size_t i, std::size_t j) const { return TwoFormField::pair_index(i, j, n_); }

    GridChart chart_;
    std::size_t n_ = 0;
    std::vector<OneFormField> upper_;
};

// Same layout as a OneFormField but holds components along d/dx_k.
struct VectorField {
    GridChart chart;
    std::vector<ScalarField> comps;
};

// Max and root-mean-square norms over a node subset.
struct Norms {
    double max = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;

    void add(double v);
    void merge(const Norms& o);
    double rms() const;
};

Norms interior_norms(const ScalarField& f);
Norms interior_norms(const TwoFormField& f);
Norms masked_norms(const ScalarField& f, const std::vector<char>& include);

// Visits every node along the axis-ordered staircase paths from base. For
// stage s the line through each already-filled node is walked along
// order[s], outward from base, calling step(from, to, axis, dir) for each
// pair of neighbours.
template <class Step>
void staircase_sweep(const GridChart& chart, const NodeIndex& base,
                     std::span<const std::size_t> order, Step&& step) {
    for (std::size_t s = 0; s < order.size(); ++s) {
        const std::size_t axis = order[s];
        const std::size_t stride = chart.stride(axis);
        const std::size_t count = chart.count(axis);
        for (std::size_t p = 0; p < chart.size(); ++p) {
            bool seed = true;
            for (std::size_t t = s; t < order.size() && seed; ++t)
                seed = chart.axis_index(p, order[t]) == base[order[t]];
            if (!seed) continue;
            std::size_t node = p;
            for (std::size_t i = base[axis]; i + 1 < count; ++i, node += stride)
                step(node, node + stride, axis, +1);
            node = p;
            for (std::size_t i = base[axis]; i > 0; --i, node -= stride)
                step(node, node - stride, axis, -1);
        }
    }
}

// Value of f halfway between node and its neighbour in direction dir along
// axis, by cubic interpolation on the line (quadratic when count == 3).
double half_node_value(const std::vector<double>& f, const GridChart& chart,
                       std::size_t node, std::size_t axis, int dir);

} // namespace pss

#endif // PSS_GRID_HPP
