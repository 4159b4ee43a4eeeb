#include "pss/frames.hpp"

#include <cmath>
#include <string>

#include "pss/forms.hpp"

namespace pss {

FrameData::FrameData(const GridChart& c, std::size_t n) : chart(c), omega(n, OneFormField(c)), W(c, n) {
    if (n != c.dim()) throw std::invalid_argument("FrameData: frame size must equal chart dimension");
}

Matrix FrameData::coefficient_matrix(std::size_t node) const {
    const std::size_t n = this->n();
    Matrix f(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) f(i, k) = omega[i].coeffs[k].values[node];
    return f;
}

double FrameData::max_coefficient() const {
    double m = 0.0;
    auto scan = [&](const OneFormField& f) {
        for (const auto& c : f.coeffs)
            for (double v : c.values) m = std::max(m, std::abs(v));
    };
    for (const auto& w : omega) scan(w);
    for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j = i + 1; j < n(); ++j) scan(W.upper(i, j));
    return m;
}

// ---------------------------------------------------------------------------

FrameRotationField::FrameRotationField(const GridChart& c, std::size_t n)
    : chart(c), n(n), entries(c.size() * n * n, 0.0) {}

FrameRotationField FrameRotationField::identity(const GridChart& c, std::size_t n) {
    return constant(c, Matrix::Identity(n, n));
}

FrameRotationField FrameRotationField::constant(const GridChart& c, const Matrix& l) {
    FrameRotationField r(c, static_cast<std::size_t>(l.rows()));
    for (std::size_t p = 0; p < c.size(); ++p) r.set(p, l);
    return r;
}

FrameRotationField FrameRotationField::from_angle(const ScalarField& phi) {
    FrameRotationField r(phi.chart, 2);
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const double c = std::cos(phi[p]), s = std::sin(phi[p]);
        double* e = &r.entries[4 * p];
        e[0] = c;
        e[1] = -s;
        e[2] = s;
        e[3] = c;
    }
    r.phi = phi;
    return r;
}

Matrix FrameRotationField::at(std::size_t node) const {
    Matrix l(n, n);
    const double* e = &entries[node * n * n];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) = e[i * n + j];
    return l;
}

void FrameRotationField::set(std::size_t node, const Matrix& l) {
    double* e = &entries[node * n * n];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) e[i * n + j] = l(i, j);
}

ScalarField FrameRotationField::component(std::size_t i, std::size_t j) const {
    ScalarField s(chart);
    for (std::size_t p = 0; p < chart.size(); ++p) s[p] = entries[p * n * n + i * n + j];
    return s;
}

double FrameRotationField::orthogonality_residual() const {
    double m = 0.0;
    for (std::size_t p = 0; p < chart.size(); ++p) m = std::max(m, orthogonality_defect(at(p)));
    return m;
}

// ---------------------------------------------------------------------------

FrameData frame_change(const FrameData& fd, const FrameRotationField& r, double orth_tolerance) {
    require_same_chart(fd.chart, r.chart, "frame_change");
    const std::size_t n = fd.n();
    if (r.n != n) throw std::invalid_argument("frame_change: rotation size differs from frame size");
    const double defect = r.orthogonality_residual();
    if (!(defect <= orth_tolerance))
        throw std::invalid_argument("frame_change: rotation field not orthogonal (defect " +
                                    std::to_string(defect) + ")");

    const GridChart& c = fd.chart;
    // dL_ij as one-forms
    std::vector<OneFormField> dl;
    dl.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dl.push_back(d_scalar(r.component(i, j)));

    FrameData out(c, n);
    Matrix wk(n, n), dlk(n, n);
    for (std::size_t p = 0; p < c.size(); ++p) {
        const Matrix l = r.at(p);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += l(i, j) * fd.omega[j].coeffs[k].values[p];
                out.omega[i].coeffs[k].values[p] = acc;
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    wk(i, j) = fd.W.coeff(i, j, k, p);
                    dlk(i, j) = dl[i * n + j].coeffs[k].values[p];
                }
            const Matrix theta = dlk * l.transpose() + l * wk * l.transpose();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) out.W.upper(i, j).coeffs[k].values[p] = theta(i, j);
        }
    }
    return out;
}

std::vector<char> nondegenerate_mask(const FrameData& fd, double rel_threshold) {
    const std::size_t n = fd.n();
    std::vector<char> mask(fd.chart.size(), 1);
    for (std::size_t p = 0; p < fd.chart.size(); ++p) {
        const Matrix f = fd.coefficient_matrix(p);
        const double scale = f.cwiseAbs().maxCoeff();
        const double det = std::abs(f.determinant());
        mask[p] = scale > 0.0 && det > rel_threshold * std::pow(scale, static_cast<double>(n));
    }
    return mask;
}

StructureResiduals structure_residuals(const FrameData& fd, double curvature, double rel_threshold) {
    const std::size_t n = fd.n();
    const GridChart& c = fd.chart;
    auto include = nondegenerate_mask(fd, rel_threshold);
    StructureResiduals res;
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (!c.is_interior(p)) include[p] = 0;
        else if (!include[p]) ++res.masked_nodes;
    }

    std::vector<OneFormField> w(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i * n + j] = fd.W.entry(i, j);

    for (std::size_t i = 0; i < n; ++i) {
        TwoFormField r = d_oneform(fd.omega[i]);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) r -= wedge(fd.omega[j], w[j * n + i]);
        for (const auto& comp : r.coeffs) res.norms1.merge(masked_norms(comp, include));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            TwoFormField r = d_oneform(w[i * n + j]);
            for (std::size_t k = 0; k < n; ++k)
                if (k != i && k != j) r -= wedge(w[i * n + k], w[k * n + j]);
            r += wedge(fd.omega[i], fd.omega[j]) * curvature;
            for (const auto& comp : r.coeffs) res.norms2.merge(masked_norms(comp, include));
        }
    }
    res.res1 = res.norms1.max;
    res.res2 = res.norms2.max;
    return res;
}

double special_frame_residual(const FrameData& fd) {
    const std::size_t n = fd.n();
    double m = 0.0;
    for (std::size_t p = 0; p < fd.chart.size(); ++p) {
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 1; i < n; ++i)
                m = std::max(m, std::abs(fd.W.coeff(0, i, k, p) + fd.omega[i].coeffs[k].values[p]));
            for (std::size_t i = 1; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(fd.W.coeff(i, j, k, p)));
        }
    }
    return m;
}

std::vector<VectorField> frame_vector_fields(const FrameData& fd, double rel_threshold) {
    const std::size_t n = fd.n();
    const GridChart& c = fd.chart;
    const auto mask = nondegenerate_mask(fd, rel_threshold);
    std::size_t bad = 0;
    for (char m : mask) bad += m ? 0 : 1;
    if (bad)
        throw DegenerateFrameError("frame_vector_fields: " + std::to_string(bad) + " degenerate node(s)", bad);

    std::vector<VectorField> e(n, VectorField{c, std::vector<ScalarField>(n, ScalarField(c))});
    for (std::size_t p = 0; p < c.size(); ++p) {
        const Matrix inv = fd.coefficient_matrix(p).inverse();
        // omega_j(e_i) = sum_k F(j,k) E(k,i) = delta_ji
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) e[i].comps[k].values[p] = inv(k, i);
    }
    return e;
}

// ---------------------------------------------------------------------------

FieldBundle bundle_of(const FrameData& fd) {
    FieldBundle b{fd.chart, {}};
    for (const auto& w : fd.omega)
        for (const auto& c : w.coeffs) b.components.push_back(c.values);
    for (std::size_t i = 0; i < fd.n(); ++i)
        for (std::size_t j = i + 1; j < fd.n(); ++j)
            for (const auto& c : fd.W.upper(i, j).coeffs) b.components.push_back(c.values);
    return b;
}

FrameData frame_of(const FieldBundle& b) {
    const std::size_t n = b.chart.dim();
    const std::size_t expected = n * n + TwoFormField::pair_count(n) * n;
    if (b.components.size() != expected)
        throw std::invalid_argument("frame_of: expected " + std::to_string(expected) + " components, got " +
                                    std::to_string(b.components.size()));
    FrameData fd(b.chart, n);
    std::size_t q = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) fd.omega[i].coeffs[k].values = b.components[q++];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) fd.W.upper(i, j).coeffs[k].values = b.components[q++];
    return fd;
}

FieldBundle bundle_of(const FrameRotationField& r) {
    FieldBundle b{r.chart, {}};
    for (std::size_t i = 0; i < r.n; ++i)
        for (std::size_t j = 0; j < r.n; ++j) b.components.push_back(r.component(i, j).values);
    return b;
}

} // namespace pss
