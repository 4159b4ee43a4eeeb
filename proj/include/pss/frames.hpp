#ifndef PSS_FRAMES_HPP
#define PSS_FRAMES_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "pss/field_io.hpp"
#include "pss/grid.hpp"
#include "pss/lie.hpp"

namespace pss {

// Dual forms omega_i and connection forms omega_ij = <de_i, e_j> of an
// orthonormal frame e_1..e_n.
struct FrameData {
    GridChart chart;
    std::vector<OneFormField> omega;
    ConnectionField W;

    FrameData() = default;
    FrameData(const GridChart& c, std::size_t n);

    std::size_t n() const { return omega.size(); }
    // F(i, k) = coefficient of dx_k in omega_i.
    Matrix coefficient_matrix(std::size_t node) const;
    // Largest coefficient magnitude over all forms and nodes.
    double max_coefficient() const;
};

// Pointwise orthogonal L relating a frame e to v_i = sum_j L_ij e_j. In 2D an
// angle field phi may be carried alongside, with L = [[cos, -sin], [sin, cos]].
struct FrameRotationField {
    GridChart chart;
    std::size_t n = 0;
    std::vector<double> entries;  // n*n per node, row-major
    std::optional<ScalarField> phi;

    FrameRotationField() = default;
    FrameRotationField(const GridChart& c, std::size_t n);

    static FrameRotationField identity(const GridChart& c, std::size_t n);
    static FrameRotationField constant(const GridChart& c, const Matrix& l);
    static FrameRotationField from_angle(const ScalarField& phi);

    Matrix at(std::size_t node) const;
    void set(std::size_t node, const Matrix& l);
    ScalarField component(std::size_t i, std::size_t j) const;
    double orthogonality_residual() const;
};

class DegenerateFrameError : public std::runtime_error {
public:
    DegenerateFrameError(const std::string& what, std::size_t nodes)
        : std::runtime_error(what), degenerate_nodes(nodes) {}
    std::size_t degenerate_nodes;
};

// theta_i = sum_j L_ij omega_j, theta_ij = (dL L^t)_ij + (L W L^t)_ij with dL by
// finite differences. Throws std::invalid_argument when R is not orthogonal
// within orth_tolerance.
FrameData frame_change(const FrameData& fd, const FrameRotationField& r, double orth_tolerance = 1e-10);

// Nodes with |det F| > threshold * (max |F|)^n. 1 = nondegenerate.
std::vector<char> nondegenerate_mask(const FrameData& fd, double rel_threshold);

struct StructureResiduals {
    double res1 = 0.0;  // max |d omega_i - sum_j omega_j ^ omega_ji|
    double res2 = 0.0;  // max |d omega_ij - sum_k omega_ik ^ omega_kj + K omega_i ^ omega_j|
    Norms norms1, norms2;
    std::size_t masked_nodes = 0;
};

// Residual norms over interior, nondegenerate nodes.
StructureResiduals structure_residuals(const FrameData& fd, double curvature, double rel_threshold = 1e-8);

// Max over nodes of all coefficients of theta_1i + theta_i (i >= 2) and
// theta_ij (2 <= i < j).
double special_frame_residual(const FrameData& fd);

// e_i with omega_j(e_i) = delta_ij; result[i].comps[k] is the d/dx_k component.
std::vector<VectorField> frame_vector_fields(const FrameData& fd, double rel_threshold = 1e-8);

// Components ordered omega_1..omega_n then omega_ij (i < j, row-major), each
// form contributing its n coefficients in axis order.
FieldBundle bundle_of(const FrameData& fd);
FrameData frame_of(const FieldBundle& b);

FieldBundle bundle_of(const FrameRotationField& r);

} // namespace pss

#endif // PSS_FRAMES_HPP
