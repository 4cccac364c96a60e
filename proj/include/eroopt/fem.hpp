// P1 finite-element machinery: quadrature rules, field evaluation helpers and
// the generic weak-form assembler used by tests and by the physics solvers.
//
// Fields are plain dof vectors: scalars have one entry per vertex, vector
// fields are interleaved (component c of vertex i lives at 2*i + c).
#pragma once

#include "eroopt/mesh.hpp"
#include "eroopt/sparse.hpp"

#include <vector>

namespace eroopt {

// Degree-3 triangle rule (4 points, one negative weight); weights sum to 1
// and are applied as w * area.
struct TriQuadrature {
    static constexpr int n = 4;
    // Barycentric coordinates and weights.
    static const double bary[n][3];
    static const double weight[n];
};

// Two-point Gauss rule on an edge, degree 3; weights sum to 1 (times length).
struct EdgeQuadrature {
    static constexpr int n = 2;
    static const double s[n];       // position in [0,1] along the edge
    static const double weight[n];
};

// -- field evaluation -------------------------------------------------------

inline double eval_scalar(const Mesh& m, const std::vector<double>& f, int cell,
                          const double bary[3]) {
    const auto& v = m.cells[cell];
    return bary[0] * f[v[0]] + bary[1] * f[v[1]] + bary[2] * f[v[2]];
}

inline Vec2 eval_vector(const Mesh& m, const std::vector<double>& f, int cell,
                        const double bary[3]) {
    const auto& v = m.cells[cell];
    Vec2 r;
    for (int k = 0; k < 3; ++k) {
        r.x += bary[k] * f[2 * v[k]];
        r.y += bary[k] * f[2 * v[k] + 1];
    }
    return r;
}

// Constant P1 gradient of a scalar field on a cell.
inline Vec2 scalar_gradient(const Mesh& m, const std::vector<double>& f, int cell) {
    const auto& v = m.cells[cell];
    Vec2 g;
    for (int k = 0; k < 3; ++k) g += f[v[k]] * m.grad[cell][k];
    return g;
}

// Constant P1 Jacobian of a vector field on a cell: J(r,c) = d u_r / d x_c.
inline Mat2 vector_jacobian(const Mesh& m, const std::vector<double>& f, int cell) {
    const auto& v = m.cells[cell];
    Mat2 J;
    for (int k = 0; k < 3; ++k) {
        const Vec2 g = m.grad[cell][k];
        J(0, 0) += f[2 * v[k]] * g.x;
        J(0, 1) += f[2 * v[k]] * g.y;
        J(1, 0) += f[2 * v[k] + 1] * g.x;
        J(1, 1) += f[2 * v[k] + 1] * g.y;
    }
    return J;
}

// -- generic forms (contract surface for tests; the physics solvers assemble
//    their coupled systems directly for speed) ------------------------------

enum class FormKind {
    ScalarMass,         // (u, v)
    ScalarStiffness,    // (coeff * grad u, grad v), coeff piecewise from field
    ScalarAdvectionDiv, // (div(u * w), v) with w a given vector field
    VectorMass,         // (u, v) vector fields
    VectorStiffness,    // (coeff * Du, Dv)
    ElasticityEps,      // (2 mu eps(u), eps(v)), mu P1 scalar field
};

struct FormCoefficients {
    const std::vector<double>* scalar = nullptr;  // P1 field (mu, diffusion...)
    double constant = 1.0;
    const std::vector<double>* vector = nullptr;  // P1 vector field (advection)
};

// Assemble the bilinear form into a square CSR matrix (scalar forms: n dofs,
// vector forms: 2n dofs).
CSRMatrix assemble_form(const Mesh& mesh, FormKind kind,
                        const FormCoefficients& coeff = FormCoefficients());

// L2 norm of a P1 scalar/vector field over the mesh.
double l2_norm_scalar(const Mesh& mesh, const std::vector<double>& f);
double l2_norm_vector(const Mesh& mesh, const std::vector<double>& f);

} // namespace eroopt
