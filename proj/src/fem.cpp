#include "eroopt/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace eroopt {

const double TriQuadrature::bary[TriQuadrature::n][3] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
    {0.6, 0.2, 0.2},
    {0.2, 0.6, 0.2},
    {0.2, 0.2, 0.6},
};
const double TriQuadrature::weight[TriQuadrature::n] = {
    -27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0};

const double EdgeQuadrature::s[EdgeQuadrature::n] = {
    0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
const double EdgeQuadrature::weight[EdgeQuadrature::n] = {0.5, 0.5};

CSRMatrix assemble_form(const Mesh& mesh, FormKind kind,
                        const FormCoefficients& coeff) {
    const int nv = mesh.n_vertices();
    const bool vector_valued = (kind == FormKind::VectorMass ||
                                kind == FormKind::VectorStiffness ||
                                kind == FormKind::ElasticityEps);
    const int ndof = vector_valued ? 2 * nv : nv;
    COOBuilder B(ndof, ndof);

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& v = mesh.cells[c];
        const double A = mesh.area[c];
        const Vec2* g = mesh.grad[c].data();

        switch (kind) {
            case FormKind::ScalarMass: {
                for (int q = 0; q < TriQuadrature::n; ++q) {
                    const double w = TriQuadrature::weight[q] * A * coeff.constant;
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j)
                            B.add(v[i], v[j],
                                  w * TriQuadrature::bary[q][i] * TriQuadrature::bary[q][j]);
                }
                break;
            }
            case FormKind::ScalarStiffness: {
                double k = coeff.constant;
                if (coeff.scalar) {
                    // cell-average of the P1 coefficient
                    k *= ((*coeff.scalar)[v[0]] + (*coeff.scalar)[v[1]] +
                          (*coeff.scalar)[v[2]]) / 3.0;
                }
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        B.add(v[i], v[j], k * A * dot(g[i], g[j]));
                break;
            }
            case FormKind::ScalarAdvectionDiv: {
                if (!coeff.vector)
                    throw std::runtime_error("assemble_form: advection needs a vector field");
                const Mat2 Jw = vector_jacobian(mesh, *coeff.vector, c);
                const double divw = trace(Jw);
                for (int q = 0; q < TriQuadrature::n; ++q) {
                    const double w = TriQuadrature::weight[q] * A * coeff.constant;
                    const Vec2 wq = eval_vector(mesh, *coeff.vector, c,
                                                TriQuadrature::bary[q]);
                    for (int i = 0; i < 3; ++i) {
                        const double phi_i = TriQuadrature::bary[q][i];
                        for (int j = 0; j < 3; ++j) {
                            // div(u w) tested against phi_i with u = phi_j:
                            // (w . grad phi_j + phi_j div w) phi_i
                            const double adv = dot(wq, g[j]) +
                                               TriQuadrature::bary[q][j] * divw;
                            B.add(v[i], v[j], w * adv * phi_i);
                        }
                    }
                }
                break;
            }
            case FormKind::VectorMass: {
                for (int q = 0; q < TriQuadrature::n; ++q) {
                    const double w = TriQuadrature::weight[q] * A * coeff.constant;
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) {
                            const double m =
                                w * TriQuadrature::bary[q][i] * TriQuadrature::bary[q][j];
                            B.add(2 * v[i], 2 * v[j], m);
                            B.add(2 * v[i] + 1, 2 * v[j] + 1, m);
                        }
                }
                break;
            }
            case FormKind::VectorStiffness: {
                double k = coeff.constant;
                if (coeff.scalar)
                    k *= ((*coeff.scalar)[v[0]] + (*coeff.scalar)[v[1]] +
                          (*coeff.scalar)[v[2]]) / 3.0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        const double m = k * A * dot(g[i], g[j]);
                        B.add(2 * v[i], 2 * v[j], m);
                        B.add(2 * v[i] + 1, 2 * v[j] + 1, m);
                    }
                break;
            }
            case FormKind::ElasticityEps: {
                // (2 mu eps(u), eps(v)) with mu evaluated at quadrature points
                // from its P1 interpolant.
                for (int q = 0; q < TriQuadrature::n; ++q) {
                    double mu = coeff.constant;
                    if (coeff.scalar)
                        mu *= eval_scalar(mesh, *coeff.scalar, c, TriQuadrature::bary[q]);
                    const double w = 2.0 * mu * TriQuadrature::weight[q] * A;
                    for (int i = 0; i < 3; ++i)
                        for (int k2 = 0; k2 < 2; ++k2)
                            for (int j = 0; j < 3; ++j)
                                for (int l = 0; l < 2; ++l) {
                                    // eps(phi_j e_l) : eps(phi_i e_k2)
                                    const double gi[2] = {g[i].x, g[i].y};
                                    const double gj[2] = {g[j].x, g[j].y};
                                    double e = 0.0;
                                    for (int a = 0; a < 2; ++a)
                                        for (int b = 0; b < 2; ++b) {
                                            const double eu =
                                                0.5 * ((l == a ? gj[b] : 0.0) +
                                                       (l == b ? gj[a] : 0.0));
                                            const double ev =
                                                0.5 * ((k2 == a ? gi[b] : 0.0) +
                                                       (k2 == b ? gi[a] : 0.0));
                                            e += eu * ev;
                                        }
                                    B.add(2 * v[i] + k2, 2 * v[j] + l, w * e);
                                }
                }
                break;
            }
        }
    }
    return B.to_csr();
}

double l2_norm_scalar(const Mesh& mesh, const std::vector<double>& f) {
    double s = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int q = 0; q < TriQuadrature::n; ++q) {
            const double fq = eval_scalar(mesh, f, c, TriQuadrature::bary[q]);
            s += TriQuadrature::weight[q] * mesh.area[c] * fq * fq;
        }
    return std::sqrt(std::max(s, 0.0));
}

double l2_norm_vector(const Mesh& mesh, const std::vector<double>& f) {
    double s = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int q = 0; q < TriQuadrature::n; ++q) {
            const Vec2 fq = eval_vector(mesh, f, c, TriQuadrature::bary[q]);
            s += TriQuadrature::weight[q] * mesh.area[c] * dot(fq, fq);
        }
    return std::sqrt(std::max(s, 0.0));
}

} // namespace eroopt
