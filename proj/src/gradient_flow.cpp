#include "eroopt/gradient_flow.hpp"

#include "eroopt/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace eroopt {

std::vector<double> harmonic_scalar(const Mesh& mesh, const DirichletBC& bc) {
    const int n = mesh.n_vertices();
    CSRMatrix A = assemble_form(mesh, FormKind::ScalarStiffness);
    std::vector<double> rhs(n, 0.0);
    A.eliminate_dirichlet(bc.dofs, bc.values, rhs);
    LinearSolverConfig cfg;
    cfg.method = KrylovMethod::CG;
    cfg.precond = PrecondKind::SSOR;
    cfg.rel_tol = 1e-13;
    cfg.max_iter = 20000;
    std::vector<double> x(n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, x, cfg);
    if (!rec.converged)
        throw SolverFailure("harmonic_scalar: CG failed (" + rec.message + ")");
    return x;
}

std::vector<double> lame_coefficient(const Mesh& mesh, double mu_min, double mu_max) {
    DirichletBC bc;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!mesh.vertex_on_boundary[v]) continue;
        bc.dofs.push_back(v);
        bc.values.push_back(mesh.vertex_deformable[v] ? mu_max : mu_min);
    }
    std::vector<double> mu = harmonic_scalar(mesh, bc);
    // The discrete maximum principle can be violated on obtuse triangles;
    // keep the coefficient inside its prescribed range regardless.
    for (double& m : mu) m = std::min(mu_max, std::max(mu_min, m));
    return mu;
}

namespace {

// Dirichlet dofs of the descent space: both components pinned at boundary
// vertices that are not free to move.
DirichletBC descent_space_bc(const Mesh& mesh) {
    DirichletBC bc;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!mesh.vertex_on_boundary[v] || mesh.vertex_deformable[v]) continue;
        bc.dofs.push_back(2 * v);
        bc.values.push_back(0.0);
        bc.dofs.push_back(2 * v + 1);
        bc.values.push_back(0.0);
    }
    return bc;
}

CSRMatrix elasticity_matrix(const Mesh& mesh, const std::vector<double>& mu_star,
                            const DirichletBC& bc) {
    std::vector<double> mu(mu_star.size());
    for (size_t i = 0; i < mu.size(); ++i) mu[i] = std::sqrt(mu_star[i]);
    FormCoefficients coeff;
    coeff.scalar = &mu;
    CSRMatrix A = assemble_form(mesh, FormKind::ElasticityEps, coeff);
    std::vector<double> dummy(A.n_rows, 0.0);
    A.eliminate_dirichlet(bc.dofs, bc.values, dummy);
    return A;
}

struct DesignVertexData {
    std::vector<int> verts;     // design vertices with a valid normal
    std::vector<Vec2> normal;   // averaged unit vertex normal
    std::vector<double> mu;     // lumped boundary measure
};

DesignVertexData design_vertices(const Mesh& mesh) {
    const BoundaryCurvature bc = boundary_curvature(mesh);
    DesignVertexData d;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!mesh.vertex_deformable[v] || !bc.valid[v]) continue;
        d.verts.push_back(v);
        d.normal.push_back(bc.normal[v]);
        d.mu.push_back(bc.mu[v]);
    }
    return d;
}

// Diagonal SPD preconditioner for the saddle system: diag(A) on the primal
// block, lumped Schur estimate mu^2 n^T diag(A)^{-1} n on the multipliers.
class SaddleDiagPrecond : public Preconditioner {
public:
    explicit SaddleDiagPrecond(std::vector<double> d) : d_(std::move(d)) {}
    void apply(const std::vector<double>& r, std::vector<double>& z) const override {
        z.resize(r.size());
        for (size_t i = 0; i < r.size(); ++i) z[i] = r[i] / d_[i];
    }

private:
    std::vector<double> d_;
};

std::vector<double> saddle_minres_correction(const CSRMatrix& A,
                                             const std::vector<double>& rhs_primal,
                                             const DesignVertexData& dv,
                                             const OptimizerSettings& opt,
                                             ConvergenceRecord* record) {
    const int np = A.n_rows;
    const int m = static_cast<int>(dv.verts.size());
    COOBuilder S(np + m, np + m);
    for (int i = 0; i < np; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            S.add(i, A.col_idx[k], A.val[k]);
    for (int r = 0; r < m; ++r) {
        const int v = dv.verts[r];
        const double wx = dv.mu[r] * dv.normal[r].x;
        const double wy = dv.mu[r] * dv.normal[r].y;
        S.add(np + r, 2 * v, wx);
        S.add(np + r, 2 * v + 1, wy);
        S.add(2 * v, np + r, wx);
        S.add(2 * v + 1, np + r, wy);
    }
    const CSRMatrix K = S.to_csr();

    std::vector<double> diag(np + m, 1.0);
    for (int i = 0; i < np; ++i) diag[i] = std::max(A.coeff(i, i), 1e-30);
    for (int r = 0; r < m; ++r) {
        const int v = dv.verts[r];
        const Vec2 nn = dv.normal[r];
        const double sch = dv.mu[r] * dv.mu[r] *
                           (nn.x * nn.x / diag[2 * v] + nn.y * nn.y / diag[2 * v + 1]);
        diag[np + r] = std::max(sch, 1e-30);
    }

    std::vector<double> rhs(np + m, 0.0);
    for (int i = 0; i < np; ++i) rhs[i] = rhs_primal[i];

    LinearSolverConfig cfg;
    cfg.method = KrylovMethod::MINRES;
    cfg.rel_tol = opt.saddle_tol;
    cfg.max_iter = 50000;
    std::vector<double> x(np + m, 0.0);
    const ConvergenceRecord rec = solve_linear(K, rhs, x, cfg, SaddleDiagPrecond(diag));
    if (record) *record = rec;
    if (!rec.converged)
        throw SolverFailure("correct_gradient: MINRES failed (" + rec.message + ")");
    x.resize(np);
    return x;
}

// Null-space reduction: at each constrained design vertex the correction is
// beta_v t_v with t_v = perp(n_v); elsewhere the two components are free.
// Solves the reduced SPD system Z^T A Z y = Z^T rhs with plain CG.
std::vector<double> saddle_nullspace_correction(const CSRMatrix& A,
                                                const std::vector<double>& rhs_primal,
                                                const DesignVertexData& dv,
                                                const OptimizerSettings& opt,
                                                ConvergenceRecord* record) {
    const int np = A.n_rows;
    std::vector<int> tang_row(np / 2, -1);
    for (size_t r = 0; r < dv.verts.size(); ++r) tang_row[dv.verts[r]] = (int)r;

    // reduced dof map: one tangential coefficient per constrained vertex,
    // two components per free vertex
    std::vector<int> red_of_dof(np, -1);
    std::vector<Vec2> tangent(np / 2);
    int nred = 0;
    for (int v = 0; v < np / 2; ++v) {
        if (tang_row[v] >= 0) {
            tangent[v] = perp(dv.normal[tang_row[v]]);
            red_of_dof[2 * v] = nred++;
            red_of_dof[2 * v + 1] = -2;  // folded into the tangential dof
        } else {
            red_of_dof[2 * v] = nred++;
            red_of_dof[2 * v + 1] = nred++;
        }
    }
    auto expand = [&](const std::vector<double>& y, std::vector<double>& x) {
        x.assign(np, 0.0);
        for (int v = 0; v < np / 2; ++v) {
            if (tang_row[v] >= 0) {
                const double beta = y[red_of_dof[2 * v]];
                x[2 * v] = beta * tangent[v].x;
                x[2 * v + 1] = beta * tangent[v].y;
            } else {
                x[2 * v] = y[red_of_dof[2 * v]];
                x[2 * v + 1] = y[red_of_dof[2 * v + 1]];
            }
        }
    };
    auto reduce = [&](const std::vector<double>& x, std::vector<double>& y) {
        y.assign(nred, 0.0);
        for (int v = 0; v < np / 2; ++v) {
            if (tang_row[v] >= 0) {
                y[red_of_dof[2 * v]] =
                    tangent[v].x * x[2 * v] + tangent[v].y * x[2 * v + 1];
            } else {
                y[red_of_dof[2 * v]] = x[2 * v];
                y[red_of_dof[2 * v + 1]] = x[2 * v + 1];
            }
        }
    };
    auto apply = [&](const std::vector<double>& y, std::vector<double>& out) {
        std::vector<double> x;
        expand(y, x);
        reduce(A.matvec(x), out);
    };

    std::vector<double> bred;
    reduce(rhs_primal, bred);
    double bnorm = 0.0;
    for (double v : bred) bnorm += v * v;
    bnorm = std::sqrt(bnorm);

    std::vector<double> y(nred, 0.0), r = bred, p = bred, ap(nred);
    double rr = bnorm * bnorm;
    ConvergenceRecord rec;
    const double tol = std::max(opt.saddle_tol * bnorm, 1e-300);
    int it = 0;
    for (; it < 50000 && std::sqrt(rr) > tol; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (int i = 0; i < nred; ++i) pap += p[i] * ap[i];
        if (pap <= 0.0) {
            rec.breakdown = true;
            rec.message = "reduced CG breakdown";
            break;
        }
        const double alpha = rr / pap;
        for (int i = 0; i < nred; ++i) {
            y[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_new = 0.0;
        for (int i = 0; i < nred; ++i) rr_new += r[i] * r[i];
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int i = 0; i < nred; ++i) p[i] = r[i] + beta * p[i];
    }
    rec.iterations = it;
    rec.rel_residual = bnorm > 0.0 ? std::sqrt(rr) / bnorm : 0.0;
    rec.converged = !rec.breakdown && std::sqrt(rr) <= tol;
    if (record) *record = rec;
    if (!rec.converged)
        throw SolverFailure("correct_gradient: reduced CG failed");
    std::vector<double> x;
    expand(y, x);
    return x;
}

} // namespace

std::vector<double> project_gradient(const Mesh& mesh,
                                     const std::vector<double>& mu_star,
                                     const std::vector<double>& b,
                                     const OptimizerSettings& /*opt*/,
                                     ConvergenceRecord* record) {
    const int n = mesh.n_vertices();
    if (b.size() != static_cast<size_t>(2 * n))
        throw std::invalid_argument("project_gradient: bad rhs size");
    const DirichletBC bc = descent_space_bc(mesh);
    const CSRMatrix A = elasticity_matrix(mesh, mu_star, bc);
    std::vector<double> rhs = b;
    for (int d : bc.dofs) rhs[d] = 0.0;

    LinearSolverConfig cfg;
    cfg.method = KrylovMethod::CG;
    cfg.precond = PrecondKind::SSOR;
    cfg.rel_tol = 1e-13;
    cfg.max_iter = 50000;
    std::vector<double> G(2 * n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, G, cfg);
    if (record) *record = rec;
    if (!rec.converged)
        throw SolverFailure("project_gradient: CG failed (" + rec.message + ")");
    for (int d : bc.dofs) G[d] = 0.0;  // keep pinned vertices bitwise zero
    return G;
}

std::vector<double> correct_gradient(const Mesh& mesh,
                                     const std::vector<double>& mu_star,
                                     const std::vector<double>& G,
                                     const OptimizerSettings& opt,
                                     ConvergenceRecord* record) {
    const DirichletBC bc = descent_space_bc(mesh);
    const CSRMatrix A = elasticity_matrix(mesh, mu_star, bc);
    std::vector<double> rhs = A.matvec(G);
    for (int d : bc.dofs) rhs[d] = 0.0;

    const DesignVertexData dv = design_vertices(mesh);
    std::vector<double> Pi =
        opt.saddle_minres
            ? saddle_minres_correction(A, rhs, dv, opt, record)
            : saddle_nullspace_correction(A, rhs, dv, opt, record);
    for (int d : bc.dofs) Pi[d] = 0.0;
    return Pi;
}

double design_boundary_norm(const Mesh& mesh, const std::vector<double>& G) {
    double s = 0.0;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (!bf.deformable) continue;
        const double ga = G[2 * bf.v[0]] * G[2 * bf.v[0]] +
                          G[2 * bf.v[0] + 1] * G[2 * bf.v[0] + 1];
        const double gb = G[2 * bf.v[1]] * G[2 * bf.v[1]] +
                          G[2 * bf.v[1] + 1] * G[2 * bf.v[1] + 1];
        s += 0.5 * mesh.facet_len[f] * (ga + gb);
    }
    return std::sqrt(s);
}

double design_normal_norm(const Mesh& mesh, const std::vector<double>& G) {
    const DesignVertexData dv = design_vertices(mesh);
    double s = 0.0;
    for (size_t r = 0; r < dv.verts.size(); ++r) {
        const int v = dv.verts[r];
        const double gn =
            dv.normal[r].x * G[2 * v] + dv.normal[r].y * G[2 * v + 1];
        s += dv.mu[r] * gn * gn;
    }
    return std::sqrt(s);
}

} // namespace eroopt
