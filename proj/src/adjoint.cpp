#include "eroopt/adjoint.hpp"

#include <cmath>
#include <stdexcept>

namespace eroopt {

Vec2 drag_sensitivity_uf(const Vec2& uf, const Vec2& up, const Vec2& zup,
                         double drag_c) {
    const Vec2 slip = up - uf;
    const double s = std::max(norm(slip), 1e-10);
    const double dsn = drag_coefficient(particle_reynolds(drag_c, s));
    // d d_SN / d u_f = -grad_w d_SN (w = slip); see drag_coefficient_gradient.
    const Vec2 ddsn_duf = -1.0 * drag_coefficient_gradient(drag_c, slip);
    return dot(slip, zup) * ddsn_duf - dsn * zup;
}

Vec2 drag_sensitivity_up(const Vec2& uf, const Vec2& up, const Vec2& zup,
                         double drag_c) {
    // Exact antisymmetry: d(dtilde)/d(u_p) = -d(dtilde)/d(u_f).
    return -1.0 * drag_sensitivity_uf(uf, up, zup, drag_c);
}

namespace {

LinearSolverConfig adjoint_lcfg(const SolverSettings& solver) {
    LinearSolverConfig lcfg;
    lcfg.method = KrylovMethod::GMRES;
    lcfg.precond = solver.precond;
    lcfg.rel_tol = solver.linear_rel_tol;
    lcfg.max_iter = solver.linear_max_iter;
    lcfg.restart = solver.gmres_restart;
    return lcfg;
}

std::vector<int> dirichlet_dofs_transport(const Mesh& mesh,
                                          const PhysicsParams& phys,
                                          const ForwardState& fwd) {
    return volume_fraction_dirichlet(mesh, phys, fwd.partition).dofs;
}

std::vector<int> dirichlet_dofs_particle(const Mesh& mesh) {
    std::vector<char> is_in(mesh.n_vertices(), 0);
    for (const auto& bf : mesh.facets)
        if (bf.role == BoundaryRole::Inflow) is_in[bf.v[0]] = is_in[bf.v[1]] = 1;
    std::vector<int> dofs;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (is_in[v]) {
            dofs.push_back(2 * v);
            dofs.push_back(2 * v + 1);
        }
    return dofs;
}

CSRMatrix eliminated(CSRMatrix A, const std::vector<int>& dofs) {
    std::vector<double> dummy_rhs(A.n_rows, 0.0);
    const std::vector<double> zeros(dofs.size(), 0.0);
    A.eliminate_dirichlet(dofs, zeros, dummy_rhs);
    return A;
}

} // namespace

CSRMatrix forward_transport_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                   const SolverSettings& solver,
                                   const ForwardState& fwd) {
    COOBuilder B(mesh.n_vertices(), mesh.n_vertices());
    assemble_transport(mesh, phys, solver, fwd.up, nullptr, &B, nullptr);
    return eliminated(B.to_csr(), dirichlet_dofs_transport(mesh, phys, fwd));
}

CSRMatrix forward_particle_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                  const SolverSettings& solver,
                                  const ForwardState& fwd) {
    const int n = mesh.n_vertices();
    COOBuilder B(2 * n, 2 * n);
    assemble_particle_momentum(mesh, phys, solver, fwd.up, fwd.flow.u,
                               1.0 / phys.k_perm, nullptr, &B, nullptr);
    return eliminated(B.to_csr(), dirichlet_dofs_particle(mesh));
}

CSRMatrix forward_fluid_matrix(const Mesh& mesh, const PhysicsParams& phys,
                               const SolverSettings& solver,
                               const ForwardState& fwd) {
    const int n = mesh.n_vertices();
    COOBuilder B(3 * n, 3 * n);
    assemble_navier_stokes(mesh, phys, solver, fwd.flow.u, fwd.flow.p, true,
                           nullptr, &B);
    return eliminated(B.to_csr(), flow_dirichlet(mesh, phys.mean_inflow).dofs);
}

CSRMatrix adjoint_transport_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                   const SolverSettings& solver,
                                   const ForwardState& fwd) {
    return forward_transport_matrix(mesh, phys, solver, fwd).transposed();
}
CSRMatrix adjoint_particle_matrix(const Mesh& mesh, const PhysicsParams& phys,
                                  const SolverSettings& solver,
                                  const ForwardState& fwd) {
    return forward_particle_matrix(mesh, phys, solver, fwd).transposed();
}
CSRMatrix adjoint_fluid_matrix(const Mesh& mesh, const PhysicsParams& phys,
                               const SolverSettings& solver,
                               const ForwardState& fwd) {
    return forward_fluid_matrix(mesh, phys, solver, fwd).transposed();
}

void solve_adjoint_transport(const Mesh& mesh, const PhysicsParams& phys,
                             const ErosionParams& eros,
                             const SolverSettings& solver,
                             const ForwardState& fwd, AdjointState& adj) {
    const int n = mesh.n_vertices();
    const CSRMatrix A = adjoint_transport_matrix(mesh, phys, solver, fwd);

    std::vector<double> dJ_da, dJ_dup;
    erosion_cost_gradients(mesh, fwd.alpha, fwd.up, eros, dJ_da, dJ_dup);
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -dJ_da[i];
    for (int d : dirichlet_dofs_transport(mesh, phys, fwd)) rhs[d] = 0.0;

    adj.z_alpha.assign(n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, adj.z_alpha, adjoint_lcfg(solver));
    if (!rec.converged)
        throw SolverFailure("solve_adjoint_transport: linear solver failed (" +
                            rec.message + ")");
    adj.transport_done = true;
    if (solver.export_matrices)
        A.write_matrix_market(solver.debug_dir + "/adjoint_transport.mtx");
}

void solve_adjoint_particle(const Mesh& mesh, const PhysicsParams& phys,
                            const ErosionParams& eros,
                            const SolverSettings& solver,
                            const ForwardState& fwd, AdjointState& adj) {
    if (!adj.transport_done)
        throw std::logic_error(
            "solve_adjoint_particle: adjoint transport must be solved first");
    const int n = mesh.n_vertices();
    const CSRMatrix A = adjoint_particle_matrix(mesh, phys, solver, fwd);

    // RHS = -dJ/du_p - (dR_alpha/du_p)^T z_alpha.
    std::vector<double> dJ_da, dJ_dup;
    erosion_cost_gradients(mesh, fwd.alpha, fwd.up, eros, dJ_da, dJ_dup);
    COOBuilder Bx(n, 2 * n);
    assemble_transport(mesh, phys, solver, fwd.up, &fwd.alpha, nullptr, &Bx);
    const CSRMatrix Across = Bx.to_csr();
    // z_alpha is zero at constrained transport rows, so no row filtering is
    // needed before the transpose product.
    std::vector<double> coupling(2 * n, 0.0);
    for (int r = 0; r < Across.n_rows; ++r) {
        const double za = adj.z_alpha[r];
        if (za == 0.0) continue;
        for (int k = Across.row_ptr[r]; k < Across.row_ptr[r + 1]; ++k)
            coupling[Across.col_idx[k]] += Across.val[k] * za;
    }
    std::vector<double> rhs(2 * n);
    for (int i = 0; i < 2 * n; ++i) rhs[i] = -dJ_dup[i] - coupling[i];
    for (int d : dirichlet_dofs_particle(mesh)) rhs[d] = 0.0;

    adj.z_up.assign(2 * n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, adj.z_up, adjoint_lcfg(solver));
    if (!rec.converged)
        throw SolverFailure("solve_adjoint_particle: linear solver failed (" +
                            rec.message + ")");
    adj.particle_done = true;
}

void solve_adjoint_fluid(const Mesh& mesh, const PhysicsParams& phys,
                         const SolverSettings& solver, const ForwardState& fwd,
                         AdjointState& adj) {
    if (!adj.particle_done)
        throw std::logic_error(
            "solve_adjoint_fluid: adjoint particle velocity must be solved first");
    const int n = mesh.n_vertices();
    const CSRMatrix A = adjoint_fluid_matrix(mesh, phys, solver, fwd);

    // RHS velocity block = -(dR_up/du_f)^T z_up; pressure block = 0.
    COOBuilder Bx(2 * n, 2 * n);
    assemble_particle_momentum(mesh, phys, solver, fwd.up, fwd.flow.u,
                               1.0 / phys.k_perm, nullptr, nullptr, &Bx);
    const CSRMatrix Across = Bx.to_csr();
    std::vector<double> rhs(3 * n, 0.0);
    // Rows of Across at constrained u_p dofs correspond to replaced forward
    // equations; z_up vanishes there, so the plain transpose product is exact.
    for (int r = 0; r < Across.n_rows; ++r) {
        const double z = adj.z_up[r];
        if (z == 0.0) continue;
        for (int k = Across.row_ptr[r]; k < Across.row_ptr[r + 1]; ++k)
            rhs[Across.col_idx[k]] -= Across.val[k] * z;
    }
    for (int d : flow_dirichlet(mesh, phys.mean_inflow).dofs) rhs[d] = 0.0;

    std::vector<double> z(3 * n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, z, adjoint_lcfg(solver));
    if (!rec.converged)
        throw SolverFailure("solve_adjoint_fluid: linear solver failed (" +
                            rec.message + ")");
    adj.z_uf.assign(z.begin(), z.begin() + 2 * n);
    adj.z_p.assign(z.begin() + 2 * n, z.end());
    adj.fluid_done = true;
}

AdjointState solve_adjoint(const Mesh& mesh, const PhysicsParams& phys,
                           const ErosionParams& eros,
                           const SolverSettings& solver,
                           const ForwardState& fwd) {
    AdjointState adj;
    solve_adjoint_transport(mesh, phys, eros, solver, fwd, adj);
    solve_adjoint_particle(mesh, phys, eros, solver, fwd, adj);
    solve_adjoint_fluid(mesh, phys, solver, fwd, adj);
    return adj;
}

} // namespace eroopt
