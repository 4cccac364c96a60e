#include "eroopt/flow.hpp"

#include <algorithm>
#include <cmath>

namespace eroopt {

std::vector<double> inflow_profile(const Mesh& mesh, double mean_speed) {
    std::vector<double> u(2 * mesh.n_vertices(), 0.0);
    // Collect inlet vertices and the averaged outward normal.
    std::vector<int> verts;
    std::vector<char> seen(mesh.n_vertices(), 0);
    Vec2 n_avg;
    Vec2 t_ref;
    bool found = false;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role != BoundaryRole::Inflow) continue;
        if (!found) {
            t_ref = normalized(mesh.X[bf.v[1]] - mesh.X[bf.v[0]]);
            found = true;
        }
        n_avg += mesh.facet_normal[f] * mesh.facet_len[f];
        for (int k = 0; k < 2; ++k)
            if (!seen[bf.v[k]]) {
                seen[bf.v[k]] = 1;
                verts.push_back(bf.v[k]);
            }
    }
    if (!found) throw std::runtime_error("inflow_profile: mesh has no inflow facets");
    const Vec2 dir = -normalized(n_avg);  // inward
    // Arclength coordinate across the (straight) inlet segment.
    double smin = 1e300, smax = -1e300;
    const Vec2 x0 = mesh.X[verts[0]];
    for (int v : verts) {
        const double s = dot(mesh.X[v] - x0, t_ref);
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    const double width = smax - smin;
    if (width <= 0.0) throw std::runtime_error("inflow_profile: degenerate inlet");
    for (int v : verts) {
        const double xi = (dot(mesh.X[v] - x0, t_ref) - smin) / width;
        const double mag = 6.0 * mean_speed * xi * (1.0 - xi);
        u[2 * v] = mag * dir.x;
        u[2 * v + 1] = mag * dir.y;
    }
    return u;
}

DirichletBC flow_dirichlet(const Mesh& mesh, double mean_inflow) {
    const std::vector<double> uin = inflow_profile(mesh, mean_inflow);
    std::vector<char> is_wall(mesh.n_vertices(), 0), is_in(mesh.n_vertices(), 0);
    for (const auto& bf : mesh.facets) {
        if (bf.role == BoundaryRole::Wall) {
            is_wall[bf.v[0]] = is_wall[bf.v[1]] = 1;
        } else if (bf.role == BoundaryRole::Inflow) {
            is_in[bf.v[0]] = is_in[bf.v[1]] = 1;
        }
    }
    DirichletBC bc;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!is_wall[v] && !is_in[v]) continue;
        // Wall no-slip wins at junctions; the parabolic profile is zero there
        // anyway, so the two prescriptions agree.
        const double ux = is_wall[v] && !is_in[v] ? 0.0 : uin[2 * v];
        const double uy = is_wall[v] && !is_in[v] ? 0.0 : uin[2 * v + 1];
        bc.dofs.push_back(2 * v);
        bc.values.push_back(is_wall[v] && is_in[v] ? 0.0 : ux);
        bc.dofs.push_back(2 * v + 1);
        bc.values.push_back(is_wall[v] && is_in[v] ? 0.0 : uy);
    }
    return bc;
}

void assemble_navier_stokes(const Mesh& mesh, const PhysicsParams& phys,
                            const SolverSettings& solver,
                            const std::vector<double>& u,
                            const std::vector<double>& p,
                            bool include_convection,
                            std::vector<double>* residual, COOBuilder* jacobian) {
    const int n = mesh.n_vertices();
    const double nu = 1.0 / phys.re;
    const double invfr2 = phys.inv_fr2();
    const Vec2 grav = invfr2 * Vec2(phys.g_dir_x, phys.g_dir_y);
    const int poff = 2 * n;

    if (residual) residual->assign(3 * n, 0.0);

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& v = mesh.cells[c];
        const double A = mesh.area[c];
        const Vec2* g = mesh.grad[c].data();
        const double h = mesh.hcell[c];
        const double tau = stab_tau(nu, h, solver.u_stab);
        const double dlsic = 0.5 * solver.u_stab * h;

        const Mat2 Ju = vector_jacobian(mesh, u, c);
        const double divu = trace(Ju);
        const Vec2 gradp = scalar_gradient(mesh, p, c);
        const double pbar = (p[v[0]] + p[v[1]] + p[v[2]]) / 3.0;

        // --- residual ------------------------------------------------------
        if (residual) {
            std::vector<double>& R = *residual;
            for (int q = 0; q < TriQuadrature::n; ++q) {
                const double* b = TriQuadrature::bary[q];
                const double w = TriQuadrature::weight[q] * A;
                const Vec2 uq = eval_vector(mesh, u, c, b);
                Vec2 rm = gradp - grav;  // strong momentum residual (P1: no Laplacian)
                if (include_convection) rm += Ju * uq;
                for (int i = 0; i < 3; ++i) {
                    const Vec2 conv = include_convection ? Ju * uq : Vec2();
                    // Galerkin momentum: convection + gravity (value terms)
                    R[2 * v[i]] += w * (conv.x - grav.x) * b[i];
                    R[2 * v[i] + 1] += w * (conv.y - grav.y) * b[i];
                    // SUPG (momentum) and PSPG (continuity) residual tests
                    if (include_convection) {
                        const double adv_i = dot(uq, g[i]);
                        R[2 * v[i]] += w * tau * rm.x * adv_i;
                        R[2 * v[i] + 1] += w * tau * rm.y * adv_i;
                    }
                    R[poff + v[i]] += w * tau * dot(rm, g[i]);
                }
            }
            for (int i = 0; i < 3; ++i) {
                // constant-integrand parts: diffusion, pressure, continuity, LSIC
                R[2 * v[i]] += A * (nu * (Ju(0, 0) * g[i].x + Ju(0, 1) * g[i].y) -
                                    pbar * g[i].x + dlsic * divu * g[i].x);
                R[2 * v[i] + 1] += A * (nu * (Ju(1, 0) * g[i].x + Ju(1, 1) * g[i].y) -
                                        pbar * g[i].y + dlsic * divu * g[i].y);
                R[poff + v[i]] += A * divu / 3.0;
            }
        }

        // --- Jacobian ------------------------------------------------------
        if (jacobian) {
            COOBuilder& J = *jacobian;
            // constant-integrand parts
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const double lap = nu * A * dot(g[i], g[j]);
                    for (int k = 0; k < 2; ++k) {
                        J.add(2 * v[i] + k, 2 * v[j] + k, lap);
                        // LSIC: d(div u)/du_{jl} = g_j[l]
                        const double gik = (k == 0) ? g[i].x : g[i].y;
                        J.add(2 * v[i] + k, 2 * v[j], dlsic * A * gik * g[j].x);
                        J.add(2 * v[i] + k, 2 * v[j] + 1, dlsic * A * gik * g[j].y);
                        // pressure gradient: -(A/3) g_i[k] per p_j
                        J.add(2 * v[i] + k, poff + v[j], -(A / 3.0) * gik);
                        // continuity: (A/3) g_j[k] per u_{jk}
                        J.add(poff + v[i], 2 * v[j] + k, (A / 3.0) * ((k == 0) ? g[j].x : g[j].y));
                    }
                }
            }
            // quadrature parts
            for (int q = 0; q < TriQuadrature::n; ++q) {
                const double* b = TriQuadrature::bary[q];
                const double w = TriQuadrature::weight[q] * A;
                const Vec2 uq = eval_vector(mesh, u, c, b);
                Vec2 rm = gradp - grav;
                if (include_convection) rm += Ju * uq;
                for (int i = 0; i < 3; ++i) {
                    const double adv_i = include_convection ? dot(uq, g[i]) : 0.0;
                    for (int j = 0; j < 3; ++j) {
                        for (int l = 0; l < 2; ++l) {
                            // d r_m / d u_{jl} = (g_j . u_q) e_l + phi_j Ju[:,l]
                            Vec2 drm;
                            if (include_convection) {
                                drm = Vec2(Ju(0, l) * b[j], Ju(1, l) * b[j]);
                                if (l == 0) drm.x += dot(g[j], uq);
                                else drm.y += dot(g[j], uq);
                            }
                            if (include_convection) {
                                // Galerkin convection (tested with phi_i e_k = e_l rows)
                                J.add(2 * v[i], 2 * v[j] + l, w * drm.x * b[i]);
                                J.add(2 * v[i] + 1, 2 * v[j] + l, w * drm.y * b[i]);
                                // SUPG: tau (d r_m . e_k)(u . g_i) + tau r_m_k (phi_j g_i[l])
                                const double dtest = b[j] * ((l == 0) ? g[i].x : g[i].y);
                                J.add(2 * v[i], 2 * v[j] + l,
                                      w * tau * (drm.x * adv_i + rm.x * dtest));
                                J.add(2 * v[i] + 1, 2 * v[j] + l,
                                      w * tau * (drm.y * adv_i + rm.y * dtest));
                            }
                            // PSPG
                            const double dpspg = include_convection ? dot(drm, g[i]) : 0.0;
                            if (include_convection)
                                J.add(poff + v[i], 2 * v[j] + l, w * tau * dpspg);
                        }
                        // pressure contribution to r_m: d r_m / d p_j = g_j
                        if (include_convection) {
                            J.add(2 * v[i], poff + v[j], w * tau * g[j].x * adv_i);
                            J.add(2 * v[i] + 1, poff + v[j], w * tau * g[j].y * adv_i);
                        }
                        J.add(poff + v[i], poff + v[j], w * tau * dot(g[j], g[i]));
                    }
                }
            }
        }
    }
}

namespace {

double free_norm(const std::vector<double>& R, const std::vector<char>& constrained) {
    double s = 0.0;
    for (size_t i = 0; i < R.size(); ++i)
        if (!constrained[i]) s += R[i] * R[i];
    return std::sqrt(s);
}

} // namespace

FlowState solve_stokes(const Mesh& mesh, const PhysicsParams& phys,
                       const SolverSettings& solver) {
    const int n = mesh.n_vertices();
    FlowState st;
    st.u.assign(2 * n, 0.0);
    st.p.assign(n, 0.0);

    const DirichletBC bc = flow_dirichlet(mesh, phys.mean_inflow);
    // Residual at zero state gives the RHS of the linear problem: A x = -R(0)
    // (plus BC handling through elimination).
    std::vector<double> R;
    COOBuilder B(3 * n, 3 * n);
    assemble_navier_stokes(mesh, phys, solver, st.u, st.p, false, &R, &B);
    CSRMatrix A = B.to_csr();
    std::vector<double> rhs(3 * n);
    for (int i = 0; i < 3 * n; ++i) rhs[i] = -R[i];
    A.eliminate_dirichlet(bc.dofs, bc.values, rhs);

    LinearSolverConfig lcfg;
    lcfg.method = KrylovMethod::GMRES;
    lcfg.precond = solver.precond;
    lcfg.rel_tol = solver.linear_rel_tol;
    lcfg.max_iter = solver.linear_max_iter;
    lcfg.restart = solver.gmres_restart;
    std::vector<double> x(3 * n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, x, lcfg);
    if (!rec.converged)
        throw SolverFailure("solve_stokes: linear solver failed (" + rec.message + ")");
    for (int i = 0; i < 2 * n; ++i) st.u[i] = x[i];
    for (int i = 0; i < n; ++i) st.p[i] = x[2 * n + i];
    return st;
}

FlowState solve_navier_stokes(const Mesh& mesh, const PhysicsParams& phys,
                              const SolverSettings& solver, NewtonReport* report) {
    const int n = mesh.n_vertices();
    FlowState st = solve_stokes(mesh, phys, solver);

    const DirichletBC bc = flow_dirichlet(mesh, phys.mean_inflow);
    std::vector<char> constrained(3 * n, 0);
    for (size_t i = 0; i < bc.dofs.size(); ++i) {
        constrained[bc.dofs[i]] = 1;
        st.u[bc.dofs[i]] = bc.values[i];  // enforce BCs exactly on the state
    }

    NewtonReport rep;
    std::vector<double> R;
    assemble_navier_stokes(mesh, phys, solver, st.u, st.p, true, &R, nullptr);
    double rnorm = free_norm(R, constrained);
    rep.initial_residual = rnorm;
    const double target =
        std::max(solver.newton_abs_tol, solver.newton_rel_tol * std::max(rnorm, 1.0));

    LinearSolverConfig lcfg;
    lcfg.method = KrylovMethod::GMRES;
    lcfg.precond = solver.precond;
    lcfg.rel_tol = std::min(1e-4 * solver.newton_rel_tol, 1e-12);
    lcfg.max_iter = solver.linear_max_iter;
    lcfg.restart = solver.gmres_restart;

    for (int it = 0; it < solver.newton_max_iter && rnorm > target; ++it) {
        COOBuilder B(3 * n, 3 * n);
        assemble_navier_stokes(mesh, phys, solver, st.u, st.p, true, &R, &B);
        CSRMatrix A = B.to_csr();
        std::vector<double> rhs(3 * n);
        for (int i = 0; i < 3 * n; ++i) rhs[i] = -R[i];
        const std::vector<double> zeros(bc.dofs.size(), 0.0);
        A.eliminate_dirichlet(bc.dofs, zeros, rhs);
        for (int i = 0; i < 3 * n; ++i)
            if (constrained[i]) rhs[i] = 0.0;

        std::vector<double> dx(3 * n, 0.0);
        const ConvergenceRecord rec = solve_linear(A, rhs, dx, lcfg);
        if (!rec.converged && rec.rel_residual > 1e-8)
            throw SolverFailure("solve_navier_stokes: linear solver failed (" +
                                rec.message + ")");

        // Damped update: halve until the residual decreases.
        double lambda = 1.0;
        FlowState trial = st;
        double new_norm = rnorm;
        bool accepted = false;
        for (int halve = 0; halve <= solver.max_damping_halvings; ++halve) {
            trial = st;
            for (int i = 0; i < 2 * n; ++i) trial.u[i] += lambda * dx[i];
            for (int i = 0; i < n; ++i) trial.p[i] += lambda * dx[2 * n + i];
            std::vector<double> Rt;
            assemble_navier_stokes(mesh, phys, solver, trial.u, trial.p, true, &Rt,
                                   nullptr);
            new_norm = free_norm(Rt, constrained);
            if (new_norm < (1.0 - 1e-4 * lambda) * rnorm) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            rep.iterations = it + 1;
            rep.residual = rnorm;
            rep.message = "Newton line search stalled at minimum damping";
            if (report) *report = rep;
            throw SolverFailure("solve_navier_stokes: " + rep.message);
        }
        st = trial;
        rnorm = new_norm;
        rep.iterations = it + 1;
    }
    rep.converged = rnorm <= target;
    rep.residual = rnorm;
    if (report) *report = rep;
    if (!rep.converged)
        throw SolverFailure("solve_navier_stokes: Newton did not converge");
    return st;
}

double boundary_flux(const Mesh& mesh, const std::vector<double>& u,
                     BoundaryRole role) {
    double flux = 0.0;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role != role) continue;
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            const double s = EdgeQuadrature::s[q];
            const Vec2 uq(
                (1 - s) * u[2 * bf.v[0]] + s * u[2 * bf.v[1]],
                (1 - s) * u[2 * bf.v[0] + 1] + s * u[2 * bf.v[1] + 1]);
            flux += EdgeQuadrature::weight[q] * mesh.facet_len[f] *
                    dot(uq, mesh.facet_normal[f]);
        }
    }
    return flux;
}

double outflow_traction_residual(const Mesh& mesh, const PhysicsParams& phys,
                                 const FlowState& state) {
    const double nu = 1.0 / phys.re;
    double worst = 0.0;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role != BoundaryRole::Outflow) continue;
        const Mat2 Ju = vector_jacobian(mesh, state.u, bf.cell);
        const Vec2 n = mesh.facet_normal[f];
        const double pbar = 0.5 * (state.p[bf.v[0]] + state.p[bf.v[1]]);
        const Vec2 tr = pbar * n - nu * (Ju * n);
        worst = std::max(worst, norm(tr));
    }
    return worst;
}

} // namespace eroopt
