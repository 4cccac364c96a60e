#include "eroopt/particles.hpp"

#include <algorithm>
#include <cmath>

namespace eroopt {

namespace {

constexpr double kSlipFloor = 1e-10;
constexpr double kDragDeriv = 0.10305;  // 0.15 * 0.687

} // namespace

Vec2 drag_coefficient_gradient(double drag_c, const Vec2& slip) {
    if (drag_c <= 0.0) return Vec2();
    const double s = std::max(norm(slip), kSlipFloor);
    const double f = kDragDeriv * std::pow(drag_c, 0.687) * std::pow(s, -1.313);
    return f * slip;
}

void assemble_particle_momentum(const Mesh& mesh, const PhysicsParams& phys,
                                const SolverSettings& solver,
                                const std::vector<double>& up,
                                const std::vector<double>& uf, double keff_inv,
                                std::vector<double>* residual,
                                COOBuilder* jac_up, COOBuilder* jac_uf) {
    const int n = mesh.n_vertices();
    const double invfr2 = phys.inv_fr2();
    const Vec2 grav = invfr2 * Vec2(phys.g_dir_x, phys.g_dir_y);
    const double two_stk = 2.0 / phys.stk;

    if (residual) residual->assign(2 * n, 0.0);

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& v = mesh.cells[c];
        const double A = mesh.area[c];
        const Vec2* g = mesh.grad[c].data();
        const double tau = stab_tau(keff_inv, mesh.hcell[c], solver.u_stab);

        const Mat2 Jup = vector_jacobian(mesh, up, c);

        if (residual) {
            std::vector<double>& R = *residual;
            for (int i = 0; i < 3; ++i) {
                R[2 * v[i]] += keff_inv * A *
                               (Jup(0, 0) * g[i].x + Jup(0, 1) * g[i].y);
                R[2 * v[i] + 1] += keff_inv * A *
                                   (Jup(1, 0) * g[i].x + Jup(1, 1) * g[i].y);
            }
        }

        for (int q = 0; q < TriQuadrature::n; ++q) {
            const double* b = TriQuadrature::bary[q];
            const double w = TriQuadrature::weight[q] * A;
            const Vec2 upq = eval_vector(mesh, up, c, b);
            const Vec2 ufq = eval_vector(mesh, uf, c, b);
            const Vec2 slip = upq - ufq;
            const double s = std::max(norm(slip), kSlipFloor);
            const double dsn = drag_coefficient(particle_reynolds(phys.drag_c, s));
            const Vec2 ddsn = drag_coefficient_gradient(phys.drag_c, slip);

            const Vec2 conv = Jup * upq;
            const Vec2 drag = (two_stk * dsn) * slip;
            const Vec2 rp = conv + drag - grav;

            if (residual) {
                std::vector<double>& R = *residual;
                for (int i = 0; i < 3; ++i) {
                    const double adv_i = dot(upq, g[i]);
                    R[2 * v[i]] += w * ((conv.x + drag.x - grav.x) * b[i] +
                                        tau * rp.x * adv_i);
                    R[2 * v[i] + 1] += w * ((conv.y + drag.y - grav.y) * b[i] +
                                            tau * rp.y * adv_i);
                }
            }

            if (jac_up) {
                for (int i = 0; i < 3; ++i) {
                    const double adv_i = dot(upq, g[i]);
                    for (int j = 0; j < 3; ++j) {
                        for (int l = 0; l < 2; ++l) {
                            // d r_p / d up_{jl}
                            Vec2 drp(Jup(0, l) * b[j], Jup(1, l) * b[j]);
                            if (l == 0) drp.x += dot(g[j], upq);
                            else drp.y += dot(g[j], upq);
                            // drag: 2/Stk (d_SN I + ddsn (x) slip) phi_j e_l
                            const double el[2] = {l == 0 ? 1.0 : 0.0, l == 0 ? 0.0 : 1.0};
                            drp.x += two_stk * b[j] *
                                     (dsn * el[0] + slip.x * (l == 0 ? ddsn.x : ddsn.y));
                            drp.y += two_stk * b[j] *
                                     (dsn * el[1] + slip.y * (l == 0 ? ddsn.x : ddsn.y));
                            const double dtest = b[j] * ((l == 0) ? g[i].x : g[i].y);
                            jac_up->add(2 * v[i], 2 * v[j] + l,
                                        w * (drp.x * b[i] + tau * (drp.x * adv_i + rp.x * dtest)));
                            jac_up->add(2 * v[i] + 1, 2 * v[j] + l,
                                        w * (drp.y * b[i] + tau * (drp.y * adv_i + rp.y * dtest)));
                        }
                    }
                }
            }
            if (jac_uf) {
                for (int i = 0; i < 3; ++i) {
                    const double adv_i = dot(upq, g[i]);
                    for (int j = 0; j < 3; ++j) {
                        for (int l = 0; l < 2; ++l) {
                            // d drag / d uf_{jl} = -2/Stk (d_SN I + ddsn (x) slip) phi_j e_l
                            const double el[2] = {l == 0 ? 1.0 : 0.0, l == 0 ? 0.0 : 1.0};
                            Vec2 drp;
                            drp.x = -two_stk * b[j] *
                                    (dsn * el[0] + slip.x * (l == 0 ? ddsn.x : ddsn.y));
                            drp.y = -two_stk * b[j] *
                                    (dsn * el[1] + slip.y * (l == 0 ? ddsn.x : ddsn.y));
                            jac_uf->add(2 * v[i], 2 * v[j] + l,
                                        w * drp.x * (b[i] + tau * adv_i));
                            jac_uf->add(2 * v[i] + 1, 2 * v[j] + l,
                                        w * drp.y * (b[i] + tau * adv_i));
                        }
                    }
                }
            }
        }

        if (jac_up) {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double lap = keff_inv * A * dot(g[i], g[j]);
                    jac_up->add(2 * v[i], 2 * v[j], lap);
                    jac_up->add(2 * v[i] + 1, 2 * v[j] + 1, lap);
                }
        }
    }
}

namespace {

DirichletBC particle_dirichlet(const Mesh& mesh, const PhysicsParams& phys) {
    const std::vector<double> uin = inflow_profile(mesh, phys.mean_inflow);
    std::vector<char> is_in(mesh.n_vertices(), 0);
    for (const auto& bf : mesh.facets)
        if (bf.role == BoundaryRole::Inflow) is_in[bf.v[0]] = is_in[bf.v[1]] = 1;
    DirichletBC bc;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!is_in[v]) continue;
        bc.dofs.push_back(2 * v);
        bc.values.push_back(uin[2 * v]);
        bc.dofs.push_back(2 * v + 1);
        bc.values.push_back(uin[2 * v + 1]);
    }
    return bc;
}

double free_norm2(const std::vector<double>& R, const std::vector<char>& constrained) {
    double s = 0.0;
    for (size_t i = 0; i < R.size(); ++i)
        if (!constrained[i]) s += R[i] * R[i];
    return std::sqrt(s);
}

} // namespace

std::vector<double> solve_particle_velocity(const Mesh& mesh,
                                            const PhysicsParams& phys,
                                            const SolverSettings& solver,
                                            const std::vector<double>& uf,
                                            NewtonReport* report) {
    const int n = mesh.n_vertices();
    std::vector<double> up = uf;  // warm start from the carrier flow

    const DirichletBC bc = particle_dirichlet(mesh, phys);
    std::vector<char> constrained(2 * n, 0);
    for (size_t i = 0; i < bc.dofs.size(); ++i) {
        constrained[bc.dofs[i]] = 1;
        up[bc.dofs[i]] = bc.values[i];
    }

    // Geometric ramp of the artificial viscosity down to the physical 1/K.
    const double target = 1.0 / phys.k_perm;
    std::vector<double> levels;
    double lev = solver.ramp_start;
    while (lev > target * (1.0 + 1e-12)) {
        levels.push_back(lev);
        lev /= solver.ramp_factor;
    }
    levels.push_back(target);

    LinearSolverConfig lcfg;
    lcfg.method = KrylovMethod::GMRES;
    lcfg.precond = solver.precond;
    lcfg.rel_tol = std::min(1e-4 * solver.newton_rel_tol, 1e-12);
    lcfg.max_iter = solver.linear_max_iter;
    lcfg.restart = solver.gmres_restart;

    NewtonReport rep;
    for (const double keff_inv : levels) {
        std::vector<double> R;
        assemble_particle_momentum(mesh, phys, solver, up, uf, keff_inv, &R,
                                   nullptr, nullptr);
        double rnorm = free_norm2(R, constrained);
        if (rep.initial_residual == 0.0) rep.initial_residual = rnorm;
        const double tol =
            std::max(solver.newton_abs_tol, solver.newton_rel_tol * std::max(rnorm, 1.0));
        for (int it = 0; it < solver.newton_max_iter && rnorm > tol; ++it) {
            COOBuilder B(2 * n, 2 * n);
            assemble_particle_momentum(mesh, phys, solver, up, uf, keff_inv, &R,
                                       &B, nullptr);
            CSRMatrix A = B.to_csr();
            std::vector<double> rhs(2 * n);
            for (int i = 0; i < 2 * n; ++i) rhs[i] = -R[i];
            const std::vector<double> zeros(bc.dofs.size(), 0.0);
            A.eliminate_dirichlet(bc.dofs, zeros, rhs);
            for (int i = 0; i < 2 * n; ++i)
                if (constrained[i]) rhs[i] = 0.0;
            std::vector<double> dx(2 * n, 0.0);
            const ConvergenceRecord rec = solve_linear(A, rhs, dx, lcfg);
            if (!rec.converged && rec.rel_residual > 1e-8)
                throw SolverFailure("solve_particle_velocity: linear solver failed (" +
                                    rec.message + ")");
            double lambda = 1.0;
            bool accepted = false;
            std::vector<double> trial;
            double new_norm = rnorm;
            for (int halve = 0; halve <= solver.max_damping_halvings; ++halve) {
                trial = up;
                for (int i = 0; i < 2 * n; ++i) trial[i] += lambda * dx[i];
                std::vector<double> Rt;
                assemble_particle_momentum(mesh, phys, solver, trial, uf, keff_inv,
                                           &Rt, nullptr, nullptr);
                new_norm = free_norm2(Rt, constrained);
                if (new_norm < (1.0 - 1e-4 * lambda) * rnorm) {
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted)
                throw SolverFailure(
                    "solve_particle_velocity: Newton line search stalled");
            up = trial;
            rnorm = new_norm;
            ++rep.iterations;
        }
        if (rnorm > tol)
            throw SolverFailure("solve_particle_velocity: ramp level did not converge");
        rep.residual = rnorm;
    }
    rep.converged = true;
    if (report) *report = rep;
    return up;
}

BoundaryPartition classify_boundary(const Mesh& mesh,
                                    const std::vector<double>& up) {
    BoundaryPartition part;
    part.is_minus.assign(mesh.n_facets(), 0);
    std::uint64_t sig = 1469598103934665603ull;  // FNV-1a
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        const Vec2 mid(0.5 * (up[2 * bf.v[0]] + up[2 * bf.v[1]]),
                       0.5 * (up[2 * bf.v[0] + 1] + up[2 * bf.v[1] + 1]));
        const bool minus = dot(mid, mesh.facet_normal[f]) <= 0.0;  // ties -> minus
        part.is_minus[f] = minus ? 1 : 0;
        sig ^= static_cast<std::uint64_t>(minus ? 0x9e3779b9 : f + 1);
        sig *= 1099511628211ull;
    }
    part.signature = sig;
    return part;
}

DirichletBC volume_fraction_dirichlet(const Mesh& mesh, const PhysicsParams& phys,
                                      const BoundaryPartition& part) {
    const int n = mesh.n_vertices();
    std::vector<char> is_in(n, 0), is_minus(n, 0);
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role == BoundaryRole::Inflow)
            is_in[bf.v[0]] = is_in[bf.v[1]] = 1;
        else if (part.is_minus[f])
            is_minus[bf.v[0]] = is_minus[bf.v[1]] = 1;
    }
    DirichletBC bc;
    for (int v = 0; v < n; ++v) {
        if (is_in[v]) {
            bc.dofs.push_back(v);
            bc.values.push_back(phys.alpha_in);
        } else if (is_minus[v]) {
            bc.dofs.push_back(v);
            bc.values.push_back(0.0);
        }
    }
    return bc;
}

void assemble_transport(const Mesh& mesh, const PhysicsParams& phys,
                        const SolverSettings& solver,
                        const std::vector<double>& up,
                        const std::vector<double>* alpha, COOBuilder* matrix,
                        COOBuilder* jac_up) {
    const double invpe = 1.0 / phys.pe;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& v = mesh.cells[c];
        const double A = mesh.area[c];
        const Vec2* g = mesh.grad[c].data();
        const double tau = stab_tau(invpe, mesh.hcell[c], solver.u_stab);
        const Mat2 Jup = vector_jacobian(mesh, up, c);
        const double divup = trace(Jup);
        const Vec2 grada = alpha ? scalar_gradient(mesh, *alpha, c) : Vec2();

        if (matrix) {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    matrix->add(v[i], v[j], invpe * A * dot(g[i], g[j]));
        }
        for (int q = 0; q < TriQuadrature::n; ++q) {
            const double* b = TriQuadrature::bary[q];
            const double w = TriQuadrature::weight[q] * A;
            const Vec2 upq = eval_vector(mesh, up, c, b);
            const double aq = alpha ? eval_scalar(mesh, *alpha, c, b) : 0.0;
            const double ra = alpha ? dot(grada, upq) + aq * divup : 0.0;
            for (int i = 0; i < 3; ++i) {
                const double test = b[i] + tau * dot(upq, g[i]);
                if (matrix) {
                    for (int j = 0; j < 3; ++j)
                        matrix->add(v[i], v[j],
                                    w * (dot(g[j], upq) + b[j] * divup) * test);
                }
                if (jac_up && alpha) {
                    for (int j = 0; j < 3; ++j) {
                        for (int l = 0; l < 2; ++l) {
                            const double gl = (l == 0) ? grada.x : grada.y;
                            const double gjl = (l == 0) ? g[j].x : g[j].y;
                            const double dra = b[j] * gl + aq * gjl;
                            const double dtest = tau * b[j] * ((l == 0) ? g[i].x : g[i].y);
                            jac_up->add(v[i], 2 * v[j] + l,
                                        w * (dra * test + ra * dtest));
                        }
                    }
                }
            }
        }
    }
}

std::vector<double> solve_volume_fraction(const Mesh& mesh,
                                          const PhysicsParams& phys,
                                          const SolverSettings& solver,
                                          const std::vector<double>& up,
                                          const BoundaryPartition& part) {
    const int n = mesh.n_vertices();
    COOBuilder B(n, n);
    assemble_transport(mesh, phys, solver, up, nullptr, &B, nullptr);
    CSRMatrix A = B.to_csr();
    std::vector<double> rhs(n, 0.0);
    const DirichletBC bc = volume_fraction_dirichlet(mesh, phys, part);
    A.eliminate_dirichlet(bc.dofs, bc.values, rhs);

    LinearSolverConfig lcfg;
    lcfg.method = KrylovMethod::GMRES;
    lcfg.precond = solver.precond;
    lcfg.rel_tol = solver.linear_rel_tol;
    lcfg.max_iter = solver.linear_max_iter;
    lcfg.restart = solver.gmres_restart;
    std::vector<double> alpha(n, 0.0);
    const ConvergenceRecord rec = solve_linear(A, rhs, alpha, lcfg);
    if (!rec.converged)
        throw SolverFailure("solve_volume_fraction: linear solver failed (" +
                            rec.message + ")");
    return alpha;
}

} // namespace eroopt
