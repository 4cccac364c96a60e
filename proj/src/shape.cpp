#include "eroopt/shape.hpp"

#include "eroopt/fem.hpp"
#include "eroopt/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace eroopt {

TransformationDerivatives transformation_derivatives(const Mat2& JV, const Vec2& n) {
    TransformationDerivatives d;
    d.det_prime = trace(JV);
    d.m_prime = -transpose(JV);
    d.det_gamma_prime = trace(JV) - dot(n, JV * n);
    // D_G V = JV (I - n n^T); normal derivative is -(D_G V)^T n.
    const Mat2 dg = JV * (Mat2::identity() - Mat2::outer(n, n));
    d.normal_prime = -(transpose(dg) * n);
    return d;
}

double shape_directional(const std::vector<double>& b, const std::vector<double>& V) {
    if (b.size() != V.size())
        throw std::invalid_argument("shape_directional: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < b.size(); ++i) s += b[i] * V[i];
    return s;
}

void restrict_to_admissible(const Mesh& mesh, std::vector<double>& b) {
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.vertex_on_boundary[v] && !mesh.vertex_deformable[v]) {
            b[2 * v] = 0.0;
            b[2 * v + 1] = 0.0;
        }
}

std::vector<double> volume_shape_gradient(const Mesh& mesh) {
    // d|Omega|(V) = int div V = sum_c A_c I : JV|_c.
    std::vector<double> b(2 * mesh.n_vertices(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& v = mesh.cells[c];
        for (int a = 0; a < 3; ++a) {
            const Vec2 g = mesh.grad[c][a];
            b[2 * v[a]] += mesh.area[c] * g.x;
            b[2 * v[a] + 1] += mesh.area[c] * g.y;
        }
    }
    return b;
}

// -- Willmore regularization --------------------------------------------------

namespace {

// Vertex set of the discrete turning-angle energy: valid boundary chain and
// at least one adjacent design facet. Must match cost_functional exactly.
bool willmore_vertex(const Mesh& mesh, const BoundaryCurvature& bc, int v) {
    if (!bc.valid[v]) return false;
    const int fi = mesh.facet_into_vertex[v];
    const int fo = mesh.facet_out_of_vertex[v];
    return mesh.facets[fi].deformable || mesh.facets[fo].deformable;
}

} // namespace

double willmore_energy(const Mesh& mesh, double c1) {
    const BoundaryCurvature bc = boundary_curvature(mesh);
    double w = 0.0;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!willmore_vertex(mesh, bc, v)) continue;
        w += 0.5 * bc.h[v] * bc.h[v] * bc.mu[v];
    }
    return c1 * w;
}

std::vector<double> willmore_gradient_discrete(const Mesh& mesh, double c1) {
    // Exact gradient of c1 * sum theta^2 / (2 mu) with respect to the three
    // vertex positions entering each turning angle.
    std::vector<double> b(2 * mesh.n_vertices(), 0.0);
    const BoundaryCurvature bc = boundary_curvature(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!willmore_vertex(mesh, bc, v)) continue;
        const int vm = mesh.facets[mesh.facet_into_vertex[v]].v[0];
        const int vp = mesh.facets[mesh.facet_out_of_vertex[v]].v[1];
        const Vec2 e1 = mesh.X[v] - mesh.X[vm];
        const Vec2 e2 = mesh.X[vp] - mesh.X[v];
        const double cr = cross(e1, e2);
        const double dt = dot(e1, e2);
        const double theta = std::atan2(cr, dt);
        const double mu = bc.mu[v];
        const double den = cr * cr + dt * dt;
        // theta = atan2(c, d): dtheta = (d dc - c dd) / (c^2 + d^2), with
        // dc/de1 = -perp(e2), dc/de2 = perp(e1), dd/de1 = e2, dd/de2 = e1.
        const Vec2 dth_de1 = (1.0 / den) * (dt * (-perp(e2)) - cr * e2);
        const Vec2 dth_de2 = (1.0 / den) * (dt * perp(e1) - cr * e1);
        const Vec2 dmu_de1 = 0.5 * normalized(e1);
        const Vec2 dmu_de2 = 0.5 * normalized(e2);
        const double cth = c1 * theta / mu;                 // d/dtheta of c1 th^2/(2mu)
        const double cmu = -c1 * 0.5 * theta * theta / (mu * mu);
        const Vec2 de1 = cth * dth_de1 + cmu * dmu_de1;
        const Vec2 de2 = cth * dth_de2 + cmu * dmu_de2;
        // chain to vertices: e1 = x_v - x_vm, e2 = x_vp - x_v
        b[2 * vm] -= de1.x;
        b[2 * vm + 1] -= de1.y;
        b[2 * v] += de1.x - de2.x;
        b[2 * v + 1] += de1.y - de2.y;
        b[2 * vp] += de2.x;
        b[2 * vp + 1] += de2.y;
    }
    return b;
}

std::vector<double> willmore_gradient_paper(const Mesh& mesh, double c1) {
    // Surface-form gradient with P1 arc-length operators: per design facet
    // with endpoints a -> b, tangent t and normal n,
    //   dW(V) = c1/len [ ((n n^T - t t^T) D(h n)) . DV + 1/2 (t . D(h n)) (t . DV) ]
    // with D(f) := f_b - f_a evaluated from lumped vertex curvatures/normals.
    std::vector<double> b(2 * mesh.n_vertices(), 0.0);
    const BoundaryCurvature bc = boundary_curvature(mesh);
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (!bf.deformable) continue;
        const int a = bf.v[0], bv = bf.v[1];
        if (!bc.valid[a] || !bc.valid[bv]) continue;
        const double len = mesh.facet_len[f];
        const Vec2 t = normalized(mesh.X[bv] - mesh.X[a]);
        const Vec2 n = mesh.facet_normal[f];
        const Vec2 dhn = bc.h[bv] * bc.normal[bv] - bc.h[a] * bc.normal[a];
        const Mat2 proj = Mat2::outer(n, n) - Mat2::outer(t, t);
        const Vec2 coef = (c1 / len) * (proj * dhn + 0.5 * dot(t, dhn) * t);
        b[2 * bv] += coef.x;
        b[2 * bv + 1] += coef.y;
        b[2 * a] -= coef.x;
        b[2 * a + 1] -= coef.y;
    }
    return b;
}

// -- full assembly ------------------------------------------------------------

namespace {

// Distribute a per-cell coefficient matrix C (dL = C : JV) onto the vertex
// dual vector: JV = sum_a V_a grad phi_a^T, so b[a] += C grad phi_a.
inline void scatter_cell(const Mesh& mesh, int c, const Mat2& C,
                         std::vector<double>& b) {
    const auto& v = mesh.cells[c];
    for (int a = 0; a < 3; ++a) {
        const Vec2 r = C * mesh.grad[c][a];
        b[2 * v[a]] += r.x;
        b[2 * v[a] + 1] += r.y;
    }
}

inline double block_sign(const ShapeDerivativeOptions& opt, ShapeBlock blk) {
    return (opt.negate_mask & shape_block_bit(blk)) ? -1.0 : 1.0;
}

} // namespace

std::vector<double> shape_derivative(const Mesh& mesh, const PhysicsParams& phys,
                                     const ErosionParams& eros,
                                     const SolverSettings& solver,
                                     const ForwardState& fwd,
                                     const AdjointState& adj,
                                     const ShapeDerivativeOptions& opt) {
    if (!adj.fluid_done)
        throw std::logic_error("shape_derivative: adjoint state incomplete");
    const int n = mesh.n_vertices();
    std::vector<double> b(2 * n, 0.0);

    const double nu = 1.0 / phys.re;
    const double kinv = 1.0 / phys.k_perm;
    const double invpe = 1.0 / phys.pe;
    const double invfr2 = phys.inv_fr2();
    const Vec2 grav = invfr2 * Vec2(phys.g_dir_x, phys.g_dir_y);
    const double two_stk = 2.0 / phys.stk;
    const double U = solver.u_stab;

    const double s_fdiv = block_sign(opt, ShapeBlock::FluidDiv);
    const double s_fgrad = block_sign(opt, ShapeBlock::FluidGrad);
    const double s_ptr = block_sign(opt, ShapeBlock::PressureTraceGrad);
    const double s_pdiv = block_sign(opt, ShapeBlock::ParticleDiv);
    const double s_pgrad = block_sign(opt, ShapeBlock::ParticleGrad);
    const double s_kdiv = block_sign(opt, ShapeBlock::KDiffusionDiv);
    const double s_tdiv = block_sign(opt, ShapeBlock::TransportDiv);
    const double s_tgrad = block_sign(opt, ShapeBlock::TransportGrad);
    const double s_surf = block_sign(opt, ShapeBlock::SurfaceErosion);
    const double s_will = block_sign(opt, ShapeBlock::Willmore);
    const double s_stab = block_sign(opt, ShapeBlock::Stabilization);

    const Mat2 I = Mat2::identity();

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double h = mesh.hcell[c];
        const double tau_f = stab_tau(nu, h, U);
        const double tau_p = stab_tau(kinv, h, U);
        const double tau_t = stab_tau(invpe, h, U);
        const double dlsic = 0.5 * U * h;
        // d tau / dt = tau^2 (4 nu / h^2 + U / h) div V  (h' = h div V / 2)
        const double dtau_f = tau_f * tau_f * (4.0 * nu / (h * h) + U / h);
        const double dtau_p = tau_p * tau_p * (4.0 * kinv / (h * h) + U / h);
        const double dtau_t = tau_t * tau_t * (4.0 * invpe / (h * h) + U / h);
        const double ddlsic = 0.25 * U * h;

        const Mat2 Ju = vector_jacobian(mesh, fwd.flow.u, c);
        const Mat2 Jup = vector_jacobian(mesh, fwd.up, c);
        const Mat2 Jzuf = vector_jacobian(mesh, adj.z_uf, c);
        const Mat2 Jzup = vector_jacobian(mesh, adj.z_up, c);
        const Vec2 gradp = scalar_gradient(mesh, fwd.flow.p, c);
        const Vec2 gradzp = scalar_gradient(mesh, adj.z_p, c);
        const Vec2 grada = scalar_gradient(mesh, fwd.alpha, c);
        const Vec2 gradza = scalar_gradient(mesh, adj.z_alpha, c);
        const double divu = trace(Ju);
        const double divup = trace(Jup);
        const double divzuf = trace(Jzuf);

        Mat2 C;  // accumulates dL = C : JV over the cell
        for (int q = 0; q < TriQuadrature::n; ++q) {
            const double* ba = TriQuadrature::bary[q];
            const double w = TriQuadrature::weight[q] * mesh.area[c];
            const Vec2 uq = eval_vector(mesh, fwd.flow.u, c, ba);
            const Vec2 upq = eval_vector(mesh, fwd.up, c, ba);
            const Vec2 zufq = eval_vector(mesh, adj.z_uf, c, ba);
            const Vec2 zupq = eval_vector(mesh, adj.z_up, c, ba);
            const double pq = eval_scalar(mesh, fwd.flow.p, c, ba);
            const double zpq = eval_scalar(mesh, adj.z_p, c, ba);
            const double aq = eval_scalar(mesh, fwd.alpha, c, ba);
            const double zaq = eval_scalar(mesh, adj.z_alpha, c, ba);

            // ---- fluid Galerkin -------------------------------------------
            const double sig_f = dot(Ju * uq - grav, zufq) + nu * ddot(Ju, Jzuf) -
                                 pq * divzuf + zpq * divu;
            C += (w * s_fdiv * sig_f) * I;
            C -= (w * s_fgrad) *
                 (Mat2::outer(transpose(Ju) * zufq, uq) +
                  nu * (transpose(Ju) * Jzuf + transpose(Jzuf) * Ju));
            C += (w * s_ptr) * (pq * transpose(Jzuf) - zpq * transpose(Ju));

            // ---- particle Galerkin ----------------------------------------
            const Vec2 slip = upq - uq;
            const double s = std::max(norm(slip), 1e-10);
            const double dsn = drag_coefficient(particle_reynolds(phys.drag_c, s));
            const Vec2 rp = Jup * upq + (two_stk * dsn) * slip - grav;
            C += (w * s_pdiv * dot(rp, zupq)) * I;
            C += (w * s_kdiv * kinv * ddot(Jup, Jzup)) * I;
            C -= (w * s_pgrad) *
                 (Mat2::outer(transpose(Jup) * zupq, upq) +
                  kinv * (transpose(Jup) * Jzup + transpose(Jzup) * Jup));

            // ---- transport Galerkin ---------------------------------------
            const double ra = dot(grada, upq) + aq * divup;
            const double sig_t = ra * zaq + invpe * dot(grada, gradza);
            C += (w * s_tdiv * sig_t) * I;
            C -= (w * s_tgrad) *
                 (zaq * (Mat2::outer(grada, upq) + aq * transpose(Jup)) +
                  invpe * (Mat2::outer(grada, gradza) + Mat2::outer(gradza, grada)));

            if (opt.include_stabilization) {
                // ---- fluid SUPG/PSPG/LSIC ---------------------------------
                const Vec2 rm = Ju * uq + gradp - grav;
                const Vec2 wns = Jzuf * uq + gradzp;
                double sig = (tau_f + dtau_f) * dot(rm, wns) +
                             (dlsic + ddlsic) * divu * divzuf;
                Mat2 Cs = (-tau_f) * (Mat2::outer(transpose(Ju) * wns, uq) +
                                      Mat2::outer(gradp, wns) +
                                      Mat2::outer(transpose(Jzuf) * rm, uq) +
                                      Mat2::outer(gradzp, rm));
                Cs -= dlsic * (divzuf * transpose(Ju) + divu * transpose(Jzuf));
                // ---- particle SUPG ----------------------------------------
                const Vec2 wp = Jzup * upq;
                sig += (tau_p + dtau_p) * dot(rp, wp);
                Cs -= tau_p * (Mat2::outer(transpose(Jup) * wp, upq) +
                               Mat2::outer(transpose(Jzup) * rp, upq));
                // ---- transport SUPG ---------------------------------------
                const double wt = dot(upq, gradza);
                sig += (tau_t + dtau_t) * ra * wt;
                Cs -= tau_t * (wt * (Mat2::outer(grada, upq) + aq * transpose(Jup)) +
                               ra * Mat2::outer(gradza, upq));
                C += (w * s_stab * sig) * I + (w * s_stab) * Cs;
            }
        }
        scatter_cell(mesh, c, C, b);
    }

    // ---- surface erosion term ----------------------------------------------
    // d/dt int_wall g ds = int ( g div_G V + dg/dn . n' ) ds; with P1 V this is
    // exactly Delta V . ( sum_q w_q [ g t - (dg/dn . t) n ] ).
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const auto& bf = mesh.facets[f];
        if (bf.role != BoundaryRole::Wall) continue;
        const Vec2 n = mesh.facet_normal[f];
        const Vec2 t = normalized(mesh.X[bf.v[1]] - mesh.X[bf.v[0]]);
        Vec2 coef;
        for (int q = 0; q < EdgeQuadrature::n; ++q) {
            const double sq = EdgeQuadrature::s[q];
            const double aq = (1 - sq) * fwd.alpha[bf.v[0]] + sq * fwd.alpha[bf.v[1]];
            const Vec2 upq(
                (1 - sq) * fwd.up[2 * bf.v[0]] + sq * fwd.up[2 * bf.v[1]],
                (1 - sq) * fwd.up[2 * bf.v[0] + 1] + sq * fwd.up[2 * bf.v[1] + 1]);
            const ErosionSensitivity es = erosion_sensitivities(aq, upq, n, eros);
            coef += EdgeQuadrature::weight[q] * (es.g * t - dot(es.dg_dn, t) * n);
        }
        coef = (s_surf)*coef;
        b[2 * bf.v[1]] += coef.x;
        b[2 * bf.v[1] + 1] += coef.y;
        b[2 * bf.v[0]] -= coef.x;
        b[2 * bf.v[0] + 1] -= coef.y;
    }

    // ---- Willmore term ------------------------------------------------------
    if (opt.c1 != 0.0) {
        const std::vector<double> wg =
            opt.willmore_paper_form ? willmore_gradient_paper(mesh, opt.c1)
                                    : willmore_gradient_discrete(mesh, opt.c1);
        for (int i = 0; i < 2 * n; ++i) b[i] += s_will * wg[i];
    }
    return b;
}

} // namespace eroopt
