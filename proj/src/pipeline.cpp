#include "eroopt/pipeline.hpp"

#include "eroopt/gradient_flow.hpp"

#include <cmath>
#include <random>

namespace eroopt {

ForwardState solve_forward(const Mesh& mesh, const RunConfig& cfg, double c1,
                           ForwardReport* report) {
    ForwardState fwd;
    NewtonReport flow_rep, part_rep;
    fwd.flow = solve_navier_stokes(mesh, cfg.physics, cfg.solver, &flow_rep);
    fwd.up = solve_particle_velocity(mesh, cfg.physics, cfg.solver, fwd.flow.u,
                                     &part_rep);
    fwd.partition = classify_boundary(mesh, fwd.up);
    fwd.alpha =
        solve_volume_fraction(mesh, cfg.physics, cfg.solver, fwd.up, fwd.partition);
    if (report) {
        report->flow_newton = flow_rep;
        report->particle_newton = part_rep;
        report->cost = cost_functional(mesh, fwd.alpha, fwd.up, cfg.erosion, c1);
        report->integrated_erosion =
            integrated_erosion(mesh, fwd.alpha, fwd.up, cfg.erosion);
        report->impact_rate = impact_rate(mesh, fwd.alpha, fwd.up);
    }
    return fwd;
}

double reduced_cost(const Mesh& mesh, const RunConfig& cfg, double c1,
                    std::uint64_t* partition_signature) {
    ForwardReport rep;
    const ForwardState fwd = solve_forward(mesh, cfg, c1, &rep);
    if (partition_signature) *partition_signature = fwd.partition.signature;
    return rep.cost.total;
}

GradientResult reduced_gradient(const Mesh& mesh, const RunConfig& cfg, double c1,
                                const ShapeDerivativeOptions* shape_opt) {
    GradientResult res;
    res.fwd = solve_forward(mesh, cfg, c1, &res.report);
    res.c1 = res.report.cost.c1;
    res.adj = solve_adjoint(mesh, cfg.physics, cfg.erosion, cfg.solver, res.fwd);
    ShapeDerivativeOptions opt;
    if (shape_opt) opt = *shape_opt;
    opt.c1 = res.c1;
    res.b = shape_derivative(mesh, cfg.physics, cfg.erosion, cfg.solver, res.fwd,
                             res.adj, opt);
    return res;
}

std::vector<double> random_admissible_field(const Mesh& mesh, unsigned seed) {
    const int n = mesh.n_vertices();
    // 0/1 harmonic indicator of the design boundary.
    DirichletBC bc;
    for (int v = 0; v < n; ++v) {
        if (!mesh.vertex_on_boundary[v]) continue;
        bc.dofs.push_back(v);
        bc.values.push_back(mesh.vertex_deformable[v] ? 1.0 : 0.0);
    }
    const std::vector<double> psi = harmonic_scalar(mesh, bc);

    // Low-frequency random Fourier modes per component.
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, 2.5);
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    struct Mode {
        double ax, ay, kx, ky, ph;
    };
    std::vector<Mode> modes(4);
    for (Mode& m : modes)
        m = {amp(rng), amp(rng), freq(rng), freq(rng), phase(rng)};

    std::vector<double> V(2 * n, 0.0);
    double vmax = 0.0;
    for (int v = 0; v < n; ++v) {
        const Vec2 x = mesh.X[v];
        Vec2 w;
        for (const Mode& m : modes) {
            const double s = std::sin(m.kx * x.x + m.ky * x.y + m.ph);
            w.x += m.ax * s;
            w.y += m.ay * s;
        }
        w = psi[v] * w;
        V[2 * v] = w.x;
        V[2 * v + 1] = w.y;
        vmax = std::max(vmax, norm(w));
    }
    if (vmax > 0.0)
        for (double& x : V) x /= vmax;
    // Pinned boundary vertices stay bitwise zero regardless of roundoff.
    for (int v = 0; v < n; ++v)
        if (mesh.vertex_on_boundary[v] && !mesh.vertex_deformable[v]) {
            V[2 * v] = 0.0;
            V[2 * v + 1] = 0.0;
        }
    return V;
}

TaylorCurve taylor_costs(const Mesh& mesh, const RunConfig& cfg, double c1,
                         const std::vector<double>& V,
                         const std::vector<double>& steps) {
    TaylorCurve curve;
    std::uint64_t sig0 = 0;
    curve.j0 = reduced_cost(mesh, cfg, c1, &sig0);
    curve.steps = steps;
    for (const double t : steps) {
        const Mesh mt = mesh.deformed(V, t);
        std::uint64_t sig = 0;
        curve.jt.push_back(reduced_cost(mt, cfg, c1, &sig));
        if (sig != sig0) curve.partition_changed = true;
    }
    return curve;
}

double taylor_slope(const TaylorCurve& curve, double dj,
                    std::vector<double>* remainders) {
    std::vector<double> lt, lr;
    if (remainders) remainders->clear();
    for (size_t k = 0; k < curve.steps.size(); ++k) {
        const double rem =
            std::abs(curve.jt[k] - curve.j0 - curve.steps[k] * dj);
        if (remainders) remainders->push_back(rem);
        const double floor = 1e-14 * std::max(1.0, std::abs(curve.j0));
        if (rem > floor) {
            lt.push_back(std::log(curve.steps[k]));
            lr.push_back(std::log(rem));
        }
    }
    if (lt.size() < 2) return 2.0;  // remainders at roundoff: exact gradient
    double st = 0, sr = 0, stt = 0, str = 0;
    const double m = static_cast<double>(lt.size());
    for (size_t k = 0; k < lt.size(); ++k) {
        st += lt[k];
        sr += lr[k];
        stt += lt[k] * lt[k];
        str += lt[k] * lr[k];
    }
    return (m * str - st * sr) / (m * stt - st * st);
}

TaylorResult taylor_test(const Mesh& mesh, const RunConfig& cfg,
                         const std::vector<double>& V,
                         const std::vector<double>& steps,
                         const ShapeDerivativeOptions* shape_opt) {
    // The auto-rule weight is frozen on the base geometry and reused for
    // every perturbed evaluation.
    const GradientResult grad =
        reduced_gradient(mesh, cfg, cfg.optimizer.c1, shape_opt);
    const double c1 = grad.c1;
    const TaylorCurve curve = taylor_costs(mesh, cfg, c1, V, steps);

    TaylorResult res;
    res.j0 = curve.j0;
    res.dj = shape_directional(grad.b, V);
    res.steps = steps;
    res.slope = taylor_slope(curve, res.dj, &res.remainders);
    res.partition_changed = curve.partition_changed;
    return res;
}

std::vector<double> default_taylor_steps() {
    return {1e-2, 5e-3, 2.5e-3, 1.25e-3};
}

} // namespace eroopt
