#include "eroopt/optimizer.hpp"

#include "eroopt/gradient_flow.hpp"
#include "eroopt/io.hpp"

#include <cmath>

namespace eroopt {

OptimizationResult optimize_shape(const Mesh& mesh, const RunConfig& cfg) {
    const OptimizerSettings& opt = cfg.optimizer;
    OptimizationResult res{mesh, {}, 0.0, false, ""};
    Mesh cur = mesh;

    // The regularization weight is frozen on the initial geometry.
    double c1 = opt.c1;
    double t_prev = opt.t0;

    for (int it = 0; it < opt.max_iters; ++it) {
        const GradientResult grad = reduced_gradient(cur, cfg, c1);
        if (it == 0) {
            c1 = grad.c1;
            res.c1 = c1;
        }

        std::vector<double> b = grad.b;
        restrict_to_admissible(cur, b);
        const std::vector<double> mu_star =
            lame_coefficient(cur, opt.mu_min, opt.mu_max);
        const std::vector<double> G = project_gradient(cur, mu_star, b, opt);
        const std::vector<double> Pi = correct_gradient(cur, mu_star, G, opt);
        std::vector<double> W(G.size());
        for (size_t i = 0; i < G.size(); ++i) W[i] = -(G[i] - Pi[i]);

        OptimizationIterate rec;
        rec.iter = it;
        rec.cost = grad.report.cost.total;
        rec.erosion = grad.report.cost.erosion;
        rec.willmore = grad.report.cost.willmore;
        rec.grad_norm = design_boundary_norm(cur, W);
        rec.integrated_erosion = grad.report.integrated_erosion;
        rec.impact_rate = grad.report.impact_rate;

        if (opt.grad_tol > 0.0 && rec.grad_norm <= opt.grad_tol) {
            res.history.push_back(rec);
            res.converged = true;
            res.stop_reason = "gradient norm below tolerance";
            break;
        }

        // Predicted slope of the reduced cost along W (negative by
        // construction when the elasticity solve succeeded).
        const double slope = shape_directional(grad.b, W);

        // Armijo with per-cell quality safeguards: shrink the trial step until
        // the deformation map stays admissible, then until sufficient decrease.
        double t = std::min(opt.t0, t_prev / opt.ls_shrink);
        while (t > 0.0 && !cur.deformation_quality(W, t).admissible(opt.quality))
            t *= opt.ls_shrink;

        bool accepted = false;
        for (int ev = 0; ev < opt.ls_max_evals && t > 0.0; ++ev) {
            const Mesh trial = cur.deformed(W, t, opt.quality);
            double jt;
            try {
                jt = reduced_cost(trial, cfg, c1);
            } catch (const SolverFailure&) {
                t *= opt.ls_shrink;
                continue;
            }
            ++rec.forward_evals;
            if (jt <= rec.cost + opt.c_armijo * t * slope) {
                cur = trial;
                rec.step = t;
                t_prev = t;
                accepted = true;
                break;
            }
            t *= opt.ls_shrink;
        }
        res.history.push_back(rec);
        if (!accepted) {
            res.stop_reason = "line search failed to make progress";
            break;
        }
        if (it == opt.max_iters - 1) res.stop_reason = "iteration budget exhausted";
    }
    if (res.stop_reason.empty()) res.stop_reason = "iteration budget exhausted";
    res.mesh = cur;
    return res;
}

void write_history_csv(const std::string& path,
                       const std::vector<OptimizationIterate>& history) {
    std::vector<std::vector<double>> rows;
    for (const auto& h : history)
        rows.push_back({static_cast<double>(h.iter), h.cost, h.erosion, h.willmore,
                        h.grad_norm, h.step, h.integrated_erosion, h.impact_rate,
                        static_cast<double>(h.forward_evals)});
    write_csv(path, "optimization-history-v1",
              {"iter", "cost", "erosion", "willmore", "grad_norm", "step",
               "integrated_erosion", "impact_rate", "forward_evals"},
              rows);
}

} // namespace eroopt
