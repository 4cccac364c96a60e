// Projected gradient descent on the vertex positions: shape gradient ->
// elasticity Riesz representative -> tangential correction -> quality-capped
// Armijo line search, with a per-iteration history record.
#pragma once

#include "eroopt/pipeline.hpp"

#include <string>
#include <vector>

namespace eroopt {

struct OptimizationIterate {
    int iter = 0;
    double cost = 0.0;
    double erosion = 0.0;
    double willmore = 0.0;
    double grad_norm = 0.0;       // || G - Pi || on the design boundary
    double step = 0.0;            // accepted Armijo step (0 on the last record)
    double integrated_erosion = 0.0;
    double impact_rate = 0.0;
    int forward_evals = 0;        // line-search cost evaluations
};

struct OptimizationResult {
    Mesh mesh;                    // final geometry
    std::vector<OptimizationIterate> history;
    double c1 = 0.0;              // frozen regularization weight
    bool converged = false;       // grad_tol reached before max_iters
    std::string stop_reason;
};

// Run Algorithm-style descent from the given geometry. Vertices outside the
// admissible set are never moved (bitwise identical coordinates).
OptimizationResult optimize_shape(const Mesh& mesh, const RunConfig& cfg);

// history.csv export (schema-tagged).
void write_history_csv(const std::string& path,
                       const std::vector<OptimizationIterate>& history);

} // namespace eroopt
