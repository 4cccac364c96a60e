// One-way-coupled forward chain (flow -> particle velocity -> boundary
// classification -> volume fraction -> cost), the reduced shape gradient, and
// the finite-difference Taylor verification harness built on top of them.
#pragma once

#include "eroopt/adjoint.hpp"
#include "eroopt/config.hpp"
#include "eroopt/shape.hpp"

#include <cstdint>
#include <vector>

namespace eroopt {

struct ForwardReport {
    NewtonReport flow_newton;
    NewtonReport particle_newton;
    CostBreakdown cost;
    double integrated_erosion = 0.0;  // E = int_wall e ds
    double impact_rate = 0.0;         // eta = 1 - outflux / influx
};

// Run the full forward chain on the given mesh. c1 < 0 freezes the auto-rule
// weight on this geometry (reported in the cost breakdown).
ForwardState solve_forward(const Mesh& mesh, const RunConfig& cfg, double c1,
                           ForwardReport* report = nullptr);

// Reduced cost J(Omega): forward chain + cost only.
double reduced_cost(const Mesh& mesh, const RunConfig& cfg, double c1,
                    std::uint64_t* partition_signature = nullptr);

struct GradientResult {
    std::vector<double> b;   // shape-derivative dual vector (2n)
    double c1 = 0.0;         // weight actually used (frozen auto-rule value)
    ForwardState fwd;
    AdjointState adj;
    ForwardReport report;
};

// Forward + adjoint + shape derivative on the current geometry.
GradientResult reduced_gradient(const Mesh& mesh, const RunConfig& cfg, double c1,
                                const ShapeDerivativeOptions* shape_opt = nullptr);

// -- Taylor verification ------------------------------------------------------

// Smooth admissible displacement field: a low-frequency random Fourier field
// multiplied by the harmonic 0/1 indicator of the design boundary, normalized
// to unit maximum magnitude. Vanishes on every non-deformable boundary vertex.
std::vector<double> random_admissible_field(const Mesh& mesh, unsigned seed);

// Reduced-cost samples J(Omega_t) along x -> x + t V (fresh forward solve per
// step); flags any change of the inflow/outflow boundary classification.
struct TaylorCurve {
    double j0 = 0.0;
    std::vector<double> steps;
    std::vector<double> jt;
    bool partition_changed = false;
};

TaylorCurve taylor_costs(const Mesh& mesh, const RunConfig& cfg, double c1,
                         const std::vector<double>& V,
                         const std::vector<double>& steps);

// Least-squares slope of log |J(t) - J(0) - t dJ| versus log t. Exactly zero
// remainders (below `floor`) are dropped from the fit.
double taylor_slope(const TaylorCurve& curve, double dj,
                    std::vector<double>* remainders = nullptr);

struct TaylorResult {
    double j0 = 0.0;
    double dj = 0.0;
    std::vector<double> steps;
    std::vector<double> remainders;
    double slope = 0.0;
    bool partition_changed = false;
};

// End-to-end: gradient at the base geometry, cost samples, slope.
TaylorResult taylor_test(const Mesh& mesh, const RunConfig& cfg,
                         const std::vector<double>& V,
                         const std::vector<double>& steps,
                         const ShapeDerivativeOptions* shape_opt = nullptr);

// Default step ladder for the verification runs.
std::vector<double> default_taylor_steps();

} // namespace eroopt
